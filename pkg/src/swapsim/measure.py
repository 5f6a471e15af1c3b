"""
Threshold detectors, the two beam-splitter Bell analyzers and the
homodyne coincidence law.

Port assignment follows from the beam-splitter rotation in
:mod:`swapsim.optics`: the antisymmetric state leaves through port 2, so
``D1`` (Eve) watches ``B'`` and ``D1*`` (Alice and Bob) watches ``B``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fock import FockState, measure_modes, born_distribution, project, tensor
from .optics import BeamSplitter, PhaseShifter, apply_bs, apply_phase, coherent_state
from .source import A, A_P, AB_MODES, B, B_P, EVE_MODES, prepare_source


class BellOutcome(str, enum.Enum):
    PSI_MINUS = "PsiMinus"
    PSI_PLUS = "PsiPlus"
    PHI_UNDISCRIMINATED = "PhiUndiscriminated"
    NO_CLICK = "NoClick"

    @property
    def code(self) -> int:
        return OUTCOMES.index(self)

    def swapped(self) -> BellOutcome:
        """Partner label under a pi phase flip (Psi- <-> Psi+)."""
        return {
            BellOutcome.PSI_MINUS: BellOutcome.PSI_PLUS,
            BellOutcome.PSI_PLUS: BellOutcome.PSI_MINUS,
        }.get(self, self)


OUTCOMES = tuple(BellOutcome)
PSI_MINUS, PSI_PLUS, PHI_UNDISCRIMINATED, NO_CLICK = range(4)


@dataclass(frozen=True)
class Detector:
    """Threshold (bucket) detector on one output mode.

    Clicks with probability ``1 - (1 - dark)(1 - efficiency)**n`` for ``n``
    photons in its mode.
    """

    name: str
    mode: str
    efficiency: float = 1.0
    dark_count: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency {self.efficiency} outside [0, 1]")
        if not 0.0 <= self.dark_count <= 1.0:
            raise ValueError(f"dark-count probability {self.dark_count} outside [0, 1]")

    def click_probability(self, n):
        return 1.0 - (1.0 - self.dark_count) * (1.0 - self.efficiency) ** np.asarray(n)

    def click(self, n: int, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self.click_probability(n))


def eve_detectors(efficiency: float = 1.0, dark_count: float = 0.0):
    return (Detector("D1", B_P, efficiency, dark_count), Detector("D2", A_P, efficiency, dark_count))


def ab_detectors(efficiency: float = 1.0, dark_count: float = 0.0):
    return (Detector("D1*", B, efficiency, dark_count), Detector("D2*", A, efficiency, dark_count))


def bell_states(sector: str = "AB") -> dict[str, FockState]:
    """The four Bell states of the vacuum/one-photon qubits of a mode pair.

    ``sector`` is ``"AB"`` for modes ``(A, B)`` or ``"Eve"`` for ``(A', B')``.
    Keys are ``"Phi+", "Phi-", "Psi+", "Psi-"``.
    """
    m1, m2 = {"AB": AB_MODES, "Eve": EVE_MODES}[sector]

    def ket(n1, n2):
        return FockState.basis({m1: n1, m2: n2})

    s = 2**-0.5
    return {
        "Phi+": s * (ket(0, 0) + ket(1, 1)),
        "Phi-": s * (ket(0, 0) - ket(1, 1)),
        "Psi+": s * (ket(0, 1) + ket(1, 0)),
        "Psi-": s * (ket(0, 1) - ket(1, 0)),
    }


def classify_eve(eve_photons, d1_click, d2_click):
    """Bell-analyzer label codes from Eve's photon count and click pattern.

    Works elementwise on arrays. A click caused by a two-photon excitation of
    Eve's sector is tagged ``PHI_UNDISCRIMINATED``; so is a double click,
    which only dark counts can produce.
    """
    eve_photons = np.asarray(eve_photons)
    d1 = np.asarray(d1_click, dtype=bool)
    d2 = np.asarray(d2_click, dtype=bool)
    code = np.full(np.broadcast(eve_photons, d1, d2).shape, NO_CLICK, dtype=np.int8)
    code[d1 & ~d2] = PSI_MINUS
    code[d2 & ~d1] = PSI_PLUS
    code[(d1 | d2) & (eve_photons >= 2)] = PHI_UNDISCRIMINATED
    code[d1 & d2] = PHI_UNDISCRIMINATED
    return code


def _check_bunching(pattern):
    # a 50:50 splitter never sends two photons to different ports
    assert tuple(pattern) != (1, 1), "photon coincidence after Eve's splitter: engine bug"


class EveResult(NamedTuple):
    outcome: BellOutcome
    collapsed: FockState


def eve_analyze(state: FockState, phi: float, detectors=None, rng: np.random.Generator | None = None) -> EveResult:
    """Eve's partial Bell measurement on ``(A', B')``.

    Applies the phase ``phi`` to ``A'``, mixes ``A'`` and ``B'`` on a 50:50
    splitter and reads both outputs with threshold detectors.
    """
    rng = np.random.default_rng() if rng is None else rng
    d1, d2 = eve_detectors() if detectors is None else detectors
    state = apply_bs(apply_phase(state, PhaseShifter(A_P, phi)), BeamSplitter(A_P, B_P))
    pattern, collapsed, _ = measure_modes(state, EVE_MODES, rng)
    _check_bunching(pattern)
    photons = dict(zip(EVE_MODES, pattern))
    c1, c2 = d1.click(photons[d1.mode], rng), d2.click(photons[d2.mode], rng)
    if c1 and c2 and sum(pattern) >= 2:
        raise AssertionError("double click from a bunched pair: engine bug")
    return EveResult(OUTCOMES[int(classify_eve(sum(pattern), c1, c2))], collapsed)


class ABResult(NamedTuple):
    clicks: tuple[bool, bool]
    collapsed: FockState


def ab_analyze(state: FockState, detectors=None, rng: np.random.Generator | None = None) -> ABResult:
    """Alice and Bob's joint test: 50:50 mixing of ``(A, B)`` and two detectors.

    ``clicks`` is ordered ``(D1*, D2*)``.
    """
    rng = np.random.default_rng() if rng is None else rng
    d1, d2 = ab_detectors() if detectors is None else detectors
    state = apply_bs(state, BeamSplitter(A, B))
    pattern, collapsed, _ = measure_modes(state, AB_MODES, rng)
    photons = dict(zip(AB_MODES, pattern))
    return ABResult((d1.click(photons[d1.mode], rng), d2.click(photons[d2.mode], rng)), collapsed)


def fringe_probability(phi, visibility: float = 1.0):
    """Conditional coincidence weight ``(1 + v cos phi) / 2``."""
    return 0.5 * (1.0 + visibility * np.cos(phi))


def homodyne_probability(alpha_mag, theta, theta_p, phi):
    """Coincidence intensity of the two weak-LO homodyne detectors given Psi-."""
    a2 = np.asarray(alpha_mag) ** 2
    return 0.25 * a2 * (a2 + 1.0 + np.cos(theta_p - theta + phi))


class HomodyneEstimate(NamedTuple):
    rate: float
    stderr: float
    trials: int


LO_A, LO_B = "LO_A", "LO_B"


def swapped_pair(phi: float, outcome: BellOutcome = BellOutcome.PSI_MINUS) -> FockState:
    """Normalized ``(A, B)`` state left after Eve's single click at phase ``phi``."""
    state = prepare_source()
    state = apply_bs(apply_phase(state, PhaseShifter(A_P, phi)), BeamSplitter(A_P, B_P))
    d1, d2 = eve_detectors()
    port = {BellOutcome.PSI_MINUS: d1.mode, BellOutcome.PSI_PLUS: d2.mode}[outcome]
    return project(state, EVE_MODES, tuple(int(m == port) for m in EVE_MODES)).normalized()


def homodyne_state(alpha: complex, alpha_p: complex, phi: float) -> FockState:
    """Swapped pair plus both local oscillators after the homodyne splitters.

    Alice's splitter mixes ``A`` with the ``alpha_p`` oscillator and Bob's
    mixes ``B`` with the ``alpha`` oscillator; the sign of the interference
    term then reads ``cos(theta' - theta + phi)``.
    """
    pair = swapped_pair(phi).with_cutoff(3)
    state = tensor(tensor(pair, coherent_state(LO_A, alpha_p, cutoff=3)), coherent_state(LO_B, alpha, cutoff=3))
    return apply_bs(apply_bs(state, BeamSplitter(A, LO_A)), BeamSplitter(B, LO_B))


# output ports seen by D_A' and D_B; opposite-sign ports give the 1 + cos branch
HOMODYNE_PORTS = (A, LO_B)


def homodyne_simulate(alpha: complex, alpha_p: complex, phi: float, trials: int, rng: np.random.Generator) -> HomodyneEstimate:
    """Monte Carlo estimate of the D_A'--D_B intensity coincidence.

    Photon numbers at the two homodyne outputs are sampled from the exact
    Born distribution; the estimator is the mean product ``n_A' n_B``,
    whose expectation is the normally ordered intensity correlation.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dist = born_distribution(homodyne_state(alpha, alpha_p, phi), HOMODYNE_PORTS)
    outcomes = list(dist)
    probs = np.array([dist[o] for o in outcomes])
    products = np.array([o[0] * o[1] for o in outcomes], dtype=float)
    idx = rng.choice(len(outcomes), size=trials, p=probs / probs.sum())
    sample = products[idx]
    stderr = sample.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return HomodyneEstimate(float(sample.mean()), float(stderr), trials)
