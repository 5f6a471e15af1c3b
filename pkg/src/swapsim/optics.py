"""
Passive linear optics acting on :class:`~swapsim.fock.FockState`.

Beam splitters act in place on two labelled modes through the creation
operators::

    a1^dag -> t b1^dag - r b2^dag
    a2^dag -> r b1^dag + t b2^dag

so a photon entering mode 1 of a 50:50 splitter leaves as
``(|1,0> - |0,1>)/sqrt(2)``, the minus-sign mode singlet. With this
rotation the antisymmetric two-mode state always exits through port 2 and
the symmetric one through port 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .fock import CUTOFF, PRUNE, CapacityError, FockState, StructuralError

HALF = 2 ** -0.5
WAVELENGTH = 727.6e-9  # m, down-converted photons


class DomainError(ValueError):
    """Argument outside the physical or numerical domain of a formula."""


@dataclass(frozen=True)
class BeamSplitter:
    mode_1: str
    mode_2: str
    t: float = HALF
    r: float = HALF

    def __post_init__(self):
        if self.mode_1 == self.mode_2:
            raise StructuralError("beam splitter needs two distinct modes")
        if abs(self.t**2 + self.r**2 - 1.0) > 1e-12:
            raise DomainError(f"t^2 + r^2 = {self.t**2 + self.r**2}, expected 1")

    @classmethod
    def from_transmittivity(cls, mode_1: str, mode_2: str, t: float) -> BeamSplitter:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"transmittivity {t} outside [0, 1]")
        return cls(mode_1, mode_2, t, math.sqrt(1.0 - t * t))

    @property
    def matrix(self):
        """Row i holds the output coefficients of input creation operator i."""
        return ((self.t, -self.r), (self.r, self.t))

    @property
    def modes(self):
        return (self.mode_1, self.mode_2)

    def __str__(self):
        return f"BeamSplitter({self.mode_1}, {self.mode_2}, t={self.t:.6g})"


@dataclass(frozen=True)
class PhaseShifter:
    mode: str
    phase: float

    @property
    def modes(self):
        return (self.mode,)

    def __str__(self):
        return f"PhaseShifter({self.mode}, phi={self.phase:.6g})"


def _expand(power: int, c1: float, c2: float):
    """Coefficients of (c1 x + c2 y)**power as {(i, j): coeff}."""
    return {
        (k, power - k): math.comb(power, k) * c1**k * c2 ** (power - k)
        for k in range(power + 1)
    }


def apply_bs(state: FockState, bs: BeamSplitter) -> FockState:
    """Send ``state`` through a beam splitter acting on its two modes."""
    i, j = state.index(bs.mode_1), state.index(bs.mode_2)
    (u11, u12), (u21, u22) = bs.matrix
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.items():
        n1, n2 = occ[i], occ[j]
        norm = math.sqrt(math.factorial(n1) * math.factorial(n2))
        for (p1, p2), c1 in _expand(n1, u11, u12).items():
            for (q1, q2), c2 in _expand(n2, u21, u22).items():
                m1, m2 = p1 + q1, p2 + q2
                coeff = c1 * c2 * math.sqrt(math.factorial(m1) * math.factorial(m2)) / norm
                if coeff == 0.0:
                    continue
                new = list(occ)
                new[i], new[j] = m1, m2
                key = tuple(new)
                out[key] = out.get(key, 0j) + amp * coeff
    for key, amp in out.items():
        if abs(amp) >= PRUNE and max(key[i], key[j]) > state.cutoff:
            raise CapacityError(
                f"{bs} puts {max(key[i], key[j])} photons in one mode (cutoff {state.cutoff})"
            )
    return FockState(state.modes, {k: a for k, a in out.items() if abs(a) >= PRUNE}, state.cutoff)


def apply_phase(state: FockState, ps: PhaseShifter) -> FockState:
    """Multiply each ket by ``exp(i n phi)``, n the occupation of ``ps.mode``."""
    i = state.index(ps.mode)
    if ps.phase == 0.0:
        return state
    phases = [cmath.exp(1j * n * ps.phase) for n in range(state.cutoff + 1)]
    return FockState(state.modes, {occ: a * phases[occ[i]] for occ, a in state.items()}, state.cutoff)


def mirror_phase(delta_x: float, wavelength: float = WAVELENGTH) -> float:
    """Phase between the two arms produced by a mirror displacement (metres in, radians out)."""
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return 2**1.5 * math.pi * delta_x / wavelength


def coherent_state(mode: str, alpha: complex, cutoff: int = CUTOFF, tol: float = 1e-3) -> FockState:
    """Weak coherent state truncated after the two-photon term.

    Raises :class:`DomainError` when ``|alpha|^2 > 0.25`` or when the
    discarded weight exceeds ``tol``.
    """
    mean_n = abs(alpha) ** 2
    if mean_n > 0.25:
        raise DomainError(f"|alpha|^2 = {mean_n:.3g} is outside the weak-field regime")
    kept = math.exp(-mean_n) * (1.0 + mean_n + mean_n**2 / 2.0)
    if 1.0 - kept > tol:
        raise DomainError(f"truncation discards {1.0 - kept:.2e} of the norm (> {tol})")
    amps = {(0,): 1.0, (1,): alpha, (2,): alpha**2 / math.sqrt(2.0)}
    if cutoff < 2:
        raise CapacityError(f"coherent state needs cutoff >= 2, got {cutoff}")
    return FockState((mode,), amps, cutoff).normalized()


@dataclass(frozen=True)
class OpticalCircuit:
    """Ordered beam splitters and phase shifters on a declared set of modes."""

    modes: tuple[str, ...]
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(set(self.modes)) != len(self.modes):
            raise StructuralError(f"duplicate modes in {self.modes}")
        for el in self.elements:
            missing = [m for m in el.modes if m not in self.modes]
            if missing:
                raise StructuralError(f"{el} references undeclared modes {missing}")

    def then(self, *elements) -> OpticalCircuit:
        return OpticalCircuit(self.modes, self.elements + tuple(elements))

    def apply(self, state: FockState) -> FockState:
        extra = [m for m in self.modes if m not in state.modes]
        if extra:
            raise StructuralError(f"state lacks circuit modes {extra}")
        for el in self.elements:
            state = apply_bs(state, el) if isinstance(el, BeamSplitter) else apply_phase(state, el)
        return state

    def __len__(self):
        return len(self.elements)
