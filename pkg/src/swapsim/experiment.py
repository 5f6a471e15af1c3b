"""
Delayed-choice entanglement swapping, trial by trial.

Each trial sends the two station singlets through Eve's phase shifter and
splitter on ``(A', B')`` and through Alice and Bob's splitter on ``(A, B)``,
then resolves the two detections in the configured order. Timestamps only
label the records; the joint statistics cannot depend on them.

Two engines produce the same statistics:

* ``analytic``: exact joint probabilities, obtained by projecting the fully
  evolved state sector by sector in the configured order.
* ``montecarlo``: seeded sampling. The default ``vectorized`` sampler draws
  the first sector's outcome from its marginal and the second from the
  conditional, in batches; ``per_trial`` runs :func:`run_trial`, which
  measures and collapses the state with the analyzers of
  :mod:`swapsim.measure`.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .fock import CUTOFF, FockState, born_distribution, project
from .measure import (
    OUTCOMES,
    BellOutcome,
    ab_analyze,
    ab_detectors,
    classify_eve,
    eve_analyze,
    eve_detectors,
)
from .optics import HALF, WAVELENGTH, BeamSplitter, PhaseShifter, apply_bs, apply_phase, mirror_phase
from .source import A, A_P, AB_MODES, B, B_P, EVE_MODES, prepare_source

TWO_PI = 2.0 * math.pi
CHUNK = 65_536


class Order(str, enum.Enum):
    EVE_FIRST = "EveFirst"
    AB_FIRST = "ABFirst"


def default_phases(n: int = 13) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.0, TWO_PI, n))


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one run.

    Times are in seconds and lengths in metres. ``trials`` counts all trials;
    trial ``i`` uses ``phases[i % len(phases)]``.
    """

    trials: int = 13_000
    phases: tuple[float, ...] = field(default_factory=default_phases)
    efficiency: float = 1.0
    visibility: float = 1.0
    dark_count: float = 0.0
    seed: int = 42
    order: Order = Order.EVE_FIRST
    delay: float = 20e-9
    wavelength: float = WAVELENGTH
    coherence_time: float = 0.1e-12
    eo_toggle: bool = False
    station_transmittivity: float = HALF
    cutoff: int = CUTOFF
    trial_period: float = 1e-6
    mode: str = "montecarlo"
    sampler: str = "vectorized"

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        object.__setattr__(self, "order", Order(self.order))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if not self.phases:
            raise ValueError("phase schedule is empty")
        if not all(math.isfinite(p) for p in self.phases):
            raise ValueError("phase schedule contains non-finite values")
        for name in ("efficiency", "visibility", "dark_count"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        if not self.delay >= 0.0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        if not self.wavelength > 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.mode not in ("montecarlo", "analytic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sampler not in ("vectorized", "per_trial"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    @classmethod
    def paper(cls, **overrides) -> ExperimentConfig:
        """Detector efficiency 0.45, fringe visibility 0.91, 20 ns delayed Eve."""
        params = dict(
            trials=1_000_000,
            efficiency=0.45,
            visibility=0.91,
            order=Order.AB_FIRST,
            delay=20e-9,
            wavelength=727.6e-9,
            coherence_time=0.1e-12,
        )
        params.update(overrides)
        return cls(**params)

    @classmethod
    def from_displacements(cls, displacements: Sequence[float], wavelength: float = WAVELENGTH, **kw):
        """Phase schedule given as mirror displacements."""
        phases = tuple(mirror_phase(dx, wavelength) for dx in displacements)
        return cls(phases=phases, wavelength=wavelength, **kw)

    def replace(self, **changes) -> ExperimentConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    phase: float
    eo_flip: bool
    ab_clicks: tuple[bool, bool]
    t_ab: float
    eve_outcome: BellOutcome
    t_e: float
    order: Order

    @property
    def sorted_outcome(self) -> BellOutcome:
        """Eve's label after undoing a pi flip of the modulator."""
        return self.eve_outcome.swapped() if self.eo_flip else self.eve_outcome


class RecordTable:
    """Column store of trial records; iterates as :class:`TrialRecord`."""

    columns = ("trial_id", "phase", "eo_flip", "d1s", "d2s", "eve", "t_ab", "t_e")

    def __init__(self, trial_id, phase, eo_flip, d1s, d2s, eve, t_ab, t_e, order: Order):
        self.trial_id = np.asarray(trial_id, dtype=np.int64)
        self.phase = np.asarray(phase, dtype=float)
        self.eo_flip = np.asarray(eo_flip, dtype=bool)
        self.d1s = np.asarray(d1s, dtype=bool)
        self.d2s = np.asarray(d2s, dtype=bool)
        self.eve = np.asarray(eve, dtype=np.int8)
        self.t_ab = np.asarray(t_ab, dtype=float)
        self.t_e = np.asarray(t_e, dtype=float)
        self.order = Order(order)
        n = len(self.trial_id)
        if any(len(getattr(self, c)) != n for c in self.columns):
            raise ValueError("record columns have different lengths")

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord]) -> RecordTable:
        records = list(records)
        if not records:
            raise ValueError("no records")
        orders = {r.order for r in records}
        if len(orders) != 1:
            raise ValueError("records mix measurement orders")
        return cls(
            [r.trial_id for r in records],
            [r.phase for r in records],
            [r.eo_flip for r in records],
            [r.ab_clicks[0] for r in records],
            [r.ab_clicks[1] for r in records],
            [r.eve_outcome.code for r in records],
            [r.t_ab for r in records],
            [r.t_e for r in records],
            orders.pop(),
        )

    def __len__(self):
        return len(self.trial_id)

    def record(self, i: int) -> TrialRecord:
        return TrialRecord(
            int(self.trial_id[i]),
            float(self.phase[i]),
            bool(self.eo_flip[i]),
            (bool(self.d1s[i]), bool(self.d2s[i])),
            float(self.t_ab[i]),
            OUTCOMES[int(self.eve[i])],
            float(self.t_e[i]),
            self.order,
        )

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            return self.record(int(key))
        return RecordTable(*(getattr(self, c)[key] for c in self.columns), self.order)

    def __iter__(self) -> Iterator[TrialRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def __eq__(self, other):
        if not isinstance(other, RecordTable):
            return NotImplemented
        return self.order == other.order and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in self.columns
        )

    def sorted_eve(self) -> np.ndarray:
        """Eve codes with Psi-/Psi+ swapped on trials whose modulator flipped."""
        eve = self.eve.copy()
        flip = self.eo_flip
        eve[flip & (self.eve == 0)] = 1
        eve[flip & (self.eve == 1)] = 0
        return eve

    @staticmethod
    def concat(tables: Sequence[RecordTable]) -> RecordTable:
        tables = list(tables)
        return RecordTable(
            *(np.concatenate([getattr(t, c) for t in tables]) for c in RecordTable.columns),
            tables[0].order,
        )


# exact evolution and joint distributions


def evolve(state: FockState, phi: float) -> FockState:
    """Phase on ``A'``, then Eve's and Alice/Bob's 50:50 splitters."""
    state = apply_phase(state, PhaseShifter(A_P, phi))
    state = apply_bs(state, BeamSplitter(A_P, B_P))
    return apply_bs(state, BeamSplitter(A, B))


def photon_joint(state: FockState, order: Order) -> dict:
    """``{(eve_pattern, ab_pattern): probability}`` from sequential projections.

    The sector measured first is projected first; each projection only
    selects amplitudes, so the two orders agree bit for bit.
    """
    first, second = (EVE_MODES, AB_MODES) if Order(order) is Order.EVE_FIRST else (AB_MODES, EVE_MODES)
    joint = {}
    for o1 in born_distribution(state, first):
        branch = project(state, first, o1)
        for o2 in born_distribution(branch, second) if branch.norm_sq() > 0 else ():
            p = project(branch, second, o2).norm_sq()
            key = (o1, o2) if first == EVE_MODES else (o2, o1)
            joint[key] = p
    return dict(sorted(joint.items()))


def _detector_tables(config: ExperimentConfig):
    d1, d2 = eve_detectors(config.efficiency, config.dark_count)
    s1, s2 = ab_detectors(config.efficiency, config.dark_count)
    return (d1, d2), (s1, s2)


def _port(detector, modes, pattern) -> int:
    return pattern[modes.index(detector.mode)]


def click_distribution(photons: dict, config: ExperimentConfig) -> dict:
    """Thin a photon-number joint into ``{((D1*, D2*), BellOutcome): p}``."""
    (d1, d2), (s1, s2) = _detector_tables(config)
    acc: dict = {}
    for (eve, ab), p in photons.items():
        assert tuple(eve) != (1, 1), "photon coincidence after Eve's splitter"
        probs = [
            float(det.click_probability(_port(det, modes, pat)))
            for det, modes, pat in ((d1, EVE_MODES, eve), (d2, EVE_MODES, eve), (s1, AB_MODES, ab), (s2, AB_MODES, ab))
        ]
        for clicks in np.ndindex(2, 2, 2, 2):
            w = p
            for c, q in zip(clicks, probs):
                w *= q if c else 1.0 - q
            if w == 0.0:
                continue
            label = OUTCOMES[int(classify_eve(sum(eve), clicks[0], clicks[1]))]
            acc.setdefault(((bool(clicks[2]), bool(clicks[3])), label), []).append(w)
    return {k: math.fsum(v) for k, v in sorted(acc.items(), key=_key_order)}


def _key_order(item):
    (clicks, label), _ = item
    return (clicks, label.code)


def _mix(parts: Sequence[tuple[float, dict]]) -> dict:
    acc: dict = {}
    for weight, dist in parts:
        if weight == 0.0:
            continue
        for k, p in dist.items():
            acc.setdefault(k, []).append(weight * p)
    return {k: math.fsum(v) for k, v in sorted(acc.items(), key=_key_order)}


def _relabel(dist: dict) -> dict:
    return {(clicks, label.swapped()): p for (clicks, label), p in dist.items()}


def _dephasing_shifts(state: FockState) -> list[float]:
    # uniform average of a trig polynomial of degree H is exact on 2H+1 nodes
    h = state.max_occupation(A_P)
    m = 2 * h + 1
    return [TWO_PI * k / m for k in range(m)]


def joint_distribution(config: ExperimentConfig, phi: float, relabel: bool = True) -> dict:
    """Exact ``{((D1*, D2*), BellOutcome): probability}`` at scheduled phase ``phi``.

    Imperfect interference enters as a mixture: with probability
    ``1 - visibility`` the ``A'`` arm carries a uniformly random phase.
    With ``eo_toggle`` half the trials get an extra pi; ``relabel`` swaps
    their Psi labels back, as Victor does when sorting.
    """
    source = prepare_source(config.station_transmittivity, config.cutoff)
    shifts = _dephasing_shifts(source)

    def at(psi):
        return click_distribution(photon_joint(evolve(source, psi), config.order), config)

    def dephased(psi):
        v = config.visibility
        parts = [(v, at(psi))]
        if v < 1.0:
            parts += [((1.0 - v) / len(shifts), at(psi + s)) for s in shifts]
        return _mix(parts)

    if not config.eo_toggle:
        return dephased(phi)
    flipped = dephased(phi + math.pi)
    return _mix([(0.5, dephased(phi)), (0.5, _relabel(flipped) if relabel else flipped)])


def ab_marginal(dist: dict) -> dict:
    acc: dict = {}
    for (clicks, _), p in dist.items():
        acc.setdefault(clicks, []).append(p)
    return {k: math.fsum(v) for k, v in sorted(acc.items())}


# Monte Carlo


def trial_rng(seed: int, trial_id: int) -> np.random.Generator:
    """Independent stream for one trial, derived from the run seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_id,)))


def _timestamps(config: ExperimentConfig, trial_id):
    base = np.asarray(trial_id, dtype=float) * config.trial_period
    if config.order is Order.EVE_FIRST:
        return base + config.delay, base
    return base, base + config.delay


def run_trial(config: ExperimentConfig, trial_id: int, rng: np.random.Generator | None = None) -> TrialRecord:
    """One shot through the state-collapsing analyzers."""
    rng = trial_rng(config.seed, trial_id) if rng is None else rng
    phi = config.phases[trial_id % len(config.phases)]
    eve_dets, ab_dets = _detector_tables(config)
    state = prepare_source(config.station_transmittivity, config.cutoff)
    extra = rng.uniform(0.0, TWO_PI) if rng.random() >= config.visibility else 0.0

    def eo():
        return bool(config.eo_toggle and rng.random() < 0.5)

    if config.order is Order.EVE_FIRST:
        flip = eo()
        outcome, rest = eve_analyze(state, phi + extra + math.pi * flip, eve_dets, rng)
        clicks, _ = ab_analyze(rest, ab_dets, rng)
    else:
        clicks, rest = ab_analyze(state, ab_dets, rng)
        flip = eo()
        outcome, _ = eve_analyze(rest, phi + extra + math.pi * flip, eve_dets, rng)
    t_ab, t_e = _timestamps(config, trial_id)
    return TrialRecord(trial_id, phi, flip, clicks, float(t_ab), outcome, float(t_e), config.order)


class _HarmonicTable:
    """Photon joint of the evolved source as a trigonometric polynomial in phase."""

    def __init__(self, config: ExperimentConfig):
        source = prepare_source(config.station_transmittivity, config.cutoff)
        h = source.max_occupation(A_P)
        m = 2 * h + 1
        nodes = [TWO_PI * k / m for k in range(m)]
        tables = [photon_joint(evolve(source, x), config.order) for x in nodes]
        keys = sorted({k for t in tables for k in t})
        assert all(tuple(e) != (1, 1) for e, _ in keys), "photon coincidence after Eve's splitter"
        self.eve_patterns = sorted({e for e, _ in keys})
        self.ab_patterns = sorted({ab for _, ab in keys})
        values = np.zeros((m, len(self.eve_patterns), len(self.ab_patterns)))
        for n, t in enumerate(tables):
            for (e, ab), p in t.items():
                values[n, self.eve_patterns.index(e), self.ab_patterns.index(ab)] = p
        x = np.asarray(nodes)
        self.coeffs = [np.tensordot(np.exp(-1j * k * x), values, axes=1) / m for k in range(h + 1)]

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(self.coeffs[0].real, (len(psi),) + self.coeffs[0].shape).copy()
        for k, c in enumerate(self.coeffs[1:], start=1):
            z = np.exp(1j * k * psi)[:, None, None]
            out += 2.0 * (z * c[None]).real
        return np.clip(out, 0.0, None)


def _categorical(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights, axis=1)
    idx = (cum < (u * cum[:, -1])[:, None]).sum(axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


def _sample_chunk(config, table, trial_id, rng) -> RecordTable:
    n = len(trial_id)
    phases = np.asarray(config.phases)
    phi = phases[trial_id % len(phases)]
    flip = rng.random(n) < 0.5 if config.eo_toggle else np.zeros(n, dtype=bool)
    dephase = rng.random(n) >= config.visibility
    extra = np.where(dephase, rng.uniform(0.0, TWO_PI, n), 0.0)
    probs = table(phi + extra + math.pi * flip)
    u = rng.random((n, 2))
    rows = np.arange(n)
    if config.order is Order.EVE_FIRST:
        ie = _categorical(probs.sum(axis=2), u[:, 0])
        iab = _categorical(probs[rows, ie, :], u[:, 1])
    else:
        iab = _categorical(probs.sum(axis=1), u[:, 0])
        ie = _categorical(probs[rows, :, iab], u[:, 1])
    eve = np.asarray(table.eve_patterns)[ie]
    ab = np.asarray(table.ab_patterns)[iab]
    (d1, d2), (s1, s2) = _detector_tables(config)
    c = rng.random((n, 4))
    click_d1 = c[:, 0] < d1.click_probability(eve[:, EVE_MODES.index(d1.mode)])
    click_d2 = c[:, 1] < d2.click_probability(eve[:, EVE_MODES.index(d2.mode)])
    click_s1 = c[:, 2] < s1.click_probability(ab[:, AB_MODES.index(s1.mode)])
    click_s2 = c[:, 3] < s2.click_probability(ab[:, AB_MODES.index(s2.mode)])
    code = classify_eve(eve.sum(axis=1), click_d1, click_d2)
    t_ab, t_e = _timestamps(config, trial_id)
    return RecordTable(trial_id, phi, flip, click_s1, click_s2, code, t_ab, t_e, config.order)


def sample_records(config: ExperimentConfig) -> RecordTable:
    """All trials of a Monte Carlo run, deterministic in ``config.seed``."""
    if config.sampler == "per_trial":
        return RecordTable.from_records([run_trial(config, i) for i in range(config.trials)])
    rng = np.random.default_rng(config.seed)
    table = _HarmonicTable(config)
    chunks = [
        _sample_chunk(config, table, np.arange(start, min(start + CHUNK, config.trials)), rng)
        for start in range(0, config.trials, CHUNK)
    ]
    return RecordTable.concat(chunks)


def victor_sort(records: RecordTable, relabel: bool = True) -> dict[BellOutcome, RecordTable]:
    """Split already-written records by Eve's (later) outcome.

    Only the classical columns are read. With ``relabel`` the Psi labels of
    modulator-flipped trials are swapped back first.
    """
    if len(records) == 0:
        raise ValueError("no records to sort")
    eve = records.sorted_eve() if relabel else records.eve
    return {label: records[eve == label.code] for label in OUTCOMES}


class ExperimentResult(NamedTuple):
    records: RecordTable | None
    summary: object


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured engine and summarize.

    Analytic runs return ``records=None`` and a summary of exact probabilities.
    """
    from .analysis import analytic_summary, summarize

    if config.mode == "analytic":
        return ExperimentResult(None, analytic_summary(config))
    records = sample_records(config)
    return ExperimentResult(records, summarize(records))


@dataclass(frozen=True)
class OrderInvarianceReport:
    mode: str
    passed: bool
    identical: bool | None = None
    tvd: float | None = None
    threshold: float | None = None
    classes: int | None = None
    trials: int | None = None


def empirical_joint(records: RecordTable) -> dict:
    key = records.eve.astype(np.int64) * 4 + records.d1s * 1 + records.d2s * 2
    counts = np.bincount(key, minlength=16)
    n = len(records)
    return {
        ((bool(k & 1), bool(k & 2)), OUTCOMES[k // 4]): counts[k] / n for k in range(16) if counts[k]
    }


def total_variation(p: dict, q: dict) -> float:
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


def order_invariance_check(config: ExperimentConfig) -> OrderInvarianceReport:
    """Run Eve-first and AB-first versions of ``config`` and compare joints.

    Analytic mode demands equality of every probability at every scheduled
    phase; Monte Carlo mode bounds the total variation distance of the pooled
    joints by ``5 sqrt(K / N)``.
    """
    eve_first = config.replace(order=Order.EVE_FIRST)
    ab_first = config.replace(order=Order.AB_FIRST)
    if config.mode == "analytic":
        same = all(
            joint_distribution(eve_first, phi, relabel=False) == joint_distribution(ab_first, phi, relabel=False)
            for phi in config.phases
        )
        return OrderInvarianceReport("analytic", same, identical=same)
    p = empirical_joint(sample_records(eve_first))
    q = empirical_joint(sample_records(ab_first))
    k = len(set(p) | set(q))
    tvd = total_variation(p, q)
    threshold = 5.0 * math.sqrt(k / config.trials)
    return OrderInvarianceReport(
        "montecarlo", tvd < threshold, tvd=tvd, threshold=threshold, classes=k, trials=config.trials
    )


__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "Order",
    "OrderInvarianceReport",
    "RecordTable",
    "TrialRecord",
    "ab_marginal",
    "click_distribution",
    "default_phases",
    "empirical_joint",
    "evolve",
    "joint_distribution",
    "order_invariance_check",
    "photon_joint",
    "prepare_source",
    "run_experiment",
    "run_trial",
    "sample_records",
    "total_variation",
    "trial_rng",
    "victor_sort",
]
