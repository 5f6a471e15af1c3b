"""
Sparse Fock-space statevectors over labelled bosonic modes.

A :class:`FockState` maps occupation patterns (one integer per mode, in the
order of ``state.modes``) to complex amplitudes. States are immutable; every
operation returns a new state.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

CUTOFF = 2
PRUNE = 1e-15
NORM_TOL = 1e-12


class StructuralError(ValueError):
    """Mode sets do not fit together (overlap, mismatch, unknown label)."""


class CapacityError(ValueError):
    """An occupation number would exceed the state's cutoff."""


class FockState:
    """Pure state of a few bosonic modes in the occupation-number basis.

    Parameters
    ----------
    modes : sequence of str
        Mode labels. Order fixes the layout of the occupation tuples.
    amplitudes : mapping
        ``{occupations: amplitude}`` with ``occupations`` a tuple aligned
        with ``modes``. Entries with ``|amplitude| < 1e-15`` are dropped.
    cutoff : int
        Largest occupation allowed in any single mode.
    """

    __slots__ = ("_modes", "_amps", "_cutoff")

    def __init__(self, modes: Sequence[str], amplitudes: Mapping, cutoff: int = CUTOFF):
        modes = tuple(modes)
        if len(set(modes)) != len(modes):
            raise StructuralError(f"duplicate mode labels in {modes}")
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        amps = {}
        for occ, amp in amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(modes):
                raise StructuralError(f"pattern {occ} does not match modes {modes}")
            if abs(amp) < PRUNE:
                continue
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            if any(n > cutoff for n in occ):
                raise CapacityError(f"pattern {occ} exceeds cutoff {cutoff}")
            amps[occ] = amps.get(occ, 0j) + complex(amp)
        self._modes = modes
        self._amps = amps
        self._cutoff = int(cutoff)

    # construction helpers

    @classmethod
    def basis(cls, occupations: Mapping[str, int], cutoff: int = CUTOFF) -> FockState:
        """Single basis ket, e.g. ``FockState.basis({"A": 1, "B": 1})``."""
        modes = tuple(occupations)
        return cls(modes, {tuple(occupations[m] for m in modes): 1.0}, cutoff)

    @classmethod
    def vacuum(cls, modes: Sequence[str], cutoff: int = CUTOFF) -> FockState:
        modes = tuple(modes)
        return cls(modes, {(0,) * len(modes): 1.0}, cutoff)

    # accessors

    @property
    def modes(self) -> tuple[str, ...]:
        return self._modes

    @property
    def cutoff(self) -> int:
        return self._cutoff

    @property
    def amplitudes(self) -> dict[tuple[int, ...], complex]:
        return dict(self._amps)

    def items(self):
        return self._amps.items()

    def __len__(self):
        return len(self._amps)

    def amplitude(self, occupations: Mapping[str, int]) -> complex:
        """Amplitude of the ket given as ``{mode: n}``; omitted modes are 0."""
        unknown = set(occupations) - set(self._modes)
        if unknown:
            raise StructuralError(f"unknown modes {sorted(unknown)}")
        key = tuple(occupations.get(m, 0) for m in self._modes)
        return self._amps.get(key, 0j)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._amps.values())

    def photon_number(self) -> int:
        """Largest total photon number among the kets present."""
        return max((sum(occ) for occ in self._amps), default=0)

    def max_occupation(self, mode: str) -> int:
        i = self.index(mode)
        return max((occ[i] for occ in self._amps), default=0)

    def index(self, mode: str) -> int:
        try:
            return self._modes.index(mode)
        except ValueError:
            raise StructuralError(f"mode {mode!r} not in {self._modes}") from None

    # derived states

    def normalized(self) -> FockState:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockState(self._modes, {k: a / n for k, a in self._amps.items()}, self._cutoff)

    def with_cutoff(self, cutoff: int) -> FockState:
        return FockState(self._modes, self._amps, cutoff)

    def reordered(self, modes: Sequence[str]) -> FockState:
        """Same state with occupation tuples laid out in ``modes`` order."""
        modes = tuple(modes)
        if set(modes) != set(self._modes) or len(modes) != len(self._modes):
            raise StructuralError(f"cannot reorder {self._modes} as {modes}")
        perm = [self._modes.index(m) for m in modes]
        amps = {tuple(occ[p] for p in perm): a for occ, a in self._amps.items()}
        return FockState(modes, amps, self._cutoff)

    def __add__(self, other: FockState) -> FockState:
        if not isinstance(other, FockState):
            return NotImplemented
        other = _aligned(self, other)
        amps = dict(self._amps)
        for occ, a in other._amps.items():
            amps[occ] = amps.get(occ, 0j) + a
        return FockState(self._modes, amps, max(self._cutoff, other._cutoff))

    def __sub__(self, other: FockState) -> FockState:
        return self + (-1.0) * other

    def __mul__(self, scalar) -> FockState:
        return FockState(self._modes, {k: scalar * a for k, a in self._amps.items()}, self._cutoff)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> FockState:
        return self * (1.0 / scalar)

    def __neg__(self) -> FockState:
        return -1.0 * self

    def __repr__(self):
        terms = " + ".join(
            f"({a.real:+.4g}{a.imag:+.4g}j)|{','.join(map(str, occ))}>"
            for occ, a in sorted(self._amps.items())
        )
        return f"FockState(modes={self._modes}, {terms or '0'})"


def _aligned(ref: FockState, other: FockState) -> FockState:
    if set(ref.modes) != set(other.modes) or len(ref.modes) != len(other.modes):
        raise StructuralError(f"mode sets differ: {ref.modes} vs {other.modes}")
    return other if other.modes == ref.modes else other.reordered(ref.modes)


def tensor(left: FockState, right: FockState) -> FockState:
    """Product state on the union of two disjoint mode sets."""
    shared = set(left.modes) & set(right.modes)
    if shared:
        raise StructuralError(f"tensor factors share modes {sorted(shared)}")
    amps = {}
    for lo, la in left.items():
        for ro, ra in right.items():
            amps[lo + ro] = la * ra
    return FockState(left.modes + right.modes, amps, max(left.cutoff, right.cutoff))


def inner_product(bra: FockState, ket: FockState) -> complex:
    """``<bra|ket>``, conjugate-linear in ``bra``."""
    ket = _aligned(bra, ket)
    total = 0j
    for occ, a in bra.items():
        b = ket._amps.get(occ)
        if b is not None:
            total += a.conjugate() * b
    return total


def _split(state: FockState, modes: Sequence[str]):
    if not modes:
        raise StructuralError("no modes given to measure")
    modes = tuple(modes)
    if len(set(modes)) != len(modes):
        raise StructuralError(f"duplicate modes in {modes}")
    idx = [state.index(m) for m in modes]
    rest = [i for i in range(len(state.modes)) if i not in idx]
    return modes, idx, rest


def born_distribution(state: FockState, modes: Sequence[str]) -> dict[tuple[int, ...], float]:
    """Outcome probabilities for a photon-number measurement of ``modes``.

    Outcomes are occupation tuples in the order of ``modes``; unmeasured
    modes are summed over. The state is normalized first, so the weights
    sum to one.
    """
    modes, idx, _ = _split(state, modes)
    total = state.norm_sq()
    if total == 0.0:
        raise ValueError("zero vector has no outcome distribution")
    acc: dict[tuple[int, ...], list[float]] = {}
    for occ, a in state.items():
        acc.setdefault(tuple(occ[i] for i in idx), []).append(abs(a) ** 2)
    return {k: math.fsum(v) / total for k, v in sorted(acc.items())}


def project(state: FockState, modes: Sequence[str], outcome: Sequence[int]) -> FockState:
    """Unnormalized branch of ``state`` where ``modes`` hold ``outcome``.

    The measured modes are removed; the squared norm of the result is the
    (unnormalized) Born weight. Projections on disjoint mode sets commute
    exactly, amplitude for amplitude.
    """
    modes, idx, rest = _split(state, modes)
    outcome = tuple(int(n) for n in outcome)
    if len(outcome) != len(modes):
        raise StructuralError(f"outcome {outcome} does not match modes {modes}")
    amps = {}
    for occ, a in state.items():
        if tuple(occ[i] for i in idx) == outcome:
            amps[tuple(occ[i] for i in rest)] = a
    return FockState(tuple(state.modes[i] for i in rest), amps, state.cutoff)


def measure_modes(state: FockState, modes: Sequence[str], rng: np.random.Generator):
    """Sample a photon-number outcome on ``modes`` and collapse the state.

    Returns
    -------
    outcome : tuple of int
        Occupations of ``modes`` in the given order.
    collapsed : FockState
        Normalized post-measurement state of the remaining modes.
    probability : float
        Born weight of ``outcome``.
    """
    dist = born_distribution(state, modes)
    outcomes = list(dist)
    probs = np.fromiter(dist.values(), dtype=float, count=len(outcomes))
    k = int(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum(), side="right"))
    k = min(k, len(outcomes) - 1)
    outcome = outcomes[k]
    branch = project(state, modes, outcome)
    return outcome, branch.normalized(), float(probs[k])


def basis_patterns(modes: Iterable[str], cutoff: int = CUTOFF, max_photons: int | None = None):
    """All occupation tuples over ``modes`` within the cutoff (and photon cap)."""
    modes = tuple(modes)
    for occ in np.ndindex(*([cutoff + 1] * len(modes))):
        if max_photons is None or sum(occ) <= max_photons:
            yield tuple(int(n) for n in occ)
