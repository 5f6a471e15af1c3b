"""
Fringe bookkeeping: per-phase count tables, sinusoid fits and the
Psi+/Psi- discrimination histogram.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .experiment import ExperimentConfig, RecordTable, joint_distribution
from .measure import OUTCOMES, BellOutcome

LABELS = tuple(o.value for o in OUTCOMES)
AB_PATTERNS = {(False, False): "none", (True, False): "D1*", (False, True): "D2*", (True, True): "D1*D2*"}
SUBSET_SERIES = ("PsiMinus&D1*", "PsiMinus&D2*", "PsiPlus&D1*", "PsiPlus&D2*")


class FitError(ValueError):
    """The phase design cannot determine a sinusoid."""


@dataclass(frozen=True)
class VisibilityFit:
    """Least-squares fit of ``a + b cos(phi + delta)``."""

    offset: float
    amplitude: float
    phase_offset: float
    visibility: float
    visibility_err: float
    phase_offset_err: float

    def to_dict(self):
        return asdict(self)


def _wrap(angle: float) -> float:
    """Map to (-pi, pi]."""
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


def fit_visibility(phases: Sequence[float], values: Sequence[float], errors: Sequence[float] | None = None) -> VisibilityFit:
    """Fit a sinusoid to fringe data and report its visibility ``b / a``.

    Parameters
    ----------
    phases, values : sequences of float
        Fringe samples. Needs at least 4 distinct phases spanning pi or more.
    errors : sequence of float, optional
        One-sigma errors of ``values``. When given, the fit is weighted and
        the parameter errors follow from them directly; otherwise they are
        scaled by the residual variance.

    Returns
    -------
    VisibilityFit
        ``phase_offset`` lies in (-pi, pi].
    """
    x = np.asarray(phases, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("phases and values must be 1-d and of equal length")
    distinct = np.unique(np.round(np.mod(x, 2.0 * np.pi), 12))
    if len(distinct) < 4 or np.ptp(x) < np.pi - 1e-12:
        raise FitError("need at least 4 distinct phases spanning pi")
    design = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    if errors is not None:
        sigma = np.asarray(errors, dtype=float)
        if sigma.shape != y.shape or np.any(sigma <= 0):
            raise FitError("errors must be positive and match values")
        w = 1.0 / sigma
        coef, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
        cov = np.linalg.inv((design * w[:, None] ** 2).T @ design)
    else:
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        dof = len(x) - 3
        resid = y - design @ coef
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        cov = s2 * np.linalg.inv(design.T @ design)
    a, c, s = coef
    b = math.hypot(c, s)
    if a == 0.0:
        raise FitError("fringe offset is zero; visibility undefined")
    delta = _wrap(math.atan2(-s, c))
    if b > 0:
        gv = np.array([-b / a**2, c / (a * b), s / (a * b)])
        gd = np.array([0.0, s / b**2, -c / b**2])
    else:
        gv = np.array([0.0, 0.0, 0.0])
        gd = np.array([0.0, 0.0, 0.0])
    return VisibilityFit(
        float(a),
        float(b),
        float(delta),
        float(b / a),
        float(math.sqrt(max(gv @ cov @ gv, 0.0))),
        float(math.sqrt(max(gd @ cov @ gd, 0.0))),
    )


@dataclass
class FringeSummary:
    """Per-phase tallies of a run and the fits derived from them.

    ``counts`` maps series names to one value per scheduled phase. Names are
    ``"D1*"`` and ``"D2*"`` (unconditioned, inclusive), Eve labels such as
    ``"PsiMinus"`` (subset size) and ``"<label>&<pattern>"`` with pattern one
    of ``none, D1*, D2*, D1*D2*`` (exclusive Alice/Bob click patterns).
    In ``analytic`` mode the values are probabilities per trial and
    ``trials`` is all ones.
    """

    mode: str
    phases: list[float]
    trials: list[float]
    counts: dict[str, list[float]]
    fits: dict[str, VisibilityFit] = field(default_factory=dict)
    visibility: float = float("nan")
    visibility_err: float = float("nan")
    histogram: dict | None = None

    @property
    def analytic(self) -> bool:
        return self.mode == "analytic"

    def rate(self, key: str) -> np.ndarray:
        return np.asarray(self.counts[key]) / np.asarray(self.trials)

    def rate_err(self, key: str) -> np.ndarray:
        if self.analytic:
            return np.zeros(len(self.phases))
        return np.sqrt(np.asarray(self.counts[key])) / np.asarray(self.trials)

    def coincidences(self, label: str) -> np.ndarray:
        return np.asarray(self.counts[f"{label}&D1*"]) + np.asarray(self.counts[f"{label}&D2*"])

    def subset_rate(self, label: str, detector: str = "D1*"):
        """Fraction of a subset's single-detector coincidences landing on ``detector``.

        Returns ``(rate, poisson_err)``; empty subsets give zeros.
        """
        num = np.asarray(self.counts[f"{label}&{detector}"], dtype=float)
        den = self.coincidences(label).astype(float)
        safe = np.where(den > 0, den, 1.0)
        rate = np.where(den > 0, num / safe, 0.0)
        err = np.zeros_like(rate) if self.analytic else np.where(den > 0, np.sqrt(num) / safe, 0.0)
        return rate, err

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "phases": list(self.phases),
            "trials": list(self.trials),
            "counts": {k: list(v) for k, v in self.counts.items()},
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "visibility": self.visibility,
            "visibility_err": self.visibility_err,
            "histogram": self.histogram,
        }

    @classmethod
    def from_dict(cls, data: dict) -> FringeSummary:
        return cls(
            mode=data["mode"],
            phases=[float(p) for p in data["phases"]],
            trials=[float(t) for t in data["trials"]],
            counts={k: [float(x) for x in v] for k, v in data["counts"].items()},
            fits={k: VisibilityFit(**v) for k, v in data.get("fits", {}).items()},
            visibility=float(data.get("visibility", float("nan"))),
            visibility_err=float(data.get("visibility_err", float("nan"))),
            histogram=data.get("histogram"),
        )


def _empty_counts(n: int) -> dict[str, list[float]]:
    keys = ["D1*", "D2*"]
    for label in LABELS:
        keys.append(label)
        keys += [f"{label}&{p}" for p in AB_PATTERNS.values()]
    return {k: [0.0] * n for k in keys}


def _finish(summary: FringeSummary) -> FringeSummary:
    x = np.asarray(summary.phases)
    if len(np.unique(np.round(np.mod(x, 2 * np.pi), 12))) >= 4 and np.ptp(x) >= np.pi - 1e-12:
        for key in ("D1*", "D2*") + SUBSET_SERIES:
            y = summary.rate(key)
            if not np.any(y > 0):
                continue
            if summary.analytic:
                errors = None
            else:
                floor = 1.0 / np.asarray(summary.trials)
                errors = np.maximum(summary.rate_err(key), floor)
            summary.fits[key] = fit_visibility(x, y, errors)
        subset = [summary.fits[k] for k in SUBSET_SERIES if k in summary.fits]
        if subset:
            v = np.array([f.visibility for f in subset])
            e = np.array([f.visibility_err for f in subset])
            if np.all(e > 0):
                w = 1.0 / e**2
                summary.visibility = float(np.sum(w * v) / np.sum(w))
                summary.visibility_err = float(1.0 / math.sqrt(np.sum(w)))
            else:
                summary.visibility = float(v.mean())
                summary.visibility_err = 0.0
    summary.histogram = discrimination_table(summary)
    return summary


def summarize(records: RecordTable) -> FringeSummary:
    """Tally Monte Carlo records by phase, Victor subset and click pattern.

    Phases are grouped by value in order of first appearance.
    """
    phases, index = np.unique(records.phase, return_inverse=True)
    _, first = np.unique(records.phase, return_index=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    group = rank[index]
    phases = phases[order]
    n = len(phases)
    eve = records.sorted_eve().astype(np.int64)
    pattern = records.d1s.astype(np.int64) + 2 * records.d2s.astype(np.int64)
    tally = np.bincount(group * 16 + eve * 4 + pattern, minlength=16 * n).reshape(n, 4, 4)
    counts = _empty_counts(n)
    names = list(AB_PATTERNS.values())  # index = d1s + 2 * d2s
    for i in range(n):
        for e, label in enumerate(LABELS):
            counts[label][i] = float(tally[i, e].sum())
            for p, name in enumerate(names):
                counts[f"{label}&{name}"][i] = float(tally[i, e, p])
        counts["D1*"][i] = float(tally[i, :, 1].sum() + tally[i, :, 3].sum())
        counts["D2*"][i] = float(tally[i, :, 2].sum() + tally[i, :, 3].sum())
    trials = np.bincount(group, minlength=n).astype(float)
    return _finish(FringeSummary("montecarlo", [float(p) for p in phases], list(trials), counts))


def analytic_summary(config: ExperimentConfig) -> FringeSummary:
    """Exact per-trial probabilities at each scheduled phase."""
    n = len(config.phases)
    counts = _empty_counts(n)
    for i, phi in enumerate(config.phases):
        for (clicks, label), p in joint_distribution(config, phi).items():
            name = AB_PATTERNS[clicks]
            counts[label.value][i] += p
            counts[f"{label.value}&{name}"][i] += p
            if clicks[0]:
                counts["D1*"][i] += p
            if clicks[1]:
                counts["D2*"][i] += p
    return _finish(FringeSummary("analytic", list(config.phases), [1.0] * n, counts))


def zero_phase_indices(phases: Sequence[float], tol: float = 1e-9) -> list[int]:
    return [i for i, p in enumerate(phases) if abs(_wrap(p)) <= tol]


def discrimination_table(summary: FringeSummary) -> dict | None:
    """Eve outcome (rows) versus Alice/Bob detector (columns) at phi = 0.

    Cells count single-detector coincidences; ``fractions`` are row
    normalized. ``None`` when the schedule has no phase equal to 0 mod 2 pi.
    """
    idx = zero_phase_indices(summary.phases)
    if not idx:
        return None
    rows = [BellOutcome.PSI_MINUS.value, BellOutcome.PSI_PLUS.value]
    cols = ["D1*", "D2*"]
    cells = [[float(sum(summary.counts[f"{r}&{c}"][i] for i in idx)) for c in cols] for r in rows]
    fractions = []
    for row in cells:
        total = sum(row)
        fractions.append([x / total if total > 0 else 0.0 for x in row])
    return {"rows": rows, "columns": cols, "counts": cells, "fractions": fractions, "phase_indices": idx}
