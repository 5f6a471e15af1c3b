"""Quick invariant suite behind ``swapsim check``."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .experiment import (
    ExperimentConfig,
    ab_marginal,
    joint_distribution,
    order_invariance_check,
    sample_records,
)
from .fock import inner_product, tensor
from .measure import PHI_UNDISCRIMINATED, BellOutcome, bell_states
from .source import prepare_source

SWAP_COEFFS = {("Phi+", "Phi+"): 0.5, ("Phi-", "Phi-"): -0.5, ("Psi+", "Psi+"): -0.5, ("Psi-", "Psi-"): 0.5}


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def bell_product_overlaps() -> dict[tuple[str, str], complex]:
    """Overlaps of the source with every (Alice/Bob Bell) x (Eve Bell) product."""
    source = prepare_source()
    ab, eve = bell_states("AB"), bell_states("Eve")
    return {(i, j): inner_product(tensor(ab[i], eve[j]), source) for i in ab for j in eve}


def check_bell_decomposition(tol: float = 1e-12) -> CheckResult:
    overlaps = bell_product_overlaps()
    worst = max(abs(c - SWAP_COEFFS.get(k, 0.0)) for k, c in overlaps.items())
    return CheckResult("bell decomposition", worst <= tol, f"max deviation {worst:.2e}")


def check_order_invariance(config: ExperimentConfig) -> CheckResult:
    report = order_invariance_check(config.replace(mode="analytic"))
    return CheckResult("order invariance (analytic)", report.passed, f"identical={report.identical}")


def _swap(dist):
    return {(c, label.swapped()): p for (c, label), p in dist.items()}


def check_phase_interchange(config: ExperimentConfig, tol: float = 1e-12) -> CheckResult:
    cfg = config.replace(mode="analytic", eo_toggle=False)
    worst = 0.0
    for phi in cfg.phases:
        p = _swap(joint_distribution(cfg, phi))
        q = joint_distribution(cfg, phi + math.pi)
        worst = max([worst] + [abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q)])
    return CheckResult("pi phase swaps Psi-/Psi+", worst <= tol, f"max deviation {worst:.2e}")


def check_no_signaling(config: ExperimentConfig, tol: float = 1e-12) -> CheckResult:
    cfg = config.replace(mode="analytic")
    marginals = [ab_marginal(joint_distribution(cfg, phi)) for phi in cfg.phases]
    ref = marginals[0]
    worst = max(abs(m.get(k, 0.0) - ref.get(k, 0.0)) for m in marginals for k in set(m) | set(ref))
    return CheckResult("no signaling to Alice/Bob", worst <= tol, f"max marginal spread {worst:.2e}")


def check_noise_free(config: ExperimentConfig, trials: int = 100_000) -> CheckResult:
    records = sample_records(config.replace(mode="montecarlo", trials=trials, dark_count=0.0))
    bad = int(np.sum((records.eve == PHI_UNDISCRIMINATED) & (records.d1s | records.d2s)))
    return CheckResult("two-photon Eve events leave Alice/Bob dark", bad == 0, f"{bad} violations in {trials} trials")


def check_eve_efficiency(config: ExperimentConfig, tol: float = 1e-12) -> CheckResult:
    cfg = config.replace(mode="analytic", efficiency=1.0, dark_count=0.0)
    worst = 0.0
    for phi in cfg.phases:
        single = sum(
            p for (_, label), p in joint_distribution(cfg, phi).items()
            if label in (BellOutcome.PSI_MINUS, BellOutcome.PSI_PLUS)
        )
        worst = max(worst, abs(single - 0.5))
    return CheckResult("Eve single-click fraction 1/2", worst <= tol, f"max deviation {worst:.2e}")


def run_checks(config: ExperimentConfig | None = None) -> list[CheckResult]:
    config = ExperimentConfig() if config is None else config
    return [
        check_bell_decomposition(),
        check_order_invariance(config),
        check_phase_interchange(config),
        check_no_signaling(config),
        check_noise_free(config),
        check_eve_efficiency(config),
    ]


__all__ = ["CheckResult", "SWAP_COEFFS", "bell_product_overlaps", "run_checks"]
