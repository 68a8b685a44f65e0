"""Property suites run by ``pyblanket verify``."""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blanket import separable_reconstruction
from .channels import channel_of_choi, choi_of_channel, random_channel
from .experiments import analytic_examples_check, appendix_b_check
from .linalg import trace_norm
from .measurement import random_measurement
from .optimizer import OptimizerConfig
from .state import (
    LN2,
    MultipartiteState,
    Region,
    chain_rule_check,
    conditional_mutual_information,
    partial_trace,
    product_state,
    random_state,
    relative_entropy,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}/{self.name}" + (f": {self.detail}" if self.detail else "")


def _rng(seed: int, suite: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(suite,)))


def _count(suite: str, name: str, failures: int, trials: int, worst: float) -> CheckResult:
    return CheckResult(
        suite, name, failures == 0,
        f"{trials - failures}/{trials} within tolerance, worst {worst:.3e}",
    )


def suite_ssa(seed: int, trials: int = 200) -> list[CheckResult]:
    rng = _rng(seed, 1)
    x, y, z = Region.of(0), Region.of(1), Region.of(2, 3)
    worst, failures = math.inf, 0
    for _ in range(trials):
        s = random_state((2, 2, 2, 2), rng)
        value = conditional_mutual_information(s, x, y, z)
        worst = min(worst, value)
        failures += value < -1e-9
    return [_count("ssa", "cmi_nonnegative", failures, trials, worst)]


def suite_chain(seed: int, trials: int = 100) -> list[CheckResult]:
    rng = _rng(seed, 2)
    parts = [Region.of(1), Region.of(2), Region.of(3)]
    worst, failures = 0.0, 0
    for _ in range(trials):
        residual = chain_rule_check(random_state((2, 2, 2, 2), rng), Region.of(0), parts)
        worst = max(worst, residual)
        failures += residual > 1e-9
    return [_count("chain", "residual", failures, trials, worst)]


def suite_pinsker(seed: int, trials: int = 200) -> list[CheckResult]:
    rng = _rng(seed, 3)
    a, r, q = Region.of(0), Region.of(1), Region.of(2)
    worst, failures = -math.inf, 0
    for _ in range(trials):
        s = random_state((2, 2, 2), rng)
        sep = separable_reconstruction(s, a, r, random_measurement(q, (2,), rng))
        gap = sep.distance - sep.bound
        worst = max(worst, gap)
        failures += gap > 1e-9
    results = [_count("pinsker", "separable_reconstruction", failures, trials, worst)]

    worst, failures = -math.inf, 0
    for _ in range(trials):
        s = random_state((2, 2), rng)
        marginals = product_state(partial_trace(s, a), partial_trace(s, r))
        d = relative_entropy(s, marginals)
        gap = trace_norm(s.rho - marginals.rho) ** 2 / (2 * LN2) - d
        worst = max(worst, gap)
        failures += gap > 1e-9
    results.append(_count("pinsker", "relative_entropy", failures, trials, worst))
    return results


def suite_choi(seed: int, trials: int = 100) -> list[CheckResult]:
    rng = _rng(seed, 4)
    worst_trip, worst_marg, fail_trip, fail_marg = 0.0, 0.0, 0, 0
    for _ in range(trials):
        channel = random_channel(2, (2, 2), 2, rng)
        choi = choi_of_channel(channel)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        tau = MultipartiteState(g @ g.conj().T / np.trace(g @ g.conj().T).real, (2,))
        err = float(np.max(np.abs(channel_of_choi(choi, tau).rho - channel.apply(tau).rho)))
        worst_trip = max(worst_trip, err)
        fail_trip += err > 1e-12
        marg = partial_trace(choi.state, Region.of(0)).rho
        err = float(np.max(np.abs(marg - np.eye(2) / 2)))
        worst_marg = max(worst_marg, err)
        fail_marg += err > 1e-9
    return [
        _count("choi", "round_trip", fail_trip, trials, worst_trip),
        _count("choi", "marginal_maximally_mixed", fail_marg, trials, worst_marg),
    ]


def suite_appendixb(seed: int) -> list[CheckResult]:
    report = appendix_b_check()
    lo, hi = report.window_detected
    return [
        CheckResult("appendixb", "positivity_window", report.window_ok,
                    f"window [{lo:.4f}, {hi:.4f}]"),
        CheckResult("appendixb", "marginals", report.marginals_match),
        CheckResult("appendixb", "witness", report.witness_ok),
    ]


def suite_examples(seed: int) -> list[CheckResult]:
    report = analytic_examples_check(OptimizerConfig(seed=seed))
    return [
        CheckResult(
            "examples", ex.name, ex.passed,
            f"Q={list(ex.blanket)} max distance {ex.max_distance:.3e}"
            + ("" if math.isnan(ex.oracle_distance)
               else f", exact form {ex.oracle_distance:.3e}"),
        )
        for ex in report.examples
    ]


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "ssa": suite_ssa,
    "chain": suite_chain,
    "pinsker": suite_pinsker,
    "choi": suite_choi,
    "appendixb": suite_appendixb,
    "examples": suite_examples,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        results.extend(SUITES[suite](seed))
    for res in results:
        (log.info if res.passed else log.error)("%s", res.line())
    return results
