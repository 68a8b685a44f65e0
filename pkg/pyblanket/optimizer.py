"""Derivative-free maximization over rank-1 projective measurements.

A measurement on a ``d``-dimensional region is the column basis of
``exp(i H(theta))`` with ``theta`` in R^(d*d). Each restart runs Nelder-Mead
from its own starting point; restart 0 starts at the computational basis.
"""

import logging
import math
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .error import BlanketErrno, BlanketError
from .linalg import unitary_from_parameters
from .measurement import ProjectiveMeasurement
from .state import Region

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    max_iters: int = 2000
    tolerance: float = 1e-8
    seed: int = 0
    # allowed shortfall of heuristic maxima in post-run checks, in bits
    slack: float = 1e-3

    def __post_init__(self):
        if self.restarts < 1:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"restarts must be >= 1, got {self.restarts}",
            )
        if self.max_iters < 1:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"max_iters must be >= 1, got {self.max_iters}",
            )
        if not self.tolerance > 0:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"tolerance must be positive, got {self.tolerance}",
            )
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"seed must be an unsigned 64-bit integer, got {self.seed}",
            )
        if self.slack < 0:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"slack must be non-negative, got {self.slack}",
            )


class UnitaryOptimum(NamedTuple):
    unitary: np.ndarray
    value: float


class MeasurementOptimum(NamedTuple):
    measurement: ProjectiveMeasurement
    value: float


def restart_rngs(
    cfg: OptimizerConfig, key: Sequence[int] = (),
) -> list[np.random.Generator]:
    """One generator per restart, derived from ``cfg.seed`` and ``key``.

    Restart ``k`` gets the same stream whatever the total number of restarts.
    """
    root = np.random.SeedSequence(cfg.seed, spawn_key=tuple(key))
    return [np.random.default_rng(child) for child in root.spawn(cfg.restarts)]


def _run_restart(
    objective: Callable[[np.ndarray], float],
    dim: int,
    cfg: OptimizerConfig,
    restart: int,
    rng: np.random.Generator,
) -> tuple[float, np.ndarray]:
    n_params = dim * dim
    if restart == 0:
        theta0 = np.zeros(n_params)
    else:
        theta0 = rng.normal(scale=math.pi, size=n_params)

    def negated(theta):
        return -objective(unitary_from_parameters(theta, dim))

    result = minimize(
        negated,
        theta0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iters,
            "xatol": cfg.tolerance,
            "fatol": cfg.tolerance,
            "adaptive": n_params > 8,
        },
    )
    if not result.success:
        log.debug("restart %d stopped early: %s", restart, result.message)
    return float(-result.fun), np.asarray(result.x)


def optimize_unitary(
    objective: Callable[[np.ndarray], float],
    dim: int,
    cfg: OptimizerConfig,
    key: Sequence[int] = (),
    workers: int = 1,
) -> UnitaryOptimum:
    """Maximize ``objective(U)`` over unitaries ``U`` of size ``dim``.

    The returned value was evaluated at the returned unitary, so it is a
    lower bound on the true maximum. Ties go to the lowest restart.
    """
    if dim == 1:
        u = np.ones((1, 1), dtype=complex)
        return UnitaryOptimum(u, float(objective(u)))

    rngs = restart_rngs(cfg, key)
    jobs = [(objective, dim, cfg, k, rng) for k, rng in enumerate(rngs)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPool(min(workers, len(jobs))) as pool:
            results = pool.starmap(_run_restart, jobs)
    else:
        results = [_run_restart(*job) for job in jobs]

    best_value, best_theta = results[0]
    for value, theta in results[1:]:
        if value > best_value:
            best_value, best_theta = value, theta
    return UnitaryOptimum(unitary_from_parameters(best_theta, dim), best_value)


def optimize_measurement(
    objective: Callable[[ProjectiveMeasurement], float],
    region: Region,
    dims: Sequence[int],
    cfg: OptimizerConfig,
    key: Sequence[int] = (),
    workers: int = 1,
) -> MeasurementOptimum:
    """Best projective measurement on ``region`` found for ``objective``."""
    dims = tuple(dims)

    def on_unitary(u: np.ndarray) -> float:
        return objective(ProjectiveMeasurement(region, dims, u))

    best = optimize_unitary(on_unitary, math.prod(dims), cfg, key, workers)
    return MeasurementOptimum(
        ProjectiveMeasurement(region, dims, best.unitary), best.value,
    )
