"""Greedy search for quantum Markov blankets.

Step ``i`` picks the region ``S_i`` (of a fixed size, disjoint from A and from
earlier steps) and the projective measurement on it that together maximize
``I(A:S_i|S_1..S_(i-1))`` on the state with all earlier measurements
applied. Earlier measurements are frozen. The step with the smallest value
is the bottleneck; the regions chosen before it form the blanket Q.
"""

import dataclasses
import itertools
import logging
import math
import time
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import NamedTuple, Sequence

import numpy as np

from .channels import (
    ChoiState,
    Ensemble,
    MeasureAndPrepareChannel,
    ensemble_to_mp_channel,
    haar_pure_inputs,
    mp_output_distance,
    reduced_channel_choi,
    theorem_rhs,
)
from .error import BlanketErrno, BlanketError, InvariantViolation
from .linalg import hermitian_part, trace_norm
from .measurement import ProjectiveMeasurement, compose_measurements
from .optimizer import (
    MeasurementOptimum,
    OptimizerConfig,
    optimize_unitary,
)
from .state import (
    LN2,
    OUTCOME_CUTOFF,
    MultipartiteState,
    Region,
    check_region,
    classical_cmi_from_blocks,
    conditioned_blocks,
    disjoint_union,
    measured_cmi_from_blocks,
    partial_trace,
    reduce_ordered,
    von_neumann_entropy,
)

log = logging.getLogger(__name__)

TIE_ATOL = 1e-9
BOUND_ATOL = 1e-6
NEGATIVE_ATOL = 1e-9
POVM_MATCH_ATOL = 1e-8


@dataclass(frozen=True, eq=False)
class StepRecord:
    region: Region
    measurement: ProjectiveMeasurement
    cmi_bits: float
    runtime_s: float = 0.0


@dataclass(frozen=True, eq=False)
class BlanketReport:
    a: Region
    dims: tuple[int, ...]
    r_size: int
    q: int
    steps: tuple[StepRecord, ...]
    bottleneck_index: int
    blanket: Region
    measurement: ProjectiveMeasurement | None
    alpha_q_bits: float
    bound_bits: float
    entropy_a_bits: float
    seed: int = 0

    @property
    def m(self) -> int:
        return len(self.steps)

    @property
    def cmi_values(self) -> list[float]:
        return [step.cmi_bits for step in self.steps]

    @property
    def runtime_s(self) -> float:
        return sum(step.runtime_s for step in self.steps)

    def check_invariants(self, slack: float = 1e-3) -> None:
        """Raise :class:`InvariantViolation` if a proven bound fails."""
        values = self.cmi_values
        if len(self.blanket) > self.q:
            raise InvariantViolation(
                f"blanket {self.blanket} larger than q={self.q}",
            )
        if len(self.blanket) < self.r_size * (self.bottleneck_index - 1):
            raise InvariantViolation(
                f"blanket {self.blanket} smaller than the steps before "
                f"the bottleneck",
            )
        low = min(values)
        if low < -NEGATIVE_ATOL:
            raise InvariantViolation(f"negative step value {low:.3e} bits")
        total = sum(values)
        if total > self.entropy_a_bits + BOUND_ATOL:
            raise InvariantViolation(
                f"step values sum to {total:.9f} bits, above "
                f"S(A) = {self.entropy_a_bits:.9f}",
            )
        if low > self.entropy_a_bits / self.m + BOUND_ATOL:
            raise InvariantViolation(
                f"smallest step value {low:.9f} exceeds S(A)/m = "
                f"{self.entropy_a_bits / self.m:.9f}",
            )
        if self.alpha_q_bits > self.bound_bits + slack:
            raise InvariantViolation(
                f"alpha_Q = {self.alpha_q_bits:.9f} exceeds the bound "
                f"{self.bound_bits:.9f} by more than {slack}",
            )

    def to_dict(self) -> dict:
        return {
            "parameters": {
                "a": list(self.a),
                "dims": list(self.dims),
                "r_size": self.r_size,
                "q": self.q,
                "m": self.m,
                "seed": self.seed,
            },
            "steps": [
                {
                    "region": list(step.region),
                    "cmi_bits": step.cmi_bits,
                    "measurement_unitary": unitary_to_pairs(
                        step.measurement.unitary,
                    ),
                }
                for step in self.steps
            ],
            "bottleneck_index": self.bottleneck_index,
            "Q": list(self.blanket),
            "Q_measured": list(self.measurement.region) if self.measurement else [],
            "alpha_q_bits": self.alpha_q_bits,
            "bound_bits": self.bound_bits,
            "entropy_a_bits": self.entropy_a_bits,
        }


def unitary_to_pairs(u: np.ndarray) -> list[list[float]]:
    """Row-major ``[re, im]`` pairs."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(u).ravel()]


def greedy_steps_needed(r_size: int, q: int) -> int:
    return 1 + q // r_size


def _validate_sizes(
    s: MultipartiteState, a: Region, r_size: int, m: int,
) -> list[int]:
    check_region(s, a)
    if r_size < 1:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT, f"region size must be >= 1, got {r_size}",
        )
    candidates = list(a.complement(s.n_subsystems))
    if m * r_size > len(candidates):
        raise BlanketError(
            BlanketErrno.INSUFFICIENT_SUBSYSTEMS,
            f"{m} steps of size {r_size} need {m * r_size} subsystems besides A, "
            f"only {len(candidates)} available",
        )
    return candidates


def _step_key(conditioning: Sequence[Region], region: Region) -> tuple[int, ...]:
    # depth, then the candidate's indices; alpha_Q reuses the same streams
    return (len(conditioning), *region.indices)


def _best_region(
    s: MultipartiteState,
    a: Region,
    regions: Sequence[Region],
    conditioning: Sequence[ProjectiveMeasurement],
    cfg: OptimizerConfig,
    workers: int,
) -> tuple[Region, MeasurementOptimum]:
    """Maximize the measured CMI over ``regions`` and measurements on them."""
    d_a = s.region_dim(a)
    cond_regions = [m.region for m in conditioning]

    def evaluate(region: Region) -> MeasurementOptimum:
        blocks = conditioned_blocks(
            s.rho, s.dims, a.indices + region.indices, conditioning,
        )
        d_r = s.region_dim(region)

        def objective(u: np.ndarray) -> float:
            return measured_cmi_from_blocks(blocks, d_a, d_r, u)

        best = optimize_unitary(objective, d_r, cfg, _step_key(cond_regions, region))
        dims = tuple(s.dims[i] for i in region)
        return MeasurementOptimum(
            ProjectiveMeasurement(region, dims, best.unitary), best.value,
        )

    if workers > 1 and len(regions) > 1:
        with ThreadPool(min(workers, len(regions))) as pool:
            results = pool.map(evaluate, regions)
    else:
        results = [evaluate(region) for region in regions]

    top = max(res.value for res in results)
    # regions arrive in lexicographic order
    for region, res in zip(regions, results):
        if res.value >= top - TIE_ATOL:
            return region, res
    raise AssertionError("unreachable")


def greedy_path(
    s: MultipartiteState,
    a: Region,
    r_size: int,
    m: int,
    cfg: OptimizerConfig,
    workers: int = 1,
) -> list[StepRecord]:
    """The first ``m`` greedy steps; a prefix of a longer path is a shorter path."""
    candidates = _validate_sizes(s, a, r_size, m)
    steps: list[StepRecord] = []
    used: set[int] = set()
    for i in range(m):
        started = time.monotonic()
        free = [c for c in candidates if c not in used]
        regions = [Region(combo) for combo in itertools.combinations(free, r_size)]
        conditioning = [step.measurement for step in steps]
        region, best = _best_region(s, a, regions, conditioning, cfg, workers)
        steps.append(
            StepRecord(region, best.measurement, best.value, time.monotonic() - started),
        )
        used.update(region)
        log.info("step %d: S=%s I=%.6f bits", i + 1, region, best.value)
    return steps


def report_from_steps(
    s: MultipartiteState,
    a: Region,
    r_size: int,
    q: int,
    steps: Sequence[StepRecord],
    cfg: OptimizerConfig,
    entropy_a: float | None = None,
) -> BlanketReport:
    """Bottleneck, blanket and bounds for the first ``1 + q // r_size`` steps."""
    m = greedy_steps_needed(r_size, q)
    if len(steps) < m:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT,
            f"q={q} needs {m} greedy steps, {len(steps)} given",
        )
    steps = tuple(steps[:m])
    if entropy_a is None:
        entropy_a = von_neumann_entropy(partial_trace(s, a))
    values = [step.cmi_bits for step in steps]
    # first minimum, ties within TIE_ATOL
    low = min(values)
    b = next(i for i, v in enumerate(values) if v <= low + TIE_ATOL)
    before = steps[:b]
    blanket = Region().union(*(step.region for step in before))
    measurement = (
        compose_measurements([step.measurement for step in before])
        if before else None
    )
    return BlanketReport(
        a=a,
        dims=s.dims,
        r_size=r_size,
        q=q,
        steps=steps,
        bottleneck_index=b + 1,
        blanket=blanket,
        measurement=measurement,
        alpha_q_bits=values[b],
        bound_bits=entropy_a / m,
        entropy_a_bits=entropy_a,
        seed=cfg.seed,
    )


def greedy_blanket(
    s: MultipartiteState,
    a: Region,
    r_size: int,
    q: int,
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> BlanketReport:
    """Greedy blanket of size at most ``q`` shielding ``a`` from regions of ``r_size``.

    ``alpha_q_bits`` is the bottleneck step value: that step already
    maximizes over every eligible region and measurement outside Q.
    """
    cfg = cfg or OptimizerConfig()
    if q < r_size:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT,
            f"q={q} must be at least the region size {r_size}",
        )
    m = greedy_steps_needed(r_size, q)
    steps = greedy_path(s, a, r_size, m, cfg, workers)
    report = report_from_steps(s, a, r_size, q, steps, cfg)
    log.info(
        "bottleneck at step %d, Q=%s, alpha_Q=%.6f bits (bound %.6f)",
        report.bottleneck_index, report.blanket, report.alpha_q_bits,
        report.bound_bits,
    )
    return report


def pad_blanket(
    report: BlanketReport, n_subsystems: int | None = None,
) -> BlanketReport:
    """Grow Q to ``q`` subsystems with the lowest unused ones.

    The extra subsystems are only excluded from the regions R; M_Q still
    acts on the greedy blanket alone, so ``alpha_Q`` can only shrink.
    """
    n = len(report.dims) if n_subsystems is None else n_subsystems
    missing = report.q - len(report.blanket)
    taken = report.blanket.union(report.a)
    extra = [i for i in range(n) if i not in taken][:max(missing, 0)]
    if not extra:
        return report
    return dataclasses.replace(
        report, blanket=report.blanket.union(Region(tuple(extra))),
    )


def _measured_region(q: Region, m_q: ProjectiveMeasurement | None) -> Region:
    """Region M_Q acts on; it must lie inside Q (a padded Q may be larger)."""
    if m_q is None:
        return Region()
    if not set(m_q.region) <= set(q):
        raise BlanketError(
            BlanketErrno.REGION_OVERLAP,
            f"M_Q acts on {m_q.region}, outside Q = {q}",
        )
    return m_q.region


def alpha_q(
    s: MultipartiteState,
    a: Region,
    q: Region,
    m_q: ProjectiveMeasurement | None,
    r_size: int,
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> float:
    """``max_{R, M_R} I(A:R|Q)`` on ``M_R M_Q(rho)`` over regions of ``r_size``."""
    cfg = cfg or OptimizerConfig()
    check_region(s, a)
    check_region(s, q, allow_empty=True)
    disjoint_union(a, q)
    measured = _measured_region(q, m_q)
    free = [i for i in range(s.n_subsystems) if i not in q and i not in a]
    regions = [Region(c) for c in itertools.combinations(free, r_size)]
    if not regions:
        raise BlanketError(
            BlanketErrno.INSUFFICIENT_SUBSYSTEMS,
            f"no region of size {r_size} outside A and Q",
        )
    conditioning = [m_q] if m_q is not None else []
    d_a = s.region_dim(a)

    def evaluate(region: Region) -> float:
        blocks = conditioned_blocks(
            s.rho, s.dims, a.indices + region.indices, conditioning,
        )
        d_r = s.region_dim(region)
        # same seed streams as the greedy step at this depth
        key = (len(measured) // r_size, *region.indices)
        return optimize_unitary(
            lambda u: measured_cmi_from_blocks(blocks, d_a, d_r, u),
            d_r, cfg, key,
        ).value

    if workers > 1 and len(regions) > 1:
        with ThreadPool(min(workers, len(regions))) as pool:
            values = pool.map(evaluate, regions)
    else:
        values = [evaluate(region) for region in regions]
    return max(values)


class SeparableReconstruction(NamedTuple):
    ensemble: Ensemble
    epsilon_bits: float
    bound: float
    distance: float


def separable_reconstruction(
    s: MultipartiteState,
    a: Region,
    r: Region,
    m_q: ProjectiveMeasurement | None,
) -> SeparableReconstruction:
    """Ensemble ``{p, rho_A, sigma_R}`` read off from measuring Q.

    ``epsilon_bits`` is ``I(A:R|Q)`` on ``M_Q(rho)``; the trace distance of
    ``rho_AR`` to the ensemble average never exceeds
    ``bound = sqrt(2 ln2 epsilon)``.
    """
    conditioning = [m_q] if m_q is not None else []
    q = m_q.region if m_q is not None else Region()
    check_region(s, disjoint_union(a, r, q))
    check_region(s, a)
    check_region(s, r)
    blocks = conditioned_blocks(s.rho, s.dims, a.indices + r.indices, conditioning)
    d_a, d_r = s.region_dim(a), s.region_dim(r)
    epsilon = classical_cmi_from_blocks(blocks, d_a, d_r)

    p = np.real(np.einsum("kii->k", blocks))
    keep = p >= OUTCOME_CUTOFF
    b5 = blocks[keep].reshape(-1, d_a, d_r, d_a, d_r)
    p = p[keep]
    rho_a = np.einsum("kaibi->kab", b5) / p[:, None, None]
    rho_r = np.einsum("kaiaj->kij", b5) / p[:, None, None]
    dims_a = tuple(s.dims[i] for i in a)
    dims_r = tuple(s.dims[i] for i in r)
    labels_a = tuple(s.labels[i] for i in a)
    labels_r = tuple(s.labels[i] for i in r)
    ensemble = Ensemble(
        p / p.sum(),
        tuple(
            MultipartiteState(hermitian_part(x), dims_a, labels_a, validate=False)
            for x in rho_a
        ),
        tuple(
            MultipartiteState(hermitian_part(x), dims_r, labels_r, validate=False)
            for x in rho_r
        ),
    )
    rho_ar = reduce_ordered(s.rho, s.dims, a.indices + r.indices)
    distance = trace_norm(rho_ar - ensemble.separable_operator())
    bound = math.sqrt(2 * LN2 * max(epsilon, 0.0))
    return SeparableReconstruction(ensemble, epsilon, bound, distance)


@dataclass(frozen=True)
class CertificateRow:
    region: Region
    distance: float
    alpha_bound: float
    lemma_bound: float
    epsilon_bits: float

    @property
    def passed(self) -> bool:
        return self.distance <= self.lemma_bound + 1e-9


@dataclass(frozen=True, eq=False)
class Certificate:
    blanket: Region
    r_size: int
    alpha_q_bits: float
    theorem_bound: float
    povm: tuple[np.ndarray, ...]
    rows: tuple[CertificateRow, ...]

    @property
    def max_distance(self) -> float:
        return max((row.distance for row in self.rows), default=0.0)

    def passed(self, slack: float = 1e-3) -> bool:
        return all(
            row.passed and row.distance <= row.alpha_bound + slack
            and row.distance <= self.theorem_bound + slack
            for row in self.rows
        )

    def to_dict(self) -> dict:
        return {
            "Q": list(self.blanket),
            "r_size": self.r_size,
            "alpha_q_bits": self.alpha_q_bits,
            "theorem_bound": self.theorem_bound,
            "max_distance": self.max_distance,
            "rows": [
                {
                    "R": list(row.region),
                    "distance": row.distance,
                    "alpha_bound": row.alpha_bound,
                    "lemma_bound": row.lemma_bound,
                    "epsilon_bits": row.epsilon_bits,
                }
                for row in self.rows
            ],
        }


def _same_povm(
    first: tuple[np.ndarray, ...], other: tuple[np.ndarray, ...],
) -> bool:
    return len(first) == len(other) and all(
        np.allclose(x, y, atol=POVM_MATCH_ATOL) for x, y in zip(first, other)
    )


def theorem1_certificate(
    choi: ChoiState,
    q: Region,
    m_q: ProjectiveMeasurement | None,
    r_size: int,
    cfg: OptimizerConfig | None = None,
    n_inputs: int = 500,
    workers: int = 1,
    q_size: int | None = None,
) -> Certificate:
    """Check every reduced channel outside Q against its measure-and-prepare
    approximation.

    All approximations share one POVM (read off from the A' marginals of the
    outcome ensemble of ``m_q``) and differ only in the prepared states.
    Distances are maxima over ``n_inputs`` Haar-random pure inputs.

    ``q_size`` is the blanket size the search was allowed (default ``|Q|``);
    the a-priori bound uses ``1 + q_size // r_size`` greedy steps, so it
    stays finite when the greedy blanket is empty.
    """
    cfg = cfg or OptimizerConfig()
    s = choi.state
    a = choi.reference
    d_a = choi.d_a
    _measured_region(q, m_q)
    alpha = max(alpha_q(s, a, q, m_q, r_size, cfg, workers), 0.0)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2 ** 31,)))
    inputs = haar_pure_inputs(d_a, n_inputs, rng)
    free = [i for i in choi.outputs if i not in q]
    q_size = len(q) if q_size is None else q_size
    theorem_bound = theorem_rhs(d_a, r_size, q_size, floor=True).max_output

    rows = []
    povm: tuple[np.ndarray, ...] = ()
    for combo in itertools.combinations(free, r_size):
        r = Region(combo)
        sep = separable_reconstruction(s, a, r, m_q)
        channel: MeasureAndPrepareChannel = ensemble_to_mp_channel(sep.ensemble)
        if not povm:
            povm = channel.povm
        elif not _same_povm(povm, channel.povm):
            raise InvariantViolation(
                f"R={r} yields a different POVM than the first region",
            )
        distance = mp_output_distance(reduced_channel_choi(choi, r), channel, inputs)
        rows.append(CertificateRow(
            region=r,
            distance=distance,
            alpha_bound=d_a * math.sqrt(2 * LN2 * alpha),
            lemma_bound=d_a * sep.bound,
            epsilon_bits=sep.epsilon_bits,
        ))
        log.debug("R=%s distance %.3e (lemma bound %.3e)", r, distance, d_a * sep.bound)
    return Certificate(q, r_size, alpha, theorem_bound, povm, tuple(rows))


__all__ = [
    "BlanketReport",
    "Certificate",
    "CertificateRow",
    "OptimizerConfig",
    "SeparableReconstruction",
    "StepRecord",
    "alpha_q",
    "greedy_blanket",
    "greedy_path",
    "pad_blanket",
    "report_from_steps",
    "separable_reconstruction",
    "theorem1_certificate",
]
