"""Concrete channels: the Ising-chain environment, a few analytic examples,
and a pair of compatible measure-and-prepare channels with distinct
measurements.
"""

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from functools import reduce
from multiprocessing.pool import ThreadPool
from typing import Sequence

import numpy as np

from .blanket import (
    greedy_blanket,
    greedy_path,
    greedy_steps_needed,
    report_from_steps,
    theorem1_certificate,
)
from .channels import (
    ChoiState,
    KrausChannel,
    MeasureAndPrepareChannel,
    channel_of_choi,
    choi_of_channel,
    haar_pure_inputs,
    mp_output_distance,
    reduced_channel_choi,
)
from .error import (
    BlanketErrno,
    BlanketError,
    DegenerateGroundStateWarning,
    InvariantViolation,
)
from .linalg import eigh, eigvalsh, expm_hermitian, haar_isometry, trace_norm
from .optimizer import OptimizerConfig
from .state import (
    MultipartiteState,
    Region,
    partial_trace,
    pure_state,
    von_neumann_entropy,
)

log = logging.getLogger(__name__)

MAX_SITES = 12
DEGENERACY_ATOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinChainConfig:
    """Qubit A attached at site 0 of an open mixed-field Ising chain."""

    n_total: int = 8
    g: float = -1.05
    h: float = 0.5
    t: float = 1.0

    def __post_init__(self):
        if self.n_total < 2:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"need A plus at least one environment spin, got n={self.n_total}",
            )
        if self.n_total > MAX_SITES:
            raise BlanketError(
                BlanketErrno.TOO_LARGE,
                f"{self.n_total} sites exceed the dense limit of {MAX_SITES}",
            )
        if self.t < 0:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT, f"negative time {self.t}",
            )


@dataclass(frozen=True)
class AppendixBConfig:
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT, f"p={self.p} outside [0, 1]",
            )


def _default_times() -> tuple[float, ...]:
    return tuple(float(t) for t in np.linspace(0.0, 3.0, 13))


@dataclass(frozen=True)
class SweepConfig:
    times: tuple[float, ...] = field(default_factory=_default_times)
    q_values: tuple[int, ...] = tuple(range(1, 9))
    spin: SpinChainConfig = field(default_factory=SpinChainConfig)
    r_size: int = 1

    def __post_init__(self):
        if not self.times or not self.q_values:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT, "empty sweep grid",
            )
        if self.spin.n_total > 10:
            raise BlanketError(
                BlanketErrno.TOO_LARGE,
                f"sweeps are limited to 10 sites, got {self.spin.n_total}",
            )
        if any(q < 1 for q in self.q_values):
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT, f"q values must be >= 1: {self.q_values}",
            )


# -- Ising chain --------------------------------------------------------------------

def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    return reduce(np.kron, [op if i == site else IDENTITY for i in range(n)])


def ising_hamiltonian(n_sites: int, g: float, h: float) -> np.ndarray:
    """``H = -sum Z_i Z_(i+1) - g sum X_i - h sum Z_i`` with open boundary."""
    if n_sites < 1:
        raise BlanketError(BlanketErrno.INVALID_ARGUMENT, "need at least one site")
    if n_sites > MAX_SITES:
        raise BlanketError(
            BlanketErrno.TOO_LARGE,
            f"{n_sites} sites exceed the dense limit of {MAX_SITES}",
        )
    dim = 2 ** n_sites
    ham = np.zeros((dim, dim), dtype=complex)
    for i in range(n_sites - 1):
        ham -= _site_operator(PAULI_Z, i, n_sites) @ _site_operator(PAULI_Z, i + 1, n_sites)
    for i in range(n_sites):
        ham -= g * _site_operator(PAULI_X, i, n_sites)
        ham -= h * _site_operator(PAULI_Z, i, n_sites)
    return ham


def ground_state(ham: np.ndarray) -> np.ndarray:
    w, v = eigh(ham)
    if len(w) > 1 and w[1] - w[0] < DEGENERACY_ATOL:
        msg = f"ground state degenerate (gap {w[1] - w[0]:.3e}), using the first eigenvector"
        log.warning(msg)
        warnings.warn(msg, DegenerateGroundStateWarning, stacklevel=2)
    return v[:, 0]


def spin_chain_channel(cfg: SpinChainConfig) -> KrausChannel:
    """``rho -> U (rho (x) |psi0><psi0|) U^dagger`` with ``U = exp(-iHt)``.

    ``psi0`` is the ground state of the chain without A; the outputs
    ``B1..Bn`` are the sites in chain order, ``B1`` being A's own site.
    """
    n = cfg.n_total
    psi0 = ground_state(ising_hamiltonian(n - 1, cfg.g, cfg.h))
    u = expm_hermitian(ising_hamiltonian(n, cfg.g, cfg.h), -1j * cfg.t)
    embed = np.kron(IDENTITY, psi0[:, None])
    labels = tuple(f"B{i + 1}" for i in range(n))
    return KrausChannel((u @ embed,), (2,) * n, labels)


# -- analytic examples ---------------------------------------------------------------

def _basis(bits: Sequence[int]) -> np.ndarray:
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return vec


def constant_channel(
    n_outputs: int, sigma: MultipartiteState | None = None,
) -> KrausChannel:
    """Every input goes to ``sigma`` (default ``|0..0>``)."""
    dims = (2,) * n_outputs
    if sigma is None:
        sigma = pure_state(_basis([0] * n_outputs), dims)
    lam, vs = eigh(sigma.rho)
    ops = tuple(
        math.sqrt(lam[j]) * np.outer(vs[:, j], _basis([i]))
        for i in range(2)
        for j in np.flatnonzero(lam > 1e-14)
    )
    return KrausChannel(ops, sigma.dims)


def identity_to_first_channel(n_outputs: int, index: int = 0) -> KrausChannel:
    """A goes to output ``index`` unchanged; every other output is ``|0>``."""
    if not 0 <= index < n_outputs:
        raise BlanketError(
            BlanketErrno.REGION_OUT_OF_RANGE,
            f"output {index} outside {n_outputs} outputs",
        )
    cols = []
    for i in range(2):
        bits = [0] * n_outputs
        bits[index] = i
        cols.append(_basis(bits))
    return KrausChannel((np.stack(cols, axis=1),), (2,) * n_outputs)


def ghz_isometry_channel(n_outputs: int) -> KrausChannel:
    """``|0> -> |0..0>``, ``|1> -> |1..1>``."""
    v = np.stack([_basis([0] * n_outputs), _basis([1] * n_outputs)], axis=1)
    return KrausChannel((v,), (2,) * n_outputs)


def haar_isometry_channel(n_outputs: int, rng: np.random.Generator) -> KrausChannel:
    return KrausChannel((haar_isometry(2 ** n_outputs, 2, rng),), (2,) * n_outputs)


def z_measure_prepare(n_prepared: int = 1) -> MeasureAndPrepareChannel:
    """Measure in the computational basis, prepare ``|a..a>`` for outcome ``a``."""
    dims = (2,) * n_prepared
    return MeasureAndPrepareChannel(
        (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
        tuple(pure_state(_basis([a] * n_prepared), dims) for a in range(2)),
    )


@dataclass(frozen=True)
class ExampleResult:
    name: str
    blanket: tuple[int, ...]
    max_distance: float
    expected_zero: bool
    passed: bool
    # distance of an independently built exact approximation, where one exists
    oracle_distance: float = math.nan


@dataclass(frozen=True)
class AnalyticReport:
    examples: tuple[ExampleResult, ...]

    @property
    def passed(self) -> bool:
        return all(ex.passed for ex in self.examples)


def analytic_examples_check(
    cfg: OptimizerConfig | None = None,
    n_outputs: int = 3,
    haar_outputs: int = 5,
    n_inputs: int = 200,
    atol: float = 1e-6,
) -> AnalyticReport:
    """Blanket and measure-and-prepare distances for the analytic channels.

    The constant channel needs no blanket, the identity-to-B1 channel needs
    ``Q = {B1}``, and the GHZ isometry is exactly measure-and-prepare on
    every output with the computational-basis measurement: its greedy run
    must certify, and the explicit Z measure-and-prepare channel must match
    to ``atol``. The Haar-random isometry carries no exact claim; only its
    certificate bounds are checked.
    """
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2 ** 30,)))
    results = []

    for name, channel in (
        ("constant", constant_channel(n_outputs)),
        ("identity", identity_to_first_channel(n_outputs)),
    ):
        choi = choi_of_channel(channel)
        report = greedy_blanket(choi.state, choi.reference, 1, 1, cfg)
        cert = theorem1_certificate(
            choi, report.blanket, report.measurement, 1, cfg, n_inputs, q_size=1,
        )
        results.append(ExampleResult(
            name, report.blanket.indices, cert.max_distance, True,
            cert.max_distance <= atol and cert.passed(cfg.slack),
        ))

    ghz = choi_of_channel(ghz_isometry_channel(n_outputs))
    report = greedy_blanket(ghz.state, ghz.reference, 1, 1, cfg)
    cert = theorem1_certificate(
        ghz, report.blanket, report.measurement, 1, cfg, n_inputs, q_size=1,
    )
    inputs = haar_pure_inputs(2, n_inputs, rng)
    z_channel = z_measure_prepare()
    oracle = max(
        mp_output_distance(reduced_channel_choi(ghz, Region.of(i)), z_channel, inputs)
        for i in ghz.outputs
    )
    results.append(ExampleResult(
        "ghz", report.blanket.indices, cert.max_distance, True,
        cert.passed(cfg.slack) and oracle <= atol, oracle,
    ))

    haar = choi_of_channel(haar_isometry_channel(haar_outputs, rng))
    report = greedy_blanket(haar.state, haar.reference, 1, 1, cfg)
    cert = theorem1_certificate(
        haar, report.blanket, report.measurement, 1, cfg, n_inputs, q_size=1,
    )
    results.append(ExampleResult(
        "haar", report.blanket.indices, cert.max_distance, False,
        cert.passed(cfg.slack),
    ))

    for ex in results:
        log.info(
            "%s: Q=%s max distance %.3e %s",
            ex.name, list(ex.blanket), ex.max_distance,
            "PASS" if ex.passed else "FAIL",
        )
    return AnalyticReport(tuple(results))


# -- Ising sweep ----------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    t: float
    q: int
    alpha_q_bits: float
    bound_bits: float
    blanket: tuple[int, ...]
    runtime_s: float
    error: str = ""
    violation: bool = False


def _error_row(
    t: float, q: int, message: str, violation: bool = False,
) -> SweepRow:
    return SweepRow(t, q, math.nan, math.nan, (), 0.0, message, violation)


def _sweep_time(
    t: float, sweep: SweepConfig, cfg: OptimizerConfig,
) -> list[SweepRow]:
    r = sweep.r_size
    n_out = sweep.spin.n_total
    feasible = [q for q in sweep.q_values if greedy_steps_needed(r, q) * r <= n_out]
    path_error: BlanketError | None = None
    if feasible:
        try:
            spin = SpinChainConfig(sweep.spin.n_total, sweep.spin.g, sweep.spin.h, t)
            choi = choi_of_channel(spin_chain_channel(spin))
            s, a = choi.state, choi.reference
            m_max = max(greedy_steps_needed(r, q) for q in feasible)
            steps = greedy_path(s, a, r, m_max, cfg)
            entropy_a = von_neumann_entropy(partial_trace(s, a))
        except BlanketError as e:
            path_error = e
            log.error("t=%g: %s", t, e)

    rows = []
    for q in sweep.q_values:
        if q not in feasible:
            rows.append(_error_row(
                t, q,
                f"q={q} needs {greedy_steps_needed(r, q)} steps of "
                f"{r} outputs, only {n_out} outputs",
            ))
            continue
        if path_error is not None:
            rows.append(_error_row(
                t, q, path_error.message,
                isinstance(path_error, InvariantViolation),
            ))
            continue
        try:
            report = report_from_steps(s, a, r, q, steps, cfg, entropy_a)
        except BlanketError as e:
            log.error("t=%g q=%d: %s", t, q, e)
            rows.append(_error_row(
                t, q, e.message, isinstance(e, InvariantViolation),
            ))
            continue
        error, violation = "", False
        try:
            report.check_invariants(cfg.slack)
        except InvariantViolation as e:
            error, violation = e.message, True
            log.error("t=%g q=%d: %s", t, q, e.message)
        rows.append(SweepRow(
            t, q, report.alpha_q_bits, report.bound_bits,
            report.blanket.indices, report.runtime_s, error, violation,
        ))
    log.info("t=%g done", t)
    return rows


def figure3_sweep(
    sweep: SweepConfig | None = None,
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Greedy blankets of the Ising-chain channel over a ``t x q`` grid.

    One greedy path per time serves every ``q``: the steps do not depend on
    ``q``, only their number does. Each row's runtime is the time spent on
    the steps it uses. A cell that fails with :class:`BlanketError` becomes
    a row with ``error`` set instead of aborting the grid.
    """
    sweep = sweep or SweepConfig()
    cfg = cfg or OptimizerConfig()
    times = list(sweep.times)
    if workers > 1 and len(times) > 1:
        with ThreadPool(min(workers, len(times))) as pool:
            per_time = pool.starmap(_sweep_time, [(t, sweep, cfg) for t in times])
    else:
        per_time = [_sweep_time(t, sweep, cfg) for t in times]
    rows = [row for chunk in per_time for row in chunk]
    return sorted(rows, key=lambda row: (row.t, row.q))


def alpha_monotonicity_warnings(
    rows: Sequence[SweepRow], slack: float = 2e-3,
) -> list[str]:
    """Places where alpha_Q grows with q by more than ``slack``."""
    out = []
    by_time: dict[float, list[SweepRow]] = {}
    for row in rows:
        if not row.error:
            by_time.setdefault(row.t, []).append(row)
    for t, group in sorted(by_time.items()):
        group.sort(key=lambda row: row.q)
        for prev, cur in zip(group, group[1:]):
            if cur.alpha_q_bits > prev.alpha_q_bits + slack:
                msg = (
                    f"t={t:g}: alpha_Q rises from {prev.alpha_q_bits:.6f} (q={prev.q}) "
                    f"to {cur.alpha_q_bits:.6f} (q={cur.q})"
                )
                log.warning(msg)
                out.append(msg)
    return out


def empirical_contiguity(rows: Sequence[SweepRow]) -> dict[tuple[float, int], bool]:
    """Whether each blanket is the block of outputs starting at A's site."""
    return {
        (row.t, row.q): row.blanket == tuple(range(1, len(row.blanket) + 1))
        for row in rows
        if not row.error
    }


# -- compatible measure-and-prepare channels ------------------------------------------

_KET_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
_KET_MINUS = np.array([1.0, -1.0]) / math.sqrt(2)
_KET_0 = np.array([1.0, 0.0])
_KET_1 = np.array([0.0, 1.0])


def _ket(*parts: np.ndarray) -> np.ndarray:
    return reduce(np.kron, parts).astype(complex)


def appendix_b_choi(p: float) -> MultipartiteState:
    """Joint Choi operator on (A, B1, B2) whose marginals are the Choi states
    of :func:`first_compatible_channel` and :func:`second_compatible_channel`.

    Positive only for ``|p - 1/2| <= 1/(2 sqrt 2)``.
    """
    AppendixBConfig(p)
    k000 = _ket(_KET_0, _KET_0, _KET_0)
    k001 = _ket(_KET_0, _KET_0, _KET_1)
    k1p0 = _ket(_KET_1, _KET_PLUS, _KET_0)
    k1p1 = _ket(_KET_1, _KET_PLUS, _KET_1)

    def proj(v):
        return np.outer(v, v.conj())

    rho = 0.25 * (proj(k000) + proj(k001) + proj(k1p0) + proj(k1p1))
    cross = (math.sqrt(2) / 2) * (p - 0.5) * (
        np.outer(k000, k1p0.conj()) - np.outer(k001, k1p1.conj())
    )
    rho = rho + cross + cross.conj().T
    return MultipartiteState(rho, (2, 2, 2), ("A", "B1", "B2"), validate=False)


def first_compatible_channel() -> MeasureAndPrepareChannel:
    """Measure 0/1, prepare ``|0>`` or ``|+>``."""
    return MeasureAndPrepareChannel(
        (np.outer(_KET_0, _KET_0), np.outer(_KET_1, _KET_1)),
        (pure_state(_KET_0, (2,)), pure_state(_KET_PLUS, (2,))),
    )


def second_compatible_channel(p: float) -> MeasureAndPrepareChannel:
    """Measure +/-, prepare ``diag(p, 1-p)`` or ``diag(1-p, p)``."""
    AppendixBConfig(p)
    return MeasureAndPrepareChannel(
        (np.outer(_KET_PLUS, _KET_PLUS), np.outer(_KET_MINUS, _KET_MINUS)),
        (
            MultipartiteState(np.diag([p, 1 - p]), (2,)),
            MultipartiteState(np.diag([1 - p, p]), (2,)),
        ),
    )


def positivity_window() -> tuple[float, float]:
    half_width = 1 / (2 * math.sqrt(2))
    return 0.5 - half_width, 0.5 + half_width


@dataclass(frozen=True)
class AppendixBReport:
    grid: int
    window_detected: tuple[float, float]
    window_expected: tuple[float, float]
    boundary_eigenvalues: tuple[float, float]
    marginals_match: bool
    witness_ok: bool
    window_ok: bool

    @property
    def passed(self) -> bool:
        return self.window_ok and self.marginals_match and self.witness_ok

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "positive_window_detected": list(self.window_detected),
            "expected": [round(x, 7) for x in self.window_expected],
            "boundary_min_eigenvalues": list(self.boundary_eigenvalues),
            "marginals_match": self.marginals_match,
            "witness_ok": self.witness_ok,
            "window_ok": self.window_ok,
            "passed": self.passed,
        }


def appendix_b_check(grid: int = 201) -> AppendixBReport:
    """Positivity window, marginals and incompatibility witness over a p grid."""
    if grid < 2:
        raise BlanketError(BlanketErrno.INVALID_ARGUMENT, f"grid of {grid} points")
    ps = np.linspace(0.0, 1.0, grid)
    step = 1.0 / (grid - 1)
    lo_exp, hi_exp = positivity_window()
    lambda1 = first_compatible_channel().choi().state.rho
    plus = pure_state(_KET_PLUS, (2,))
    minus = pure_state(_KET_MINUS, (2,))

    positive = []
    marginals_match = True
    witness_ok = True
    for p in ps:
        joint = appendix_b_choi(float(p))
        min_eig = float(eigvalsh(joint.rho)[0])
        positive.append(min_eig >= -1e-9)

        rho_ab1 = partial_trace(joint, Region.of(0, 1)).rho
        rho_ab2 = partial_trace(joint, Region.of(0, 2)).rho
        lambda2 = second_compatible_channel(float(p)).choi().state.rho
        if (np.max(np.abs(rho_ab1 - lambda1)) > 1e-10
                or np.max(np.abs(rho_ab2 - lambda2)) > 1e-10):
            marginals_match = False
            log.warning("marginals differ from the reduced Choi states at p=%g", p)

        choi2 = ChoiState(partial_trace(joint, Region.of(0, 2)))
        gap = trace_norm(channel_of_choi(choi2, plus).rho - channel_of_choi(choi2, minus).rho)
        if abs(gap - 2 * abs(2 * p - 1)) > 1e-12:
            witness_ok = False
            log.warning("witness %.15f differs from 2|2p-1| at p=%g", gap, p)
        if positive[-1] and abs(p - 0.5) > step / 2 and gap <= 0.0:
            witness_ok = False

    inside = [p for p, ok in zip(ps, positive) if ok]
    detected = (float(min(inside)), float(max(inside))) if inside else (math.nan, math.nan)
    contiguous = all(
        ok == (detected[0] <= p <= detected[1]) for p, ok in zip(ps, positive)
    )
    window_ok = bool(inside) and contiguous and (
        abs(detected[0] - lo_exp) <= step and abs(detected[1] - hi_exp) <= step
    )
    boundary = (
        float(eigvalsh(appendix_b_choi(lo_exp).rho)[0]),
        float(eigvalsh(appendix_b_choi(hi_exp).rho)[0]),
    )
    window_ok = window_ok and all(abs(x) <= 1e-8 for x in boundary)
    log.info(
        "positive window [%.6f, %.6f], expected [%.6f, %.6f]",
        detected[0], detected[1], lo_exp, hi_exp,
    )
    return AppendixBReport(
        grid, detected, (lo_exp, hi_exp), boundary,
        marginals_match, witness_ok, window_ok,
    )
