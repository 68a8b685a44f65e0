"""Channels, their Choi states and the distances between them.

Choi states are normalized: ``rho = (id (x) Lambda)(|Gamma><Gamma|)`` with
``|Gamma> = d^-1/2 sum_i |i>|i>`` in the computational basis of the
reference ``A'``, which is always subsystem 0 of the Choi state.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .error import BlanketErrno, BlanketError
from .linalg import (
    as_matrix,
    eigh,
    funm_hermitian,
    haar_isometry,
    haar_state_vector,
    hermitian_part,
    trace_norm,
)
from .measurement import (
    ProjectiveMeasurement,
    compose_measurements,
    random_measurement,
)
from .optimizer import OptimizerConfig, optimize_unitary
from .state import (
    MultipartiteState,
    Region,
    check_region,
    conditioned_blocks,
    dephase_local,
    partial_trace,
    pure_state,
)

log = logging.getLogger(__name__)

TP_ATOL = 1e-10
CHOI_MARGINAL_ATOL = 1e-9
POVM_ATOL = 1e-10
POVM_RENORMALIZE_ATOL = 1e-8
PROBABILITY_ATOL = 1e-10


def _output_labels(dims_out: Sequence[int], labels: Sequence[str]) -> tuple[str, ...]:
    return tuple(labels) or tuple(f"B{i + 1}" for i in range(len(dims_out)))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel ``rho -> sum_k K rho K^dagger``; each ``K`` is ``dim_out x dim_in``."""

    kraus_ops: tuple[np.ndarray, ...]
    dims_out: tuple[int, ...]
    labels_out: tuple[str, ...] = ()

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        dims_out = tuple(int(d) for d in self.dims_out)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dims_out", dims_out)
        object.__setattr__(self, "labels_out", _output_labels(dims_out, self.labels_out))

        if not ops:
            raise BlanketError(BlanketErrno.INVALID_ARGUMENT, "no Kraus operators")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH, "Kraus operators differ in shape",
            )
        if shape[0] != math.prod(dims_out):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"Kraus output dimension {shape[0]} does not match {dims_out}",
            )
        total = sum(k.conj().T @ k for k in ops)
        err = float(np.max(np.abs(total - np.eye(shape[1]))))
        if err > TP_ATOL:
            raise BlanketError(
                BlanketErrno.NOT_TRACE_PRESERVING,
                f"max |sum K^dagger K - I| = {err:.3e}",
            )

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply(self, s: MultipartiteState) -> MultipartiteState:
        if s.dim != self.dim_in:
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"input dimension {s.dim}, channel expects {self.dim_in}",
            )
        out = sum(k @ s.rho @ k.conj().T for k in self.kraus_ops)
        return MultipartiteState(
            hermitian_part(out), self.dims_out, self.labels_out, validate=False,
        )


@dataclass(frozen=True, eq=False)
class ChoiState:
    state: MultipartiteState

    def __post_init__(self):
        s = self.state
        if s.n_subsystems < 2:
            raise BlanketError(
                BlanketErrno.INSUFFICIENT_SUBSYSTEMS,
                "a Choi state needs a reference and at least one output",
            )
        marginal = partial_trace(s, Region.of(0)).rho
        d = s.dims[0]
        err = float(np.max(np.abs(marginal - np.eye(d) / d)))
        if err > CHOI_MARGINAL_ATOL:
            raise BlanketError(
                BlanketErrno.NOT_TRACE_PRESERVING,
                f"reference marginal deviates from I/d by {err:.3e}",
            )

    @property
    def d_a(self) -> int:
        return self.state.dims[0]

    @property
    def reference(self) -> Region:
        return Region.of(0)

    @property
    def outputs(self) -> Region:
        return Region(tuple(range(1, self.state.n_subsystems)))

    @property
    def output_dims(self) -> tuple[int, ...]:
        return self.state.dims[1:]


class Ensemble(NamedTuple):
    probabilities: np.ndarray
    states_a: tuple[MultipartiteState, ...]
    states_r: tuple[MultipartiteState, ...]

    def validate(self) -> "Ensemble":
        p = np.asarray(self.probabilities, dtype=float)
        if not (len(p) == len(self.states_a) == len(self.states_r)):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH, "ensemble members differ in count",
            )
        if np.any(p < -PROBABILITY_ATOL) or abs(p.sum() - 1.0) > PROBABILITY_ATOL:
            raise BlanketError(
                BlanketErrno.NOT_NORMALIZED,
                f"probabilities sum to {p.sum():.12f}",
            )
        return self

    def separable_operator(self) -> np.ndarray:
        """``sum_alpha p_alpha rho_A^alpha (x) sigma_R^alpha``."""
        return sum(
            p * np.kron(a.rho, r.rho)
            for p, a, r in zip(self.probabilities, self.states_a, self.states_r)
        )


@dataclass(frozen=True, eq=False)
class MeasureAndPrepareChannel:
    povm: tuple[np.ndarray, ...]
    prepared: tuple[MultipartiteState, ...]

    def __post_init__(self):
        povm = tuple(as_matrix(m) for m in self.povm)
        prepared = tuple(self.prepared)
        object.__setattr__(self, "povm", povm)
        object.__setattr__(self, "prepared", prepared)
        if not povm or len(povm) != len(prepared):
            raise BlanketError(
                BlanketErrno.POVM_INCOMPLETE,
                f"{len(povm)} POVM elements for {len(prepared)} prepared states",
            )
        if len({st.dims for st in prepared}) != 1:
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH, "prepared states differ in dims",
            )
        d = povm[0].shape[0]
        for m in povm:
            if m.shape != (d, d):
                raise BlanketError(
                    BlanketErrno.DIM_MISMATCH, "POVM elements differ in shape",
                )
            if eigh(m).eigenvalues[0] < -POVM_ATOL:
                raise BlanketError(
                    BlanketErrno.NEGATIVE_EIGENVALUE, "POVM element not positive",
                )
        err = float(np.max(np.abs(sum(povm) - np.eye(d))))
        if err > POVM_ATOL:
            raise BlanketError(
                BlanketErrno.POVM_INCOMPLETE,
                f"POVM elements miss the identity by {err:.3e}",
            )

    @property
    def dim_in(self) -> int:
        return self.povm[0].shape[0]

    @property
    def dims_out(self) -> tuple[int, ...]:
        return self.prepared[0].dims

    def apply(self, s: MultipartiteState) -> MultipartiteState:
        if s.dim != self.dim_in:
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"input dimension {s.dim}, POVM acts on {self.dim_in}",
            )
        out = sum(
            np.real(np.trace(m @ s.rho)) * sigma.rho
            for m, sigma in zip(self.povm, self.prepared)
        )
        return MultipartiteState(
            out, self.dims_out, self.prepared[0].labels, validate=False,
        )

    def to_kraus(self) -> KrausChannel:
        """Kraus form ``sqrt(mu lambda) |s><m|`` from both spectral decompositions."""
        ops = []
        for m, sigma in zip(self.povm, self.prepared):
            mu, vm = eigh(m)
            lam, vs = eigh(sigma.rho)
            for i in np.flatnonzero(mu > 1e-14):
                for j in np.flatnonzero(lam > 1e-14):
                    ops.append(
                        math.sqrt(mu[i] * lam[j])
                        * np.outer(vs[:, j], vm[:, i].conj())
                    )
        return KrausChannel(tuple(ops), self.dims_out, self.prepared[0].labels)

    def choi(self) -> ChoiState:
        """``d^-1 sum_alpha M_alpha^T (x) sigma_alpha``."""
        d = self.dim_in
        rho = sum(np.kron(m.T, sigma.rho) for m, sigma in zip(self.povm, self.prepared)) / d
        labels = ("A'",) + self.prepared[0].labels
        return ChoiState(
            MultipartiteState(rho, (d,) + self.dims_out, labels, validate=False),
        )


# -- Choi duality ---------------------------------------------------------------

def choi_of_channel(c: KrausChannel) -> ChoiState:
    d = c.dim_in
    rho = np.zeros((d * c.dim_out,) * 2, dtype=complex)
    for k in c.kraus_ops:
        # (I (x) K)|Gamma> has amplitude K[b, i] / sqrt(d) on |i>|b>
        psi = k.T.reshape(-1) / math.sqrt(d)
        rho += np.outer(psi, psi.conj())
    labels = ("A'",) + c.labels_out
    return ChoiState(MultipartiteState(rho, (d,) + c.dims_out, labels, validate=False))


def channel_of_choi(choi: ChoiState, s: MultipartiteState) -> MultipartiteState:
    """``Lambda(tau) = d Tr_A'((tau^T (x) I) rho)``."""
    d = choi.d_a
    if s.dim != d:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH,
            f"input dimension {s.dim}, channel expects {d}",
        )
    dims_out = choi.output_dims
    d_out = math.prod(dims_out)
    r4 = choi.state.rho.reshape(d, d_out, d, d_out)
    out = d * np.einsum("ij,ibjc->bc", s.rho, r4)
    return MultipartiteState(
        hermitian_part(out), dims_out, choi.state.labels[1:], validate=False,
    )


def reduced_channel_choi(choi: ChoiState, r: Region) -> ChoiState:
    """Choi state of ``Tr_{not R} o Lambda``; ``r`` indexes the Choi state."""
    check_region(choi.state, r)
    if 0 in r:
        raise BlanketError(
            BlanketErrno.REGION_OVERLAP, "output region contains the reference",
        )
    return ChoiState(partial_trace(choi.state, r.union(choi.reference)))


# -- quantum-classical and measure-and-prepare channels -----------------------------

def apply_qc_channel(
    s: MultipartiteState, m: ProjectiveMeasurement,
) -> MultipartiteState:
    """Measure ``m.region`` and record the outcome in the measured basis."""
    check_region(s, m.region)
    expected = tuple(s.dims[i] for i in m.region)
    if expected != m.dims:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH,
            f"measurement dims {m.dims} but region has dims {expected}",
        )
    rho = dephase_local(s.rho, s.dims, m.unitary, m.region.indices)
    return MultipartiteState(hermitian_part(rho), s.dims, s.labels, validate=False)


def measure_prepare_apply(
    e: MeasureAndPrepareChannel, s: MultipartiteState,
) -> MultipartiteState:
    return e.apply(s)


def ensemble_to_mp_channel(e: Ensemble) -> MeasureAndPrepareChannel:
    """POVM ``M_alpha = d p_alpha (rho_A^alpha)^T`` with prepared ``sigma_R^alpha``.

    Completes exactly when the ensemble averages to ``I/d`` on A, as the
    ensemble of a Choi state does. Deviations up to 1e-8 are corrected by
    ``S^-1/2 M S^-1/2``.
    """
    e.validate()
    d = e.states_a[0].dim
    povm = [d * p * a.rho.T for p, a in zip(e.probabilities, e.states_a)]
    total = sum(povm)
    err = float(np.max(np.abs(total - np.eye(d))))
    if err > POVM_RENORMALIZE_ATOL:
        raise BlanketError(
            BlanketErrno.POVM_INCOMPLETE,
            f"ensemble does not average to I/{d} (deviation {err:.3e})",
        )
    if err > 0.0:
        log.debug("renormalizing POVM, completeness error %.3e", err)
        inv_sqrt = funm_hermitian(total, lambda w: w ** -0.5)
        povm = [hermitian_part(inv_sqrt @ m @ inv_sqrt) for m in povm]
    return MeasureAndPrepareChannel(tuple(povm), tuple(e.states_r))


# -- distances and bounds ---------------------------------------------------------

def omega_factor(d_a: int, d_r: int) -> float:
    if d_a < 1 or d_r < 1:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT, f"dimensions must be >= 1: {d_a}, {d_r}",
        )
    return float(min(
        d_a ** 2,
        4 * d_a ** 1.5,
        4 * d_r ** 1.5,
        math.sqrt(153 * d_a * d_r),
        2 * d_r - 1,
    ))


def locc_arrow_distance(
    s1: MultipartiteState,
    s2: MultipartiteState,
    r: Region | None = None,
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> float:
    """Projective-measurement estimate of ``||s1 - s2||_{LOCC<-}``.

    Maximizes ``||(1 (x) M_R)(s1 - s2)||_1`` over rank-1 projective ``M_R``
    on ``r`` (default: every subsystem but the first). The estimate never
    exceeds the trace distance.
    """
    if s1.dims != s2.dims:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH, f"dims {s1.dims} and {s2.dims} differ",
        )
    cfg = cfg or OptimizerConfig()
    if r is None:
        r = Region(tuple(range(1, s1.n_subsystems)))
    check_region(s1, r)
    rest = r.complement(s1.n_subsystems)
    delta = s1.rho - s2.rho
    if not np.any(delta):
        return 0.0
    dims = s1.dims

    class Basis(NamedTuple):
        region: Region
        unitary: np.ndarray

    def objective(u: np.ndarray) -> float:
        blocks = conditioned_blocks(delta, dims, rest.indices, [Basis(r, u)])
        blocks = 0.5 * (blocks + np.swapaxes(blocks.conj(), -1, -2))
        return float(np.abs(np.linalg.eigvalsh(blocks)).sum())

    d_r = math.prod(dims[i] for i in r)
    return optimize_unitary(objective, d_r, cfg, key=(0,), workers=workers).value


def diamond_upper_bound(c1: ChoiState, c2: ChoiState) -> float:
    """``d_A ||rho1 - rho2||_1``, an upper bound on the diamond distance."""
    if c1.state.dims != c2.state.dims:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH,
            f"Choi dims {c1.state.dims} and {c2.state.dims} differ",
        )
    return c1.d_a * trace_norm(c1.state.rho - c2.state.rho)


class TheoremBounds(NamedTuple):
    max_output: float
    diamond: float
    diamond_omega: float


def theorem_rhs(
    d_a: int, r_size: int, q_size: int, d_r: int | None = None,
    floor: bool = False,
) -> TheoremBounds:
    """A-priori bounds on the distance of reduced channels to measure-and-prepare.

    ``max_output`` bounds the maximum over input states of the output trace
    distance, ``diamond`` the diamond distance, ``diamond_omega`` the diamond
    distance with the refined dimensional factor (needs ``d_r``). With
    ``floor`` the ratio ``|R|/|Q|`` becomes ``1/(1+floor(|Q|/|R|))``.
    """
    if floor:
        ratio = 1.0 / (1 + q_size // r_size)
    elif q_size == 0:
        return TheoremBounds(math.inf, math.inf, math.inf)
    else:
        ratio = r_size / q_size
    root = math.sqrt(2 * math.log(d_a) * ratio)
    omega = omega_factor(d_a, d_r) if d_r is not None else d_a ** 2
    return TheoremBounds(d_a * root, d_a ** 3 * root, d_a * omega * root)


def haar_pure_inputs(
    d: int, count: int, rng: np.random.Generator,
) -> list[MultipartiteState]:
    return [pure_state(haar_state_vector(d, rng), (d,), ("A",)) for _ in range(count)]


def mp_output_distance(
    choi_r: ChoiState,
    e: MeasureAndPrepareChannel,
    inputs: Sequence[MultipartiteState],
) -> float:
    """Max over ``inputs`` of ``||Lambda_R(rho) - E_R(rho)||_1``."""
    if e.dims_out != choi_r.output_dims:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH,
            f"prepared dims {e.dims_out}, channel outputs {choi_r.output_dims}",
        )
    worst = 0.0
    for s in inputs:
        lhs = channel_of_choi(choi_r, s).rho
        rhs = e.apply(s).rho
        worst = max(worst, trace_norm(lhs - rhs))
    return worst


def random_channel(
    d_in: int, dims_out: Sequence[int], n_kraus: int, rng: np.random.Generator,
) -> KrausChannel:
    """Kraus operators cut from a Haar isometry into ``d_out * n_kraus``."""
    d_out = math.prod(dims_out)
    v = haar_isometry(d_out * n_kraus, d_in, rng)
    ops = tuple(v[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus))
    return KrausChannel(ops, tuple(dims_out))


__all__ = [
    "ChoiState",
    "Ensemble",
    "KrausChannel",
    "MeasureAndPrepareChannel",
    "ProjectiveMeasurement",
    "TheoremBounds",
    "apply_qc_channel",
    "channel_of_choi",
    "choi_of_channel",
    "compose_measurements",
    "diamond_upper_bound",
    "ensemble_to_mp_channel",
    "haar_pure_inputs",
    "locc_arrow_distance",
    "measure_prepare_apply",
    "mp_output_distance",
    "omega_factor",
    "random_channel",
    "random_measurement",
    "reduced_channel_choi",
    "theorem_rhs",
]
