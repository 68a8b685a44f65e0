"""Multipartite density matrices and their entropic quantities.

All entropies are in bits.
"""

import logging
import math
from dataclasses import InitVar, dataclass
from typing import Iterable, NamedTuple, Protocol, Sequence

import numpy as np
from scipy.special import entr

from .error import BlanketErrno, BlanketError
from .linalg import (
    HERMITIAN_ATOL,
    as_matrix,
    eigh,
    hermitian_part,
    hermiticity_error,
    kron,
)

log = logging.getLogger(__name__)

TRACE_ATOL = 1e-10
EIGENVALUE_ATOL = 1e-10
SUPPORT_ATOL = 1e-10
OUTCOME_CUTOFF = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Region:
    """Sorted set of subsystem positions."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT,
                f"duplicate subsystem indices in {idx}",
            )
        if any(i < 0 for i in idx):
            raise BlanketError(
                BlanketErrno.REGION_OUT_OF_RANGE,
                f"negative subsystem index in {idx}",
            )
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @classmethod
    def of(cls, *indices: int) -> "Region":
        return cls(tuple(indices))

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.indices)) + "}"

    def union(self, *others: "Region") -> "Region":
        out = set(self.indices)
        for other in others:
            out.update(other.indices)
        return Region(tuple(out))

    def difference(self, other: "Region") -> "Region":
        return Region(tuple(i for i in self.indices if i not in other.indices))

    def isdisjoint(self, other: "Region") -> bool:
        return not set(self.indices) & set(other.indices)

    def complement(self, n: int) -> "Region":
        return Region(tuple(i for i in range(n) if i not in self.indices))


def disjoint_union(*regions: Region) -> Region:
    seen: set[int] = set()
    for region in regions:
        overlap = seen & set(region.indices)
        if overlap:
            raise BlanketError(
                BlanketErrno.REGION_OVERLAP,
                f"regions overlap on subsystems {sorted(overlap)}",
            )
        seen.update(region.indices)
    return Region(tuple(seen))


@dataclass(frozen=True, eq=False)
class MultipartiteState:
    """Density matrix on an ordered tensor product of subsystems.

    Pass ``validate=False`` for operators that are known to be valid (or are
    deliberately not positive, as in the compatibility counterexample).
    """

    rho: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        rho = as_matrix(self.rho)
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(self.labels) or tuple(f"S{i}" for i in range(len(dims)))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

        if not dims or any(d < 1 for d in dims):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH, f"invalid subsystem dims {dims}",
            )
        if len(labels) != len(dims):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"{len(labels)} labels for {len(dims)} subsystems",
            )
        total = math.prod(dims)
        if rho.shape != (total, total):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"matrix shape {rho.shape} does not match dims {dims}",
            )
        if validate:
            _validate_density(rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def region_dim(self, region: Region) -> int:
        return math.prod(self.dims[i] for i in region)

    def all(self) -> Region:
        return Region(tuple(range(self.n_subsystems)))

    def eigenvalues(self) -> np.ndarray:
        return eigh(self.rho).eigenvalues

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def _validate_density(rho: np.ndarray) -> None:
    err = hermiticity_error(rho)
    if err > HERMITIAN_ATOL:
        raise BlanketError(
            BlanketErrno.NOT_HERMITIAN,
            f"density matrix not Hermitian (max deviation {err:.3e})",
        )
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise BlanketError(
            BlanketErrno.NOT_NORMALIZED, f"trace {tr.real:.12f} differs from 1",
        )
    lo = eigh(rho).eigenvalues[0]
    if lo < -EIGENVALUE_ATOL:
        raise BlanketError(
            BlanketErrno.NEGATIVE_EIGENVALUE,
            f"minimum eigenvalue {lo:.3e} below -{EIGENVALUE_ATOL:.0e}",
        )


def check_region(
    s: MultipartiteState, region: Region, allow_empty: bool = False,
) -> None:
    if not len(region) and not allow_empty:
        raise BlanketError(BlanketErrno.EMPTY_REGION, "region is empty")
    bad = [i for i in region if i >= s.n_subsystems]
    if bad:
        raise BlanketError(
            BlanketErrno.REGION_OUT_OF_RANGE,
            f"subsystems {bad} outside a {s.n_subsystems}-partite state",
        )


# -- tensor plumbing on raw matrices -----------------------------------------

def reduce_ordered(
    rho: np.ndarray, dims: Sequence[int], order: Sequence[int],
) -> np.ndarray:
    """Trace out everything not in ``order`` and arrange the rest in ``order``."""
    n = len(dims)
    order = list(order)
    traced = [i for i in range(n) if i not in order]
    if not traced and order == list(range(n)):
        return rho
    d_keep = math.prod(dims[i] for i in order)
    d_tr = math.prod(dims[i] for i in traced)
    t = rho.reshape(tuple(dims) * 2)
    perm = order + traced + [n + i for i in order] + [n + i for i in traced]
    t = t.transpose(perm).reshape(d_keep, d_tr, d_keep, d_tr)
    return np.einsum("ajbj->ab", t)


def apply_left(
    mat: np.ndarray, dims: Sequence[int], op: np.ndarray, sites: Sequence[int],
) -> np.ndarray:
    """``(op on sites, identity elsewhere) @ mat``; ``op`` is ordered like ``sites``."""
    k = len(sites)
    t = mat.reshape(*dims, mat.shape[1])
    t = np.moveaxis(t, list(sites), list(range(k)))
    shape = t.shape
    d_sites = math.prod(shape[:k])
    t = (op @ t.reshape(d_sites, -1)).reshape(shape)
    t = np.moveaxis(t, list(range(k)), list(sites))
    return t.reshape(mat.shape)


def conjugate_local(
    mat: np.ndarray, dims: Sequence[int], op: np.ndarray, sites: Sequence[int],
) -> np.ndarray:
    """``op mat op^dagger`` with ``op`` acting on ``sites``."""
    y = apply_left(mat, dims, op, sites)
    return apply_left(y.conj().T, dims, op, sites).conj().T


def dephase_local(
    mat: np.ndarray, dims: Sequence[int], unitary: np.ndarray,
    sites: Sequence[int],
) -> np.ndarray:
    """Projective measurement in the column basis of ``unitary`` on ``sites``.

    The outcome is recorded in the measured basis itself, so the result is
    block diagonal in that basis.
    """
    n = len(dims)
    x = conjugate_local(mat, dims, unitary.conj().T, sites)
    t = x.reshape(tuple(dims) * 2)
    for s in sites:
        shape = [1] * (2 * n)
        shape[s] = dims[s]
        shape[n + s] = dims[s]
        t = t * np.eye(dims[s]).reshape(shape)
    return conjugate_local(t.reshape(mat.shape), dims, unitary, sites)


def raw_entropy(batch: np.ndarray) -> np.ndarray:
    """Entropy in nats of (a batch of) positive, possibly unnormalized matrices."""
    batch = 0.5 * (batch + np.swapaxes(batch.conj(), -1, -2))
    ev = np.clip(np.linalg.eigvalsh(batch), 0.0, None)
    return entr(ev).sum(axis=-1)


def _entropy_bits(rho: np.ndarray) -> float:
    w = eigh(rho).eigenvalues
    if w[0] < -EIGENVALUE_ATOL:
        raise BlanketError(
            BlanketErrno.NEGATIVE_EIGENVALUE,
            f"eigenvalue {w[0]:.3e} below -{EIGENVALUE_ATOL:.0e}",
        )
    return float(entr(np.clip(w, 0.0, None)).sum() / LN2)


def _marginal_entropy(s: MultipartiteState, region: Region) -> float:
    if not len(region):
        return 0.0
    return _entropy_bits(reduce_ordered(s.rho, s.dims, region.indices))


# -- public operations --------------------------------------------------------

def partial_trace(s: MultipartiteState, keep: Region) -> MultipartiteState:
    check_region(s, keep)
    rho = reduce_ordered(s.rho, s.dims, keep.indices)
    return MultipartiteState(
        hermitian_part(rho),
        tuple(s.dims[i] for i in keep),
        tuple(s.labels[i] for i in keep),
        validate=False,
    )


def von_neumann_entropy(s: MultipartiteState) -> float:
    return _entropy_bits(s.rho)


def mutual_information(s: MultipartiteState, x: Region, y: Region) -> float:
    check_region(s, x)
    check_region(s, y)
    xy = disjoint_union(x, y)
    return (
        _marginal_entropy(s, x) + _marginal_entropy(s, y)
        - _marginal_entropy(s, xy)
    )


def conditional_mutual_information(
    s: MultipartiteState, x: Region, y: Region, z: Region = Region(),
) -> float:
    """I(X:Y|Z) = S(XZ) + S(YZ) - S(Z) - S(XYZ); equals I(X:Y) for empty Z."""
    check_region(s, x)
    check_region(s, y)
    check_region(s, z, allow_empty=True)
    xyz = disjoint_union(x, y, z)
    if not len(z):
        return mutual_information(s, x, y)
    # everything below lives inside XYZ; reduce once
    local = partial_trace(s, xyz)
    pos = {i: k for k, i in enumerate(xyz)}

    def sub(*regions: Region) -> Region:
        return Region(tuple(pos[i] for r in regions for i in r))

    return (
        _marginal_entropy(local, sub(x, z)) + _marginal_entropy(local, sub(y, z))
        - _marginal_entropy(local, sub(z)) - _marginal_entropy(local, sub(x, y, z))
    )


def chain_rule_check(
    s: MultipartiteState, x: Region, parts: Sequence[Region],
) -> float:
    """Residual of I(X:Y1..Yn) = sum_i I(X:Yi|Y1..Y(i-1))."""
    disjoint_union(x, *parts)
    whole = Region().union(*parts)
    total = mutual_information(s, x, whole)
    acc = 0.0
    before = Region()
    for part in parts:
        acc += conditional_mutual_information(s, x, part, before)
        before = before.union(part)
    return abs(total - acc)


def relative_entropy(rho: MultipartiteState, sigma: MultipartiteState) -> float:
    """D(rho || sigma) in bits; ``math.inf`` when supp(rho) is not in supp(sigma)."""
    if rho.dims != sigma.dims:
        raise BlanketError(
            BlanketErrno.DIM_MISMATCH,
            f"dims {rho.dims} and {sigma.dims} differ",
        )
    mu, v = eigh(sigma.rho)
    weights = np.real(np.einsum("ji,jk,ki->i", v.conj(), rho.rho, v))
    null = mu <= SUPPORT_ATOL
    if np.any(weights[null] > SUPPORT_ATOL):
        log.debug("relative entropy: support of rho leaves support of sigma")
        return math.inf
    lam = np.clip(eigh(rho.rho).eigenvalues, 0.0, None)
    neg_entropy = -entr(lam).sum()
    cross = np.sum(weights[~null] * np.log(mu[~null]))
    return float((neg_entropy - cross) / LN2)


# -- conditioning on a measured region -----------------------------------------

class LocalBasis(Protocol):
    region: Region
    unitary: np.ndarray


class ConditionalEnsemble(NamedTuple):
    probabilities: np.ndarray
    states: list[MultipartiteState]


def conditioned_blocks(
    rho: np.ndarray,
    dims: Sequence[int],
    keep: Sequence[int],
    conditioning: Sequence[LocalBasis] = (),
) -> np.ndarray:
    """Unnormalized blocks ``<alpha| rho_{Q keep} |alpha>`` over measured Q.

    ``alpha`` runs over the product basis of the conditioning measurements,
    in their given order; the blocks act on ``keep`` (in the given order) and
    have trace ``p_alpha``. Without conditioning one block is returned.
    """
    q_sites = [i for m in conditioning for i in m.region]
    order = q_sites + list(keep)
    reduced = reduce_ordered(rho, dims, order)
    if not conditioning:
        return reduced[None, :, :]
    if len(conditioning) == 1:
        u = conditioning[0].unitary
    else:
        u = kron(*(m.unitary for m in conditioning))
    dq = u.shape[0]
    x = reduced.shape[0] // dq
    r4 = reduced.reshape(dq, x, dq, x)
    return np.einsum("ik,iajb,jk->kab", u.conj(), r4, u, optimize=True)


def classical_cmi_from_blocks(blocks: np.ndarray, d_a: int, d_r: int) -> float:
    """I(A:R|Q) in bits for the state sum_k |k><k|_Q (x) blocks[k] on A(x)R."""
    k = blocks.shape[0]
    b5 = blocks.reshape(k, d_a, d_r, d_a, d_r)
    rho_a = np.einsum("kaibi->kab", b5)
    rho_r = np.einsum("kaiaj->kij", b5)
    p = np.real(np.einsum("kii->k", blocks))
    nats = (
        raw_entropy(rho_a).sum() + raw_entropy(rho_r).sum()
        - raw_entropy(blocks).sum() - entr(np.clip(p, 0.0, None)).sum()
    )
    return float(nats / LN2)


def measured_cmi_from_blocks(
    blocks: np.ndarray, d_a: int, d_r: int, u_r: np.ndarray,
) -> float:
    """I(A:R|Q) in bits after additionally measuring R in the basis ``u_r``."""
    k = blocks.shape[0]
    b5 = blocks.reshape(k, d_a, d_r, d_a, d_r)
    b = np.einsum("il,kaibj,jl->klab", u_r.conj(), b5, u_r, optimize=True)
    rho_a = b.sum(axis=1)
    p = np.real(np.einsum("kaa->k", rho_a))
    t = np.real(np.einsum("klaa->kl", b))
    nats = (
        raw_entropy(rho_a).sum() - entr(np.clip(p, 0.0, None)).sum()
        - raw_entropy(b).sum() + entr(np.clip(t, 0.0, None)).sum()
    )
    return float(nats / LN2)


def conditional_ensemble(
    s: MultipartiteState, keep: Region, measurement: LocalBasis,
) -> ConditionalEnsemble:
    """Outcome probabilities and post-measurement states on ``keep``."""
    check_region(s, keep)
    check_region(s, measurement.region)
    disjoint_union(keep, measurement.region)
    blocks = conditioned_blocks(s.rho, s.dims, keep.indices, [measurement])
    p = np.real(np.einsum("kii->k", blocks))
    dims = tuple(s.dims[i] for i in keep)
    labels = tuple(s.labels[i] for i in keep)
    mask = p >= OUTCOME_CUTOFF
    states = [
        MultipartiteState(hermitian_part(b / pk), dims, labels, validate=False)
        for b, pk in zip(blocks[mask], p[mask])
    ]
    return ConditionalEnsemble(p[mask], states)


def measured_cmi(
    s: MultipartiteState,
    a: Region,
    r: Region,
    conditioning: Sequence[LocalBasis] = (),
    m_r: LocalBasis | None = None,
) -> float:
    """I(A:R|Q) on M_R M_Q(rho), Q being the union of the conditioning regions.

    Uses I(A:R|Q) = sum_alpha p_alpha I(A:R)_{rho^alpha} for a classical Q.
    """
    q = disjoint_union(a, r, *(m.region for m in conditioning))
    check_region(s, q)
    if m_r is not None and m_r.region != r:
        raise BlanketError(
            BlanketErrno.REGION_OVERLAP,
            f"measurement on {m_r.region} does not act on R={r}",
        )
    blocks = conditioned_blocks(
        s.rho, s.dims, a.indices + r.indices, conditioning,
    )
    d_a, d_r = s.region_dim(a), s.region_dim(r)
    if m_r is None:
        return classical_cmi_from_blocks(blocks, d_a, d_r)
    return measured_cmi_from_blocks(blocks, d_a, d_r, m_r.unitary)


# -- constructors ---------------------------------------------------------------

def pure_state(
    vector, dims: Sequence[int], labels: Sequence[str] = (),
) -> MultipartiteState:
    psi = np.asarray(vector, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return MultipartiteState(np.outer(psi, psi.conj()), tuple(dims), tuple(labels))


def maximally_mixed(dims: Sequence[int]) -> MultipartiteState:
    d = math.prod(dims)
    return MultipartiteState(np.eye(d) / d, tuple(dims))


def bell_state() -> MultipartiteState:
    return pure_state([1, 0, 0, 1], (2, 2), ("A", "B"))


def ghz_state(n: int) -> MultipartiteState:
    psi = np.zeros(2 ** n)
    psi[0] = psi[-1] = 1.0
    return pure_state(psi, (2,) * n)


def product_state(*states: MultipartiteState) -> MultipartiteState:
    rho = states[0].rho
    for other in states[1:]:
        rho = np.kron(rho, other.rho)
    dims = tuple(d for st in states for d in st.dims)
    labels = tuple(lab for st in states for lab in st.labels)
    if len(set(labels)) != len(labels):
        labels = ()
    return MultipartiteState(rho, dims, labels, validate=False)


def random_state(
    dims: Iterable[int], rng: np.random.Generator, labels: Sequence[str] = (),
) -> MultipartiteState:
    """Full-rank random state: trace out an equal-size ancilla of a random pure state."""
    dims = tuple(dims)
    d = math.prod(dims)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    g /= np.linalg.norm(g)
    rho = hermitian_part(g @ g.conj().T)
    return MultipartiteState(rho, dims, tuple(labels))
