import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .error import BlanketErrno, BlanketError
from .linalg import (
    as_matrix,
    haar_unitary,
    is_unitary,
    kron,
    unitary_from_parameters,
)
from .state import Region, disjoint_union


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Rank-1 projective measurement on a region.

    The measured basis is the column basis of ``unitary``; ``dims`` are the
    dimensions of the region's subsystems in region order.
    """

    region: Region
    dims: tuple[int, ...]
    unitary: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        u = as_matrix(self.unitary)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "unitary", u)
        if not len(self.region):
            raise BlanketError(
                BlanketErrno.EMPTY_REGION, "measurement on an empty region",
            )
        if len(dims) != len(self.region):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"{len(dims)} dims for region {self.region}",
            )
        d = math.prod(dims)
        if u.shape != (d, d):
            raise BlanketError(
                BlanketErrno.DIM_MISMATCH,
                f"unitary of shape {u.shape} on a {d}-dimensional region",
            )
        if not is_unitary(u):
            raise BlanketError(
                BlanketErrno.NOT_UNITARY, "measurement basis is not orthonormal",
            )

    @classmethod
    def computational(
        cls, region: Region, dims: Sequence[int],
    ) -> "ProjectiveMeasurement":
        return cls(region, tuple(dims), np.eye(math.prod(dims)))

    @classmethod
    def from_parameters(
        cls, region: Region, dims: Sequence[int], theta: np.ndarray,
    ) -> "ProjectiveMeasurement":
        return cls(region, tuple(dims), unitary_from_parameters(theta, math.prod(dims)))

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @property
    def projectors(self) -> list[np.ndarray]:
        u = self.unitary
        return [np.outer(u[:, k], u[:, k].conj()) for k in range(self.dim)]

    def probabilities(self, rho_region: np.ndarray) -> np.ndarray:
        u = self.unitary
        return np.real(np.einsum("ik,ij,jk->k", u.conj(), rho_region, u))

    def completeness_error(self) -> float:
        total = sum(self.projectors)
        return float(np.max(np.abs(total - np.eye(self.dim))))


def _reorder_factors(
    u: np.ndarray, dims: Sequence[int], perm: Sequence[int],
) -> np.ndarray:
    n = len(dims)
    t = u.reshape(tuple(dims) * 2)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(u.shape)


def compose_measurements(
    measurements: Sequence[ProjectiveMeasurement],
) -> ProjectiveMeasurement:
    """Tensor product of measurements on disjoint regions, on the sorted union."""
    if not measurements:
        raise BlanketError(BlanketErrno.EMPTY_REGION, "nothing to compose")
    if len(measurements) == 1:
        return measurements[0]
    union = disjoint_union(*(m.region for m in measurements))
    sites = [i for m in measurements for i in m.region]
    dims = [d for m in measurements for d in m.dims]
    u = kron(*(m.unitary for m in measurements))
    perm = sorted(range(len(sites)), key=sites.__getitem__)
    u = _reorder_factors(u, dims, perm)
    return ProjectiveMeasurement(union, tuple(dims[p] for p in perm), u)


def random_measurement(
    region: Region, dims: Sequence[int], rng: np.random.Generator,
) -> ProjectiveMeasurement:
    return ProjectiveMeasurement(
        region, tuple(dims), haar_unitary(math.prod(dims), rng),
    )
