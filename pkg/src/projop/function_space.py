"""Discretized function spaces on the cube [-1,1]^d.

Functions are represented by their values on the nodes of a tensor-product
Gauss-Legendre quadrature whose weights are rescaled to realize the
normalized Lebesgue measure (total mass 1).  Norms, distances, and
integrals against a weight are all quadrature sums; the rule with m points
per axis is exact for polynomials of per-axis degree up to 2m-1, which is
the subspace the projection machinery lives on.

Values from different quadratures never interoperate: there is no implicit
resampling, and mixing them raises :class:`~projop.errors.UsageError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ResourceCapError, UsageError

# Hard cap on total node count for a tensor rule; beyond this the dense
# node/weight arrays stop being desk-scale.
MAX_QUAD_NODES = 200_000

# Norm exponents above this are numerically indistinguishable from the
# sup-norm at double precision, and |v|^p starts to overflow.
P_CAP = 64.0

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PNorm:
    """Exponent of an L^p norm, restricted to 1 < p <= P_CAP."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or p <= 1.0 or p > P_CAP:
            raise UsageError(
                f"norm exponent must satisfy 1 < p <= {P_CAP:g}, got {self.p!r}"
            )
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)


def as_pnorm(p) -> PNorm:
    """Coerce a float or PNorm to PNorm."""
    return p if isinstance(p, PNorm) else PNorm(float(p))


def _frozen_array(values, dtype=float, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise UsageError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and weights realizing the normalized measure on [-1,1]^dim.

    Attributes
    ----------
    dim : int
        Spatial dimension d.
    nodes : ndarray, shape (N, d)
        Quadrature nodes, all inside [-1,1]^d.
    weights : ndarray, shape (N,)
        Nonnegative weights summing to 1.
    points_per_axis : int or None
        Per-axis point count when the rule is a tensor Gauss-Legendre
        rule; used for polynomial-exactness checks.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    points_per_axis: int | None = None

    def __post_init__(self):
        nodes = _frozen_array(self.nodes)
        if nodes.ndim == 1:
            nodes = _frozen_array(nodes.reshape(-1, 1))
        weights = _frozen_array(self.weights, ndim=1)
        if self.dim < 1:
            raise UsageError(f"dimension must be >= 1, got {self.dim}")
        if nodes.shape != (len(weights), self.dim):
            raise UsageError(
                f"nodes shape {nodes.shape} incompatible with "
                f"{len(weights)} weights in dimension {self.dim}"
            )
        if np.any(weights < 0):
            raise UsageError("quadrature weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise UsageError(
                f"quadrature weights must sum to 1 within {WEIGHT_SUM_TOL:g}, "
                f"got {weights.sum()!r}"
            )
        if np.any(np.abs(nodes) > 1.0 + 1e-14):
            raise UsageError("quadrature nodes must lie in [-1,1]^d")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def node_count(self) -> int:
        return len(self.weights)

    def same_as(self, other: "Quadrature") -> bool:
        """True when both rules are interoperable (identical nodes/weights)."""
        if self is other:
            return True
        return (
            self.dim == other.dim
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def build_quadrature(d: int, points_per_axis: int) -> Quadrature:
    """Tensor-product Gauss-Legendre rule for the normalized measure.

    The per-axis rule with m points is exact for polynomials of degree
    2m-1; weights are rescaled by 2^-d so they sum to 1.

    Raises
    ------
    ResourceCapError
        If points_per_axis**d exceeds MAX_QUAD_NODES.
    """
    if d < 1:
        raise UsageError(f"dimension must be >= 1, got {d}")
    if points_per_axis < 1:
        raise UsageError(f"points_per_axis must be >= 1, got {points_per_axis}")
    total = points_per_axis**d
    if total > MAX_QUAD_NODES:
        raise ResourceCapError(
            f"{points_per_axis}^{d} = {total} nodes exceeds the cap of "
            f"{MAX_QUAD_NODES}"
        )
    x, w = np.polynomial.legendre.leggauss(points_per_axis)
    w = w / 2.0  # per-axis mass 1
    if d == 1:
        nodes = x.reshape(-1, 1)
        weights = w
    else:
        grids = np.meshgrid(*([x] * d), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*([w] * d), indexing="ij")
        weights = np.ones(total)
        for g in wgrids:
            weights = weights * g.ravel()
    return Quadrature(dim=d, nodes=nodes, weights=weights,
                      points_per_axis=points_per_axis)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real values on the nodes of a quadrature.

    The discrete stand-in for an element of the L^p space on [-1,1]^d.
    Instances are immutable; arithmetic returns new objects and requires
    both operands to share a quadrature.
    """

    values: np.ndarray
    quadrature: Quadrature

    def __post_init__(self):
        values = _frozen_array(self.values, ndim=1)
        if len(values) != self.quadrature.node_count:
            raise UsageError(
                f"{len(values)} values for a quadrature with "
                f"{self.quadrature.node_count} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("sampled values must all be finite")
        object.__setattr__(self, "values", values)

    def _check_compatible(self, other: "SampledFunction") -> None:
        if not self.quadrature.same_as(other.quadrature):
            raise UsageError("sampled functions live on different quadratures")

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_compatible(other)
        return SampledFunction(self.values + other.values, self.quadrature)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_compatible(other)
        return SampledFunction(self.values - other.values, self.quadrature)

    def __neg__(self) -> "SampledFunction":
        return SampledFunction(-self.values, self.quadrature)

    def __mul__(self, scalar: float) -> "SampledFunction":
        return SampledFunction(self.values * float(scalar), self.quadrature)

    __rmul__ = __mul__


def sample(quad: Quadrature, fn: Callable[[np.ndarray], np.ndarray]) -> SampledFunction:
    """Sample ``fn`` on the quadrature nodes.

    ``fn`` receives the full (N, d) node array and must return N values.
    """
    vals = np.asarray(fn(quad.nodes), dtype=float)
    vals = np.broadcast_to(vals, (quad.node_count,)).copy()
    return SampledFunction(vals, quad)


def constant(quad: Quadrature, value: float) -> SampledFunction:
    """The constant function on the given quadrature."""
    return SampledFunction(np.full(quad.node_count, float(value)), quad)


def lp_norm(f: SampledFunction, p) -> float:
    """Quadrature L^p norm (sum_i w_i |f_i|^p)^(1/p).

    Scaled by max|f| internally so |v|^p cannot overflow for large p.
    """
    p = as_pnorm(p)
    v = np.abs(f.values)
    m = v.max(initial=0.0)
    if m == 0.0:
        return 0.0
    return float(m * np.dot(f.quadrature.weights, (v / m) ** p.p) ** (1.0 / p.p))


def distance(f: SampledFunction, g: SampledFunction, p) -> float:
    """L^p distance between two functions on a shared quadrature."""
    return lp_norm(f - g, p)


def integrate_against(f: SampledFunction, rho: SampledFunction) -> float:
    """Quadrature value of the integral of f*rho against the measure."""
    f._check_compatible(rho)
    return float(np.dot(f.quadrature.weights, f.values * rho.values))


def integrate(f: SampledFunction) -> float:
    """Quadrature integral of f against the (normalized) measure."""
    return float(np.dot(f.quadrature.weights, f.values))
