"""Multivariate orthogonal polynomial bases and linear projections.

Two constructions are provided on [-1,1]^d with the normalized measure:

* ``tensor_legendre`` -- products of one-dimensional Legendre polynomials
  with total degree at most D, normalized so the Gram values L(p_k^2) are
  1 for the unit weight;
* ``gram_schmidt`` -- graded monomials orthogonalized against the
  quasi-inner product L(fg) = integral of f*g*rho, for an arbitrary
  (possibly sign-changing) weight rho.

Both store every polynomial twice: as a monomial-coefficient row (the
source of truth for degrees and export) and as samples on a reference
quadrature (used for every integral).  Basis order is graded
lexicographic on the exponent tuples, which fixes coefficient vectors
reproducibly.

The projection onto the first n+1 basis elements is

    P_n(f) = sum_{k<=n} L(f p_k) p_k / L(p_k^2),

and ``uniform_bound`` evaluates the operator-norm diagnostic

    B_n = ||rho||_q * sum_{k<=n} ||p_k||_inf ||p_k||_p / |L(p_k^2)|,

with the sup-norm taken over a fixed dense grid of SUP_GRID_POINTS
points per axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegeneracyError, UsageError
from .function_space import (
    PNorm,
    Quadrature,
    SampledFunction,
    as_pnorm,
    constant,
    integrate_against,
    lp_norm,
)

# Dense evaluation grid for sup-norm estimates: equispaced points per
# axis, endpoints included.  Part of the artifact contract for B_n.
SUP_GRID_POINTS = 64

# Relative definiteness threshold for the quasi-inner product.
DEGENERACY_RTOL = 1e-10

BASIS_EXPORT_HEADER = "# projop basis export v1"


@dataclass(frozen=True, eq=False)
class WeightFunctional:
    """A weight rho with its integration functional L(f) = int f rho.

    The conjugate-norm bound ||rho||_q (which equals the functional norm
    on L^p) is computed at construction and kept as ``norm_bound``.
    """

    rho: SampledFunction
    p: PNorm
    norm_bound: float = field(init=False)

    def __post_init__(self):
        p = as_pnorm(self.p)
        object.__setattr__(self, "p", p)
        bound = lp_norm(self.rho, PNorm(p.q))
        if not np.isfinite(bound):
            raise UsageError("weight has non-finite conjugate norm")
        object.__setattr__(self, "norm_bound", float(bound))

    @property
    def q(self) -> float:
        return self.p.q

    def __call__(self, f: SampledFunction) -> float:
        return functional_eval(self, f)


def unit_weight(quad: Quadrature, p=2.0) -> WeightFunctional:
    """The functional with rho identically 1 (plain integration)."""
    return WeightFunctional(constant(quad, 1.0), as_pnorm(p))


def functional_eval(F: WeightFunctional, f: SampledFunction) -> float:
    """L(f) = quadrature integral of f * rho."""
    return integrate_against(f, F.rho)


def monomial_indices(d: int, max_total_degree: int) -> np.ndarray:
    """Exponent tuples with total degree <= max_total_degree, graded lex.

    Sorted by total degree first, then lexicographically on the tuple.
    Returns an (M, d) integer array.
    """
    if d < 1:
        raise UsageError(f"dimension must be >= 1, got {d}")
    if max_total_degree < 0:
        raise UsageError(f"degree must be >= 0, got {max_total_degree}")

    def extend(prefix, remaining_axes):
        if remaining_axes == 0:
            yield prefix
            return
        budget = max_total_degree - sum(prefix)
        for e in range(budget + 1):
            yield from extend(prefix + (e,), remaining_axes - 1)

    idx = sorted(extend((), d), key=lambda a: (sum(a), a))
    return np.array(idx, dtype=int)


def monomial_values(indices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate every monomial x^alpha at every point; (Q, M) array."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    Q, d = points.shape
    M = len(indices)
    out = np.ones((Q, M))
    for j in range(d):
        maxdeg = int(indices[:, j].max(initial=0))
        # powers[e] = x_j^e for all points, computed once per axis
        powers = np.ones((maxdeg + 1, Q))
        for e in range(1, maxdeg + 1):
            powers[e] = powers[e - 1] * points[:, j]
        out *= powers[indices[:, j]].T
    return out


@dataclass(frozen=True, eq=False)
class OrthoPolyBasis:
    """Ordered orthogonal polynomials with their Gram values.

    Attributes
    ----------
    dim : int
    max_total_degree : int
    multi_indices : ndarray, shape (M, d)
        Graded-lex exponent tuples; row k is the leading monomial of p_k.
    coefficients : ndarray, shape (M, M)
        Monomial coefficients; row k expands p_k over ``multi_indices``.
    values : ndarray, shape (M, N)
        Samples of each p_k on the reference quadrature nodes.
    functional : WeightFunctional
        The quasi-inner product the family is orthogonal against.
    gram : ndarray, shape (M,)
        The values L(p_k^2); all nonzero.
    quadrature : Quadrature
        Reference quadrature carrying every integral.
    """

    dim: int
    max_total_degree: int
    multi_indices: np.ndarray
    coefficients: np.ndarray
    values: np.ndarray
    functional: WeightFunctional
    gram: np.ndarray
    quadrature: Quadrature

    @property
    def size(self) -> int:
        return len(self.gram)

    def degree_of(self, k: int) -> int:
        return int(self.multi_indices[k].sum())

    def member(self, k: int) -> SampledFunction:
        """p_k as a sampled function on the reference quadrature."""
        return SampledFunction(self.values[k].copy(), self.quadrature)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values of every basis polynomial at arbitrary points; (Q, M)."""
        return monomial_values(self.multi_indices, points) @ self.coefficients.T

    def reconstruct(self, coeffs: np.ndarray) -> SampledFunction:
        """The combination sum_k c_k p_k as a sampled function."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or len(coeffs) > self.size:
            raise UsageError(
                f"coefficient vector of length {coeffs.shape} does not fit "
                f"a basis of size {self.size}"
            )
        return SampledFunction(self.values[: len(coeffs)].T @ coeffs,
                               self.quadrature)


def _require_exactness(quad: Quadrature, needed_degree: int) -> None:
    """Check the tensor rule integrates per-axis degree ``needed_degree``."""
    if quad.points_per_axis is None:
        raise UsageError(
            "basis construction needs a tensor Gauss-Legendre quadrature "
            "with a known points_per_axis"
        )
    required = needed_degree // 2 + 1  # m points exact to degree 2m-1
    if quad.points_per_axis < required:
        raise UsageError(
            f"quadrature with {quad.points_per_axis} points per axis is not "
            f"exact to degree {needed_degree}; use points_per_axis >= {required}"
        )


def tensor_legendre(d: int, max_total_degree: int, quad: Quadrature,
                    p=2.0) -> OrthoPolyBasis:
    """Orthonormal tensor-Legendre basis of total degree <= max_total_degree.

    Each factor is the one-dimensional Legendre polynomial scaled by
    sqrt(2k+1), which has unit second moment against the normalized
    measure, so L(p_k^2) = 1 for every product.

    The quadrature must integrate per-axis degree 2*max_total_degree
    exactly; otherwise a UsageError names the required points_per_axis.
    """
    if quad.dim != d:
        raise UsageError(f"quadrature dimension {quad.dim} != requested {d}")
    _require_exactness(quad, 2 * max_total_degree)

    idx = monomial_indices(d, max_total_degree)
    M = len(idx)
    # 1-d normalized Legendre coefficient rows, ascending powers
    deg1 = max_total_degree
    leg1d = np.zeros((deg1 + 1, deg1 + 1))
    for k in range(deg1 + 1):
        c = np.polynomial.legendre.leg2poly([0.0] * k + [1.0])
        leg1d[k, : k + 1] = np.sqrt(2 * k + 1) * c

    coeffs = np.zeros((M, M))
    for row, alpha in enumerate(idx):
        for col, beta in enumerate(idx):
            if np.any(beta > alpha):
                continue
            prod = 1.0
            for j in range(d):
                prod *= leg1d[alpha[j], beta[j]]
            coeffs[row, col] = prod

    values = monomial_values(idx, quad.nodes) @ coeffs.T  # (N, M)
    values = values.T
    functional = unit_weight(quad, p)
    wr = quad.weights * functional.rho.values
    gram = values**2 @ wr
    return OrthoPolyBasis(
        dim=d,
        max_total_degree=max_total_degree,
        multi_indices=idx,
        coefficients=coeffs,
        values=values,
        functional=functional,
        gram=gram,
        quadrature=quad,
    )


def gram_schmidt(d: int, max_total_degree: int, functional: WeightFunctional,
                 quad: Quadrature, rho_degree: int = 0) -> OrthoPolyBasis:
    """Orthogonalize graded monomials against L(fg) = int f g rho.

    The weight may change sign; the bilinear form is then only a
    quasi-inner product and the Gram values L(p_k^2) may be negative.
    Each polynomial is scaled by |L(p_k^2)|^(-1/2), so the stored Gram
    values are +-1 up to rounding.  A direction on which the form loses
    definiteness (|L(r^2)| below DEGENERACY_RTOL relative to both the
    raw monomial's value and the Hoelder scale ||r||_2^2 ||rho||_q)
    raises DegeneracyError: no orthogonal basis exists at this degree
    for this weight.

    ``rho_degree`` is the caller's bound on the polynomial degree of the
    sampled weight, added to the exactness requirement.
    """
    if quad.dim != d:
        raise UsageError(f"quadrature dimension {quad.dim} != requested {d}")
    if not quad.same_as(functional.rho.quadrature):
        raise UsageError("weight is sampled on a different quadrature")
    _require_exactness(quad, 2 * max_total_degree + rho_degree)

    idx = monomial_indices(d, max_total_degree)
    M = len(idx)
    mono = monomial_values(idx, quad.nodes)  # (N, M)
    wr = quad.weights * functional.rho.values

    def form(u, v):
        return float(np.dot(u * wr, v))

    coeffs = np.zeros((M, M))
    values = np.zeros((M, quad.node_count))
    gram = np.zeros(M)
    for k in range(M):
        c = np.zeros(M)
        c[k] = 1.0
        v = mono[:, k].copy()
        raw = form(v, v)
        # two passes of modified Gram-Schmidt for numerical safety
        for _ in range(2):
            for j in range(k):
                r = form(v, values[j]) / gram[j]
                v -= r * values[j]
                c -= r * coeffs[j]
        g = form(v, v)
        scale = float(np.dot(quad.weights, v * v)) * functional.norm_bound
        if abs(g) < DEGENERACY_RTOL * max(abs(raw), scale):
            raise DegeneracyError(
                f"quasi-inner product is degenerate on basis direction {k} "
                f"(multi-index {tuple(idx[k])}): |L(r^2)| = {abs(g):.3e}; "
                "re-train the weight or reduce the degree"
            )
        s = 1.0 / np.sqrt(abs(g))
        v *= s
        c *= s
        values[k] = v
        coeffs[k] = c
        gram[k] = form(v, v)

    return OrthoPolyBasis(
        dim=d,
        max_total_degree=max_total_degree,
        multi_indices=idx,
        coefficients=coeffs,
        values=values,
        functional=functional,
        gram=gram,
        quadrature=quad,
    )


def project(basis: OrthoPolyBasis, n: int,
            f: SampledFunction) -> tuple[np.ndarray, SampledFunction]:
    """Coefficients and reconstruction of P_n(f) = sum L(f p_k) p_k / L(p_k^2).

    Returns the coefficient vector (c_0 .. c_n) and the reconstructed
    function on the reference quadrature.
    """
    if not 0 <= n < basis.size:
        raise UsageError(f"truncation n = {n} outside basis of size {basis.size}")
    if not basis.quadrature.same_as(f.quadrature):
        raise UsageError("function is sampled on a different quadrature "
                         "than the basis")
    wr = basis.quadrature.weights * basis.functional.rho.values
    c = (basis.values[: n + 1] * wr) @ f.values / basis.gram[: n + 1]
    return c, basis.reconstruct(c)


def _sup_grid(d: int) -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, SUP_GRID_POINTS)
    if d == 1:
        return axis.reshape(-1, 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def uniform_bound(basis: OrthoPolyBasis, n: int) -> float:
    """Projection-norm diagnostic B_n.

    B_n = ||rho||_q * sum_{k<=n} ||p_k||_inf ||p_k||_p / |L(p_k^2)|, with
    the sup-norm taken over the dense grid of SUP_GRID_POINTS points per
    axis (endpoints included).  Nondecreasing in n; for every f,
    ||P_n f||_p <= B_n ||f||_p.
    """
    if not 0 <= n < basis.size:
        raise UsageError(f"truncation n = {n} outside basis of size {basis.size}")
    grid = _sup_grid(basis.dim)
    total = 0.0
    chunk = 65536
    sup = np.zeros(n + 1)
    for start in range(0, len(grid), chunk):
        block = np.abs(
            monomial_values(basis.multi_indices, grid[start:start + chunk])
            @ basis.coefficients[: n + 1].T
        )
        sup = np.maximum(sup, block.max(axis=0))
    p = basis.functional.p
    for k in range(n + 1):
        pnorm = lp_norm(basis.member(k), p)
        total += sup[k] * pnorm / abs(basis.gram[k])
    return basis.functional.norm_bound * total


def export_basis(basis: OrthoPolyBasis, path) -> None:
    """Write the plain-text basis table.

    One line per polynomial: index, multi-index, L(p_k^2), then the
    monomial coefficients in graded-lex order, 17 significant digits.
    """
    lines = [
        BASIS_EXPORT_HEADER,
        f"dimension = {basis.dim}",
        f"max_total_degree = {basis.max_total_degree}",
        f"points_per_axis = {basis.quadrature.points_per_axis}",
        f"size = {basis.size}",
        "# k | multi-index | L(p_k^2) | monomial coefficients (graded lex)",
    ]
    for k in range(basis.size):
        alpha = ",".join(str(int(e)) for e in basis.multi_indices[k])
        coeffs = " ".join(f"{c:.17g}" for c in basis.coefficients[k])
        lines.append(f"{k} | {alpha} | {basis.gram[k]:.17g} | {coeffs}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_basis_table(path) -> dict:
    """Parse a basis export into a plain dict (for inspection tools)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != BASIS_EXPORT_HEADER:
        raise UsageError(f"{path} is not a projop basis export")
    meta = {}
    rows = []
    for line in lines[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and "|" not in line:
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
            continue
        k_str, alpha_str, gram_str, coeff_str = (s.strip() for s in line.split("|"))
        rows.append(
            {
                "k": int(k_str),
                "multi_index": tuple(int(e) for e in alpha_str.split(",")),
                "gram": float(gram_str),
                "coefficients": np.array([float(c) for c in coeff_str.split()]),
            }
        )
    for key in ("dimension", "max_total_degree", "size"):
        if key not in meta:
            raise UsageError(f"basis export is missing '{key}'")
    return {
        "dimension": int(meta["dimension"]),
        "max_total_degree": int(meta["max_total_degree"]),
        "points_per_axis": int(meta["points_per_axis"]),
        "size": int(meta["size"]),
        "rows": rows,
    }
