"""Separated epsilon-nets and the nonlinear projection they induce.

Given centers x_1..x_n covering a compact family of functions by
epsilon-balls, the projection sends a covered point x to the convex
combination

    P(x) = sum_i mu_i(x) x_i / sum_j mu_j(x),

with hat coefficients mu_i(x) = max(eps - ||x - x_i||, 0).  Whenever x is
within eps of at least one center, ||x - P(x)|| < eps.  With centers that
are pairwise at least eps apart, the centers themselves are fixed points
of P.

The net construction is greedy and deterministic: members are scanned in
input order and a member becomes a center exactly when it is at distance
>= eps from every existing center, starting from the first member.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError, UsageError
from .function_space import PNorm, SampledFunction, as_pnorm, distance

SEPARATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CompactSampleSet:
    """A finite sample of a compact set: functions on one quadrature."""

    members: tuple[SampledFunction, ...]
    p: PNorm

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise UsageError("a compact sample set needs at least one member")
        quad = members[0].quadrature
        for m in members[1:]:
            if not quad.same_as(m.quadrature):
                raise UsageError("all members must share one quadrature")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "p", as_pnorm(self.p))


@dataclass(frozen=True, eq=False)
class LerayProjector:
    """Centers, radius, and norm of a nonlinear net projection.

    ``separated`` records whether the centers were built as a separated
    net (pairwise distances >= epsilon); arbitrary center sets are
    accepted with ``separated=False``, losing the fixed-point property.
    """

    centers: tuple[SampledFunction, ...]
    epsilon: float
    p: PNorm
    separated: bool = field(default=True)

    def __post_init__(self):
        centers = tuple(self.centers)
        if not centers:
            raise UsageError("a projector needs at least one center")
        if not self.epsilon > 0:
            raise UsageError(f"epsilon must be positive, got {self.epsilon!r}")
        quad = centers[0].quadrature
        for c in centers[1:]:
            if not quad.same_as(c.quadrature):
                raise UsageError("all centers must share one quadrature")
        p = as_pnorm(self.p)
        if self.separated:
            for i in range(len(centers)):
                for j in range(i + 1, len(centers)):
                    d = distance(centers[i], centers[j], p)
                    if d < self.epsilon - SEPARATION_TOL:
                        raise UsageError(
                            f"centers {i} and {j} are at distance {d:.6g} "
                            f"< epsilon = {self.epsilon:.6g}; pass "
                            "separated=False to accept an unseparated set"
                        )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def quadrature(self):
        return self.centers[0].quadrature


def greedy_net(K: CompactSampleSet, epsilon: float) -> LerayProjector:
    """Greedy separated epsilon-net over the members of K.

    The first member is always a center; every later member joins the
    net when its distance to every existing center is >= epsilon.  On
    return every member of K is within epsilon of some center and the
    centers are pairwise >= epsilon apart.  Terminates after at most
    |K| steps.
    """
    if not epsilon > 0:
        raise UsageError(f"epsilon must be positive, got {epsilon!r}")
    centers = [K.members[0]]
    for x in K.members[1:]:
        if all(distance(x, c, K.p) >= epsilon for c in centers):
            centers.append(x)
    return LerayProjector(tuple(centers), float(epsilon), K.p, separated=True)


def hat_coefficients(P: LerayProjector, x: SampledFunction) -> np.ndarray:
    """Hat values mu_i(x) = max(epsilon - ||x - x_i||, 0), in center order."""
    if not P.quadrature.same_as(x.quadrature):
        raise UsageError("x lives on a different quadrature than the centers")
    return np.array(
        [max(P.epsilon - distance(x, c, P.p), 0.0) for c in P.centers]
    )


def ls_coordinates(P: LerayProjector, x: SampledFunction) -> np.ndarray:
    """Barycentric coordinates of x in the center frame.

    Nonnegative, summing to 1.  Raises CoverageError when x is at
    distance >= epsilon from every center.
    """
    mu = hat_coefficients(P, x)
    total = mu.sum()
    if total <= 0.0:
        raise CoverageError(
            f"x is not within epsilon = {P.epsilon:.6g} of the net; rebuild "
            "with a larger epsilon or a denser net"
        )
    return mu / total


def ls_project(P: LerayProjector, x: SampledFunction) -> SampledFunction:
    """Project x onto the convex hull of the nearby centers.

    Returns sum_i mu_i(x) x_i / sum_j mu_j(x).  For covered x the result
    satisfies ||x - P(x)|| < epsilon; uncovered x raises CoverageError.
    """
    coords = ls_coordinates(P, x)
    values = np.zeros(P.quadrature.node_count)
    for t, c in zip(coords, P.centers):
        if t != 0.0:
            values += t * c.values
    return SampledFunction(values, P.quadrature)
