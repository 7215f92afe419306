"""Concrete operators on sampled functions, with analytic oracles.

These serve as ground truth for learning and fixed-point experiments:

* Fredholm integral operators (Tf)(t) = lambda * int k(t,s) f(s) dmu(s),
  realized by the quadrature sum over the nodes;
* Nemytskii composition operators (Tf)(t) = g(t, f(t));
* Hammerstein compositions of the two.

For a rank-1 kernel k(t,s) = a(t) b(s) the second-kind equation
x = T(x) + f has the closed form x = f + lambda*c*a with
c = int(b f) / (1 - lambda int(a b)); computed with the same quadrature,
the discrete equation is satisfied to machine precision.

Kernels and pointwise nonlinearities are registered by tag so that CLI
experiments stay declarative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SingularEquationError, UsageError
from .function_space import Quadrature, SampledFunction, integrate_against, sample

RESONANCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OperatorHandle:
    """A deterministic operator on sampled functions, tagged for configs."""

    tag: str
    params: tuple
    fn: Callable[[SampledFunction], SampledFunction]

    def __call__(self, f: SampledFunction) -> SampledFunction:
        return self.fn(f)


def fredholm_apply(kernel, lam: float, f: SampledFunction) -> SampledFunction:
    """(Tf)(t_i) = lam * sum_s w_s k(t_i, xi_s) f(xi_s).

    ``kernel`` maps node arrays (N, d), (M, d) to an (N, M) matrix.
    """
    quad = f.quadrature
    K = np.asarray(kernel(quad.nodes, quad.nodes), dtype=float)
    if K.shape != (quad.node_count, quad.node_count):
        raise UsageError(
            f"kernel returned shape {K.shape}, expected "
            f"({quad.node_count}, {quad.node_count})"
        )
    values = float(lam) * (K @ (quad.weights * f.values))
    return SampledFunction(values, quad)


def nemytskii_apply(g, f: SampledFunction) -> SampledFunction:
    """Pointwise composition (Tf)(xi) = g(xi, f(xi)) at the nodes."""
    values = np.asarray(g(f.quadrature.nodes, f.values), dtype=float)
    values = np.broadcast_to(values, f.values.shape).copy()
    if not np.all(np.isfinite(values)):
        raise DomainError("nonlinearity produced non-finite values")
    return SampledFunction(values, f.quadrature)


def hammerstein_apply(kernel, g, lam: float,
                      f: SampledFunction) -> SampledFunction:
    """Fredholm operator applied to the Nemytskii image of f."""
    return fredholm_apply(kernel, lam, nemytskii_apply(g, f))


def separable_fredholm_solution(a: SampledFunction, b: SampledFunction,
                                lam: float,
                                f: SampledFunction) -> SampledFunction:
    """Closed-form solution of x = lam * int a(t)b(s) x(s) ds + f(t).

    x = f + lam*c*a with c = int(b f) / (1 - lam int(a b)).  All integrals
    use the shared quadrature, so the returned x satisfies the discrete
    equation to roundoff.  A resonant lam (denominator below
    RESONANCE_TOL in magnitude) raises SingularEquationError.
    """
    ab = integrate_against(a, b)
    denom = 1.0 - float(lam) * ab
    if abs(denom) < RESONANCE_TOL:
        raise SingularEquationError(
            f"lambda = {lam!r} is resonant for this kernel "
            f"(1 - lambda*int(ab) = {denom:.3e})"
        )
    c = integrate_against(b, f) / denom
    return f + (float(lam) * c) * a


# --- tag registries -------------------------------------------------------

def _k_product(t, s):
    return np.outer(t[:, 0], s[:, 0])


def _k_one(t, s):
    return np.ones((len(t), len(s)))


def _k_exp_product(t, s):
    return np.exp(np.outer(t[:, 0], s[:, 0]))


# kernel tag -> matrix evaluator on node arrays
KERNELS: dict[str, Callable] = {
    "ts": _k_product,
    "one": _k_one,
    "exp-ts": _k_exp_product,
}

# separable kernels: tag -> (a(t) values, b(s) values) factor callables
SEPARABLE_KERNELS: dict[str, tuple[Callable, Callable]] = {
    "ts": (lambda x: x[:, 0], lambda x: x[:, 0]),
    "one": (lambda x: np.ones(len(x)), lambda x: np.ones(len(x))),
}

# nonlinearity tag -> g(nodes, u)
NONLINEARITIES: dict[str, Callable] = {
    "identity": lambda t, u: u,
    "square": lambda t, u: u**2,
    "cube": lambda t, u: u**3,
    "sin": lambda t, u: np.sin(u),
}


def separable_parts(kernel_tag: str,
                    quad: Quadrature) -> tuple[SampledFunction, SampledFunction]:
    """Sampled rank-1 factors (a, b) of a separable kernel tag."""
    if kernel_tag not in SEPARABLE_KERNELS:
        raise UsageError(
            f"kernel '{kernel_tag}' is not separable; "
            f"choose one of {sorted(SEPARABLE_KERNELS)}"
        )
    a_fn, b_fn = SEPARABLE_KERNELS[kernel_tag]
    return sample(quad, a_fn), sample(quad, b_fn)


def make_operator(tag: str, kernel: str | None = None, lam: float = 1.0,
                  nonlinearity: str | None = None) -> OperatorHandle:
    """Build a registered operator from tags.

    Tags: ``identity``, ``zero``, ``fredholm-separable``,
    ``fredholm-smooth``, ``nemytskii``, ``hammerstein``.
    """
    def kernel_fn():
        if kernel not in KERNELS:
            raise UsageError(
                f"unknown kernel '{kernel}'; choose one of {sorted(KERNELS)}")
        return KERNELS[kernel]

    def nonlin_fn():
        if nonlinearity not in NONLINEARITIES:
            raise UsageError(
                f"unknown nonlinearity '{nonlinearity}'; choose one of "
                f"{sorted(NONLINEARITIES)}")
        return NONLINEARITIES[nonlinearity]

    if tag == "identity":
        return OperatorHandle(tag, (), lambda f: f)
    if tag == "zero":
        return OperatorHandle(tag, (), lambda f: 0.0 * f)
    if tag == "fredholm-separable":
        if kernel not in SEPARABLE_KERNELS:
            raise UsageError(
                f"kernel '{kernel}' is not separable; "
                f"choose one of {sorted(SEPARABLE_KERNELS)}")
        k = kernel_fn()
        return OperatorHandle(tag, (kernel, lam),
                              lambda f: fredholm_apply(k, lam, f))
    if tag == "fredholm-smooth":
        k = kernel_fn()
        return OperatorHandle(tag, (kernel, lam),
                              lambda f: fredholm_apply(k, lam, f))
    if tag == "nemytskii":
        g = nonlin_fn()
        return OperatorHandle(tag, (nonlinearity,),
                              lambda f: nemytskii_apply(g, f))
    if tag == "hammerstein":
        k = kernel_fn()
        g = nonlin_fn()
        return OperatorHandle(tag, (kernel, nonlinearity, lam),
                              lambda f: hammerstein_apply(k, g, lam, f))
    raise UsageError(f"unknown operator tag '{tag}'")
