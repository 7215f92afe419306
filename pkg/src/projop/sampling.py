"""Named target functions and seeded random band-limited samples.

The function tags keep CLI experiments declarative; the random samples
(combinations of low-degree basis polynomials with decaying coefficients)
stand in for draws from a compact family of smooth functions.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .function_space import Quadrature, SampledFunction, sample
from .ortho_poly import OrthoPolyBasis

# target/forcing tags; callables take the (N, d) node array
FUNCTION_TAGS = {
    "one": lambda x: np.ones(len(x)),
    "zero": lambda x: np.zeros(len(x)),
    "t": lambda x: x[:, 0],
    "cubic": lambda x: x[:, 0] ** 3,
    "exp": lambda x: np.exp(x[:, 0]),
    "sinpi": lambda x: np.sin(np.pi * x[:, 0]),
    "abs": lambda x: np.abs(x[:, 0]),
}


def sample_tag(quad: Quadrature, tag: str) -> SampledFunction:
    """Sample a named target function on the quadrature nodes."""
    if tag not in FUNCTION_TAGS:
        raise UsageError(
            f"unknown function tag '{tag}'; choose one of {sorted(FUNCTION_TAGS)}")
    return sample(quad, FUNCTION_TAGS[tag])


def random_function(basis: OrthoPolyBasis, rng: np.random.Generator,
                    scale: float = 1.0, decay: float = 2.0) -> SampledFunction:
    """Random combination of basis polynomials with decaying coefficients.

    Coefficient k is scale * N(0,1) / (1 + deg p_k)^decay, so samples are
    band-limited to the basis degree and dominated by low frequencies.
    """
    degrees = basis.multi_indices.sum(axis=1)
    c = scale * rng.standard_normal(basis.size) / (1.0 + degrees) ** decay
    return basis.reconstruct(c)


def random_family(basis: OrthoPolyBasis, rng: np.random.Generator, count: int,
                  scale: float = 1.0, decay: float = 2.0) -> list[SampledFunction]:
    """A list of independent random band-limited functions."""
    return [random_function(basis, rng, scale, decay) for _ in range(count)]
