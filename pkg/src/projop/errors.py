"""Exception hierarchy shared by all projop modules.

Every error raised by the library derives from :class:`ProjopError` so that
callers (notably the CLI) can map failures onto exit codes: configuration
problems, numerical failures, and resource-cap violations are distinct
categories.
"""


class ProjopError(Exception):
    """Base class for all projop errors."""


class UsageError(ProjopError):
    """A call violated an interface contract (mismatched quadratures,
    out-of-range indices, incompatible sizes)."""


class DomainError(ProjopError):
    """Values outside the numerical domain, e.g. NaN or infinity."""


class ResourceCapError(ProjopError):
    """A documented resource cap would be exceeded."""


class CoverageError(ProjopError):
    """A point lies outside the covered region of a projector net.

    Raised when the hat coefficients all vanish; the caller must rebuild
    the net with a larger radius or more centers.
    """


class DegeneracyError(ProjopError):
    """The quasi-inner product failed definiteness on some direction, so
    no orthogonal basis exists at the requested degree for this weight."""


class SingularEquationError(ProjopError):
    """A resonant parameter makes the integral equation singular."""


class SingularJacobianError(ProjopError):
    """The Jacobian of the residual is numerically singular."""


class DivergenceError(ProjopError):
    """An iteration produced non-finite values or exploding loss."""


class ConfigError(ProjopError):
    """Experiment configuration is invalid.

    Carries the full list of problems, not just the first one found.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))
