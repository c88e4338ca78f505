"""Exception taxonomy for the wave/stability pipeline.

Everything numerical that can fail raises a subclass of :class:`PerwaveError`,
so callers (and the CLI) can distinguish "the input has no periodic orbit"
from "the numerics broke down".
"""


class PerwaveError(Exception):
    """Base class for all library-specific failures."""


class NotInOmega(PerwaveError):
    """The parameter triple (a, E, c) admits no periodic orbit."""


class NoWell(NotInOmega):
    """The effective potential has no local minimum in the search range."""


class DegenerateRoot(NotInOmega):
    """A turning point fails the simple-root certificate (equilibrium or
    homoclinic limit)."""


class IntegrationFailure(PerwaveError):
    """The ODE integrator failed to produce the requested orbit/period map."""


class PeriodMismatch(PerwaveError):
    """ODE return period and regularized quadrature period disagree."""


class QuadratureNonconvergence(PerwaveError):
    """Adaptive Gauss-Legendre doubling failed to reach tolerance."""


class MethodDisagreement(PerwaveError):
    """Grid quadrature and Abelian integral for the same functional differ
    beyond tolerance."""


class StencilLeftOmega(PerwaveError):
    """A finite-difference stencil point fell outside the admissible set."""


class NoiseFloor(PerwaveError):
    """An extrapolated estimate did not stabilize at the requested tolerance."""


class WindingMismatch(PerwaveError):
    """Argument-principle root count inside the contour is not the expected
    one after radius adjustment."""


class VerdictConflict(PerwaveError):
    """Index-based and Evans-based instability verdicts disagree."""


class ResidualTooLarge(PerwaveError):
    """A closed-form profile does not satisfy the traveling-wave relations;
    signals a convention mismatch rather than a numerical issue."""
