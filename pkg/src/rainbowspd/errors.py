"""Exception types shared across the package."""


class RainbowError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(RainbowError):
    """Inputs disagree on the number of assets."""


class NotAbsolutelyContinuous(RainbowError):
    """The law has no density with respect to Lebesgue measure."""


class UndefinedOnDiagonal(RainbowError):
    """Directional payoff derivative requested where a coordinate sits on its strike."""


class UndefinedOnLevelSet(RainbowError):
    """Outer-strike payoff derivative requested on the payoff level set."""


class QuadratureUnavailable(RainbowError):
    """Deterministic quadrature cannot be applied to this law."""


class MonteCarloUnsupported(RainbowError):
    """Requested derivative order is unsupported on Monte Carlo prices."""


class StencilOutOfDomain(RainbowError):
    """A finite-difference stencil node falls outside the admissible domain."""


class NonFiniteEvaluation(RainbowError):
    """A function evaluation returned NaN or infinity."""


class NoStabilization(RainbowError):
    """One-sided difference quotients failed to settle within tolerance."""


class DimensionNotTwo(RainbowError):
    """The two-asset alternative recovery formula requires n = 2."""


class ConfigError(RainbowError):
    """A configuration document failed validation.

    `field` names the offending entry so the CLI can point at it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
