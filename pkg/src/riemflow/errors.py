"""Exception types shared across the library."""


class RiemflowError(Exception):
    """Base class for all library-specific errors."""


class NotPositiveDefinite(RiemflowError):
    """A metric sample failed the positive-definiteness check."""

    def __init__(self, sample_index, min_eigenvalue):
        self.sample_index = sample_index
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"metric is not positive definite at sample {sample_index} "
            f"(smallest eigenvalue {min_eigenvalue:.6e})"
        )


class StencilOutOfDomain(RiemflowError):
    """An analytic chart stencil point fell outside the metric's domain."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"metric sampler returned non-finite values near {point}")


class DimensionTooSmall(RiemflowError):
    """The requested operation needs a higher chart dimension."""


class NonpositiveLame(RiemflowError):
    """A Lame coefficient was non-positive at some sample."""


class NotInImage(RiemflowError):
    """A fourth-order tensor is not the pair product of any SPD metric."""

    def __init__(self, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"recovery residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


class StepRejected(RiemflowError):
    """Time step kept failing the positivity guard after the halving cap."""


class CollapseDetected(RiemflowError):
    """Raised only when a caller asks for strict handling of a collapsed state."""


class EmptyTrajectory(RiemflowError):
    """A trajectory-consuming check received no samples."""


class NoSingularity(RiemflowError):
    """Blow-up monitoring was asked for on a trajectory that ended smoothly."""


class PerturbationTooLarge(RiemflowError):
    """Directional differentiation could not keep the perturbed metric SPD."""


class PositivityLost(RiemflowError):
    """The conformal wave amplitude dropped below the positivity floor."""

    def __init__(self, t, x_index, value):
        self.t = t
        self.x_index = x_index
        self.value = value
        super().__init__(
            f"conformal factor lost positivity at t={t:.6g}, grid index {x_index} "
            f"(value {value:.3e})"
        )


class CFLViolated(RiemflowError):
    """Requested time step violates the CFL bound of the 1+1 wave scheme."""


class DegenerateCoefficients(RiemflowError):
    """The general evolution family needs a nonzero leading coefficient."""


class ParseError(RiemflowError):
    """Scenario configuration file could not be parsed."""


class SchemaError(RiemflowError):
    """Scenario configuration violated the documented schema."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message if key is None else f"{message} (key: {key!r})")


class UnknownFamily(RiemflowError):
    """Requested metric family name is not registered."""
