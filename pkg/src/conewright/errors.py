"""Exception types shared across the package."""


class ConewrightError(Exception):
    """Base class for all package errors."""


class ParseError(ConewrightError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class EvaluationError(ConewrightError):
    """Raised when an expression cannot be evaluated at the given points."""


class DomainViolation(EvaluationError):
    """Division by zero, sqrt of a negative, or pow of a negative base
    with a non-integer exponent."""

    def __init__(self, op, detail=""):
        self.op = op
        msg = f"domain violation in '{op}'"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonsmoothPrimitive(ConewrightError):
    """Symbolic differentiation hit abs/min/max/piecewise/sabs_pow/spow."""

    def __init__(self, op):
        self.op = op
        super().__init__(f"cannot differentiate through nonsmooth primitive '{op}'")


class DifferentiationError(ConewrightError):
    """Differentiation is not supported for this node (e.g. non-constant exponent)."""


class ZeroVector(ConewrightError):
    pass


class NonOrthonormalBasis(ConewrightError):
    pass


class EmptyCone(ConewrightError):
    """No secant directions exist (the base point is isolated in the domain)."""


class UnstableEstimate(ConewrightError):
    """A multi-scale estimate did not stabilize across the finest levels."""


class NotLipschitz(ConewrightError):
    """The Lipschitz sanity gate failed; Clarke-side operations refuse to run."""

    def __init__(self, message, coarse=None, fine=None):
        self.coarse = coarse
        self.fine = fine
        super().__init__(message)


class BoundaryHypothesisFailed(ConewrightError):
    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"boundary values are not affine: residual {residual:.6g} > tol {tol:.6g}"
        )


class NoCertificate(ConewrightError):
    """No interior point certified within tolerance; carries the best attempt."""

    def __init__(self, certificate):
        self.certificate = certificate
        super().__init__(
            f"no certificate found: best residual {certificate.residual:.6g}"
        )


class NormalMembershipFailed(ConewrightError):
    def __init__(self, violation, direction):
        self.violation = violation
        self.direction = direction
        super().__init__(
            f"normal-cone membership failed: worst angle {violation:.6g} "
            f"against tangent direction {direction}"
        )


class SpecError(ConewrightError):
    """An analysis spec file violates the published schema."""


class PlotError(ConewrightError):
    pass
