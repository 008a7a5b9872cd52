"""Exception hierarchy shared by every twistlab module."""


class TwistlabError(Exception):
    """Base class for all errors raised by twistlab."""


class ExpressionSyntaxError(TwistlabError):
    """Malformed expression source. ``offset`` is a byte offset into the UTF-8 source."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class BindingError(TwistlabError):
    """An identifier is neither the parameter, a bound constant, nor a known function."""


class DomainError(TwistlabError, ValueError):
    """Evaluation left the domain of a sub-expression (ln of a negative, division by zero, ...)."""


class DegenerateFrame(TwistlabError):
    """The Frenet frame is undefined: zero speed or vanishing curvature.

    ``tangent`` carries the unit tangent when only the normals are undefined.
    """

    def __init__(self, message, tangent=None):
        super().__init__(message)
        self.tangent = tangent


class RangeError(TwistlabError, ValueError):
    """Requested arc length or parameter lies outside the curve's domain."""


class NonOrthonormalInitialFrame(TwistlabError, ValueError):
    pass


class InsufficientSamples(TwistlabError, ValueError):
    pass


class NotTConstant(TwistlabError):
    """The tangential component of the position vector does not have constant length."""


class ParamError(TwistlabError, ValueError):
    """A gallery or audit parameter violates its constraint."""
