"""Exception hierarchy."""


class MimoStabError(Exception):
    """Base class for all analysis errors."""


class ZeroPolynomial(MimoStabError, ValueError):
    pass


class DivisionByZeroFunction(MimoStabError, ZeroDivisionError):
    pass


class PoleEvaluation(MimoStabError, ValueError):
    """Evaluation requested at (or too close to) a pole."""

    def __init__(self, message, index=None, s=None):
        super().__init__(message)
        self.index = index
        self.s = s


class NotSquare(MimoStabError, ValueError):
    pass


class DimensionMismatch(MimoStabError, ValueError):
    pass


class SingularMatrix(MimoStabError, ValueError):
    pass


class SingularLoop(MimoStabError, ValueError):
    """``det(I + PU)`` vanishes identically: the loop is ill-posed."""


class ZeroMatrix(MimoStabError, ValueError):
    pass


class EigenSolveFailure(MimoStabError, RuntimeError):
    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class ClosureFailure(MimoStabError, RuntimeError):
    pass


class PointOnCurve(MimoStabError, ValueError):
    """The encircled point lies on (or too near) the curve."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class CurvePassesThroughOrigin(PointOnCurve):
    pass


class NominalUnstable(MimoStabError, ValueError):
    pass


class UnstableOperand(MimoStabError, ValueError):
    pass


class RepeatedAxisPole(MimoStabError, ValueError):
    pass


class ImproperSystem(MimoStabError, ValueError):
    pass


class ParseError(MimoStabError, ValueError):
    pass


class ValidationError(MimoStabError, ValueError):
    pass
