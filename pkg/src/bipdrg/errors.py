class BipDRGError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArray(BipDRGError, ValueError):
    pass


class RootSeparationFailure(BipDRGError, ArithmeticError):
    pass


class NonPositiveMultiplicity(BipDRGError, ValueError):
    pass


class ParityViolation(BipDRGError, ArithmeticError):
    pass


class InadmissibleTheta(BipDRGError, ValueError):
    pass


class OutOfRangeEta(BipDRGError, ValueError):
    pass


class CaseParameterMismatch(BipDRGError, ValueError):
    pass


class NotDistanceRegular(BipDRGError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ProjectorResidual(BipDRGError, ArithmeticError):
    pass


class LocalOrderingViolation(BipDRGError, ArithmeticError):
    pass


class DecompositionResidual(BipDRGError, ArithmeticError):
    pass


class BlueprintMismatch(BipDRGError, AssertionError):
    def __init__(self, clause, residual, message=""):
        super().__init__(f"{clause}: residual {residual:.3e} {message}".rstrip())
        self.clause = clause
        self.residual = residual


class AuditFailure(BipDRGError, AssertionError):
    def __init__(self, theorem, message=""):
        super().__init__(f"{theorem}: {message}")
        self.theorem = theorem


class NotBipartite(BipDRGError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
