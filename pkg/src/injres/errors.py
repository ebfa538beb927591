class InjresError(Exception):
    """Base class for every error raised by the engine."""


class PrimeMismatchError(InjresError, ValueError):
    pass


class BaseRingMismatchError(InjresError, ValueError):
    pass


class UnsupportedDifferentialError(InjresError, ValueError):
    pass


class TrustWindowError(InjresError, ValueError):
    pass


class ShapeError(InjresError, TypeError):
    pass


class IncompatibleShapesError(InjresError, ValueError):
    pass


class OracleSizeError(InjresError, ValueError):
    pass


class ModuleAxiomError(InjresError, ValueError):
    pass


class ConfigError(InjresError, ValueError):
    pass


class VerdictDisagreementError(InjresError, AssertionError):
    pass
