class PolyddrError(Exception):
    pass


class ClockwiseLoopError(PolyddrError):
    pass


class DegenerateCellError(PolyddrError):
    pass


class DenseLimitError(PolyddrError):
    pass


class DofTableMismatchError(PolyddrError):
    pass


class DuplicateVertexError(PolyddrError):
    pass


class InvalidConfigError(PolyddrError):
    pass


class InvertedFanError(PolyddrError):
    pass


class LayoutMismatchError(PolyddrError):
    pass


class LiftingRankError(PolyddrError):
    pass


class MeshFormatError(PolyddrError):
    pass


class NonClosedLoopError(PolyddrError):
    pass


class NonManifoldEdgeError(PolyddrError):
    pass


class ProbeInfeasibleError(PolyddrError):
    pass


class RateStudyError(PolyddrError):
    pass


class SingularMassError(PolyddrError):
    pass


class UnknownOperatorError(PolyddrError):
    pass


class UnsupportedDegreeError(PolyddrError):
    pass


class ZeroOperatorError(PolyddrError):
    pass
