"""Exception hierarchy.

Every error raised by the package derives from :class:`LesionFusionError`.
Class names double as the error tokens printed by the command line tool.
"""


class LesionFusionError(Exception):
    """Base class for all package errors."""


# dataset_io
class MalformedHeader(LesionFusionError):
    pass


class DuplicateId(LesionFusionError):
    pass


class BothFlagsSet(LesionFusionError):
    pass


class UnparseableCell(LesionFusionError):
    pass


class AgeOutOfRange(LesionFusionError):
    pass


class NegativeAge(AgeOutOfRange):
    pass


class UnknownSexToken(LesionFusionError):
    pass


class ScoreOutOfRange(LesionFusionError):
    pass


class IoFailure(LesionFusionError):
    pass


class MissingScores(LesionFusionError):
    pass


# color_constancy
class ZeroChannel(LesionFusionError):
    pass


class InvalidImage(LesionFusionError):
    pass


# augmentation
class EmptyAxis(LesionFusionError):
    pass


# providers / fusion
class IdSetMismatch(LesionFusionError):
    pass


class TaskMismatch(LesionFusionError):
    pass


class MissingTruthForOracle(LesionFusionError):
    pass


class MissingCalibration(LesionFusionError):
    pass


# metrics / calibration
class DegenerateLabels(LesionFusionError):
    pass


class NoPositives(LesionFusionError):
    pass


class ZeroSkThreshold(LesionFusionError):
    pass


class BadK(LesionFusionError):
    pass


class InvalidConfig(LesionFusionError):
    pass
