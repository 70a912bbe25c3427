"""Exception hierarchy.

``InputError`` subclasses mean the caller handed us something malformed or
inconsistent (CLI exit code 1). ``EstimationError`` subclasses mean the data
parsed fine but a geometric estimate could not be formed (exit code 2 when
they escape the pipeline).
"""


class FoelsError(Exception):
    exit_code = 2


class InputError(FoelsError, ValueError):
    exit_code = 1


class BadMagicError(InputError):
    pass


class TruncatedError(InputError):
    pass


class BadDimsError(InputError):
    pass


class ParseError(InputError):
    pass


class DuplicateClassError(InputError):
    pass


class PriorOutOfRangeError(InputError):
    pass


class UnknownClassError(InputError):
    def __init__(self, class_id):
        super().__init__(f"class id {class_id} is not in the class table")
        self.class_id = class_id


class DimensionMismatchError(InputError):
    pass


class BehindCameraError(InputError):
    pass


class RotationPresentError(InputError):
    pass


class NoMotionError(InputError):
    pass


class EmptySceneError(InputError):
    pass


class EmptyDatasetError(InputError):
    pass


class EstimationError(FoelsError):
    pass


class EmptyStaticAreaError(EstimationError):
    pass


class DegenerateError(EstimationError):
    pass


class AtFoeError(EstimationError):
    pass


class ZeroFlowError(EstimationError):
    pass


class InsufficientFlowError(EstimationError):
    pass


class NoConsensusError(EstimationError):
    pass


class ZeroStaticFlowError(EstimationError):
    pass
