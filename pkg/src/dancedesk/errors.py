"""Exception hierarchy shared across the package.

Each error carries a stable ``code`` string that the wire protocol and CLI
surface verbatim.
"""


class DanceDeskError(Exception):
    code = "INTERNAL"


class InvalidPose(DanceDeskError):
    code = "BAD_PARAM"


class LengthError(DanceDeskError):
    code = "BAD_PARAM"


class RangeError(DanceDeskError):
    code = "BAD_PARAM"


class EmptyPrompt(DanceDeskError):
    code = "EMPTY_PROMPT"


class UnknownStyle(DanceDeskError):
    code = "UNKNOWN_STYLE"


class UnknownBodyPart(DanceDeskError):
    code = "UNKNOWN_BODY_PART"


class ExtensionTooLong(DanceDeskError):
    code = "EXT_TOO_LONG"


class CapExceeded(DanceDeskError):
    code = "CAP_EXCEEDED"


class EmptyCorpus(DanceDeskError):
    code = "BAD_PARAM"


class NoOpEdit(DanceDeskError):
    code = "BAD_PARAM"


class ShapeError(DanceDeskError):
    code = "BAD_PARAM"


class EmptyClip(DanceDeskError):
    code = "BAD_PARAM"


class CameraError(DanceDeskError):
    code = "BAD_PARAM"


class NotConfigured(DanceDeskError):
    code = "NOT_CONFIGURED"


class EncoderFailed(DanceDeskError):
    code = "INTERNAL"


class ParseError(DanceDeskError):
    code = "BAD_PARAM"


class SchemaError(DanceDeskError):
    code = "BAD_PARAM"


class NotFound(DanceDeskError):
    code = "NOT_FOUND"


class DuplicateId(DanceDeskError):
    code = "BAD_PARAM"


class StorageError(DanceDeskError):
    code = "INTERNAL"


class WeightsError(DanceDeskError):
    code = "BAD_PARAM"


class BindError(DanceDeskError):
    code = "INTERNAL"
