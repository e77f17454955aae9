"""Exception hierarchy shared across the codec.

Container problems are split into distinct classes so callers can tell a
wrong file apart from a damaged one without string matching.
"""


class CodecError(Exception):
    """Base class for every error raised by this package."""


class FormatError(CodecError):
    """Malformed PPM or FMAP input (bad header, bad values, wrong length)."""


class ContainerError(CodecError):
    """Base class for problems with the .nfc container."""


class BadMagicError(ContainerError):
    """The blob does not start with the container magic."""


class UnsupportedVersionError(ContainerError):
    """The container version byte is not one this build understands."""


class TruncationError(ContainerError):
    """The blob ends before the header plus declared payload length."""


class LengthMismatchError(ContainerError):
    """Declared payload length disagrees with the actual blob size."""


class FieldRangeError(ContainerError):
    """A header field holds a value outside its documented range."""


class EntropyDecodeError(CodecError):
    """The entropy decoder was asked to do something impossible."""
