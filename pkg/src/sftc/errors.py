"""Exception taxonomy shared by all codec layers.

Every failure mode surfaced through the public API maps to one of these
classes, so callers (and the CLI exit-code table) can branch on type.
"""


class CodecError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(CodecError):
    """Caller passed arguments violating an operation's preconditions."""


class CorruptPayloadError(CodecError):
    """A payload was structurally readable but semantically inconsistent."""


class TruncatedPayloadError(CodecError):
    """A payload ended before the declared symbol count was recovered."""


class NotAModelError(CodecError):
    """The bytes are not a weight file (bad magic)."""


class TruncatedFileError(CodecError):
    """A weight file ended mid-header or mid-blob."""


class MalformedModelError(CodecError):
    """A weight file parsed but its layer arithmetic is inconsistent."""


class NotAStreamError(CodecError):
    """The bytes are not a layered stream (bad magic)."""


class TruncatedStreamError(CodecError):
    """A layered stream ended before its declared payload lengths."""


class UnsupportedVersionError(CodecError):
    """Stream version or codec id unknown to this implementation."""


class CorruptHeaderError(CodecError):
    """A header field violates its documented range or ordering."""


class ModeUnavailableError(CodecError):
    """Requested decode mode needs a layer the stream does not carry."""


class ExternalCodecError(CodecError):
    """An external codec subprocess failed; message carries diagnostics."""


class DegenerateProtocolError(CodecError):
    """Verification protocol input contains only one class."""
