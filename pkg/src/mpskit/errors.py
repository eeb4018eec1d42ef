"""Exception types shared across the package.

Invalid arguments raise the builtin ``ValueError``; the classes here cover
the two failure modes that need to be told apart from it (and mapped to
distinct CLI exit codes).
"""


class DegenerateInputError(ValueError):
    """Input is numerically unusable (e.g. an all-zero matrix or tensor)."""


class FormatError(Exception):
    """A serialized file is malformed. Carries the byte offset of the fault."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
