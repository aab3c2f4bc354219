"""Exception types shared across the package.

Command-line entry points map InputError (and subclasses) to exit code 1;
anything else that escapes is treated as an internal fault and maps to 2.
"""


class InputError(Exception):
    """Base class for faults caused by user-supplied data or options."""


class ParseError(InputError):
    """Raised when an input file cannot be parsed at all."""


class ValidationError(InputError):
    """Raised when parsed input violates a structural requirement."""


class DictionaryError(InputError):
    """Raised when a filter dictionary file is missing or malformed."""
