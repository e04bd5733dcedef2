"""Exception hierarchy shared across the package.

The CLI maps InputError to exit code 2 and ProviderError to exit code 3;
everything else is a bug.
"""


class LexcatError(Exception):
    """Base class for all package errors."""


class InputError(LexcatError):
    """Malformed or inconsistent user-supplied data (files, configs, args)."""


class DicParseError(InputError):
    """Lexicon file rejected; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatError(InputError):
    """Binary file rejected; carries the byte offset of the violation."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class ProviderError(LexcatError):
    """Embedding provider failed to produce a vector."""


class BatchItemError(LexcatError):
    """Batch operation aborted; carries the failing index and cause."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"item {index}: {cause}")
        self.index = index
        self.cause = cause


class KeyNotFoundError(ProviderError):
    """Store-backed provider was asked for a text it does not hold."""

    def __init__(self, key: str):
        super().__init__(f"no embedding stored for key: {key!r}")
        self.key = key
