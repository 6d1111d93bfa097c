from __future__ import annotations
from typing import Optional


class SemTreeError(Exception):
    def __init__(self, message: str, **kwargs):
        super().__init__(message)
        self.message = message
        self.context = kwargs


class InvalidArgument(SemTreeError, ValueError):
    pass


class InvalidState(SemTreeError):
    pass


class NumericFailure(SemTreeError, ArithmeticError):
    def __init__(self, message: str, epoch: Optional[int] = None,
                 batch_index: Optional[int] = None, row: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.epoch = epoch
        self.batch_index = batch_index
        self.row = row

    def __str__(self) -> str:
        where = [
            f"{name}={value}"
            for name, value in (('epoch', self.epoch), ('batch', self.batch_index), ('row', self.row))
            if value is not None
        ]
        return f"{self.message} ({', '.join(where)})" if where else self.message


class DataError(SemTreeError):
    pass


class ParseError(DataError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None,
                 path: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.line = line
        self.path = path

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        location = f"{self.path}:{self.line}" if self.path else f"line {self.line}"
        return f"{location}: {self.message}"


class EncodeError(DataError, ValueError):
    def __init__(self, message: str, column: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.column = column


class SplitError(DataError, ValueError):
    pass


class DatasetNotFound(DataError):
    def __init__(self, message: str, name: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.name = name


class ChecksumMismatch(DataError):
    def __init__(self, message: str, expected: Optional[str] = None,
                 actual: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.expected = expected
        self.actual = actual


class ConfigError(SemTreeError, ValueError):
    def __init__(self, message: str, key: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.key = key


class CheckpointCorruption(SemTreeError):
    def __init__(self, message: str, expected_hash: Optional[str] = None,
                 actual_hash: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.expected_hash = expected_hash
        self.actual_hash = actual_hash


class MissingStandardizer(SemTreeError):
    pass
