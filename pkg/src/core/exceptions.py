from typing import Any, Dict, Optional


class MRCError(Exception):
    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message={self.message})"

    def __str__(self) -> str:
        return self.__repr__()


class ConfigError(MRCError):
    """Invalid run or model configuration."""


class DataError(MRCError):
    """Problems with input data files."""


class ReaderError(DataError):
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class AlignmentError(DataError):
    """An answer span could not be mapped onto context tokens."""


class SerializationError(DataError):
    """Instance file is corrupted or written by another format version."""


class EmbeddingFormatError(DataError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        super().__init__(
            f"line {line_number}: {message}" if line_number is not None else message
        )


class TensorError(MRCError):
    pass


class ShapeError(TensorError):
    pass


class DomainError(TensorError):
    pass


class GraphError(TensorError):
    pass


class NumericError(MRCError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class CheckpointError(MRCError):
    pass


class IntegrityError(CheckpointError):
    pass


class ConfigMismatchError(CheckpointError):
    def __init__(self, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(
            f"Checkpoint config hash {found} does not match model config hash {expected}"
        )
