from typing import Any, Dict, Optional


class PatchStackError(Exception):
    """Base exception for PatchStack"""
    exit_code: int = 1

    def __init__(
        self,
        message: str,
        exit_code: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(PatchStackError):
    """Raised when parameters or configuration are invalid"""
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, **details: Any):
        if field:
            details["field"] = field
        super().__init__(message=message, details=details)


class InvalidShapeError(ConfigurationError):
    """Raised when a shape violates its invariants"""
    def __init__(self, message: str, shape: Optional[str] = None):
        super().__init__(f"Invalid shape: {message}", field=shape)


class ExtentError(ConfigurationError):
    """Raised when a pose or footprint leaves the belief grid"""
    def __init__(self, message: str, x: float, y: float):
        super().__init__(message, x=x, y=y)


class DataError(PatchStackError):
    """Raised when a data file or data set cannot be used"""
    exit_code = 3

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        details: Dict[str, Any] = {}
        if path:
            details["path"] = path
        if line is not None:
            details["line"] = line
            message = f"{message} (line {line})"
        super().__init__(message=message, details=details)


class InputError(DataError):
    """Raised when an observation does not match the model input layout"""
    def __init__(self, expected: int, received: int):
        super().__init__(f"Observation has {received} channels per step, model expects {expected}")
        self.details.update({"expected": expected, "received": received})


class GridMismatchError(DataError):
    """Raised when an estimate and a mask live on different grids"""
    def __init__(self, left: Any, right: Any):
        super().__init__(f"Grid mismatch: {left} != {right}")


class NumericError(PatchStackError):
    """Raised when training diverges"""
    exit_code = 4

    def __init__(self, message: str, learning_rate: float, epoch: int):
        super().__init__(
            message=f"Numeric failure: {message}",
            details={"learning_rate": learning_rate, "epoch": epoch}
        )


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the process exit code"""
    if isinstance(exc, PatchStackError):
        return exc.exit_code
    return 1
