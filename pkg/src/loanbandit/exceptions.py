from collections.abc import Sequence
from typing import Any


class LoanBanditError(Exception): ...


class ConfigError(LoanBanditError):
    def __init__(self, errors: Sequence[Any] | str) -> None:
        if isinstance(errors, str):
            errors = [errors]
        self._errors = list(errors)
        super().__init__(str(self))

    def errors(self) -> Sequence[Any]:
        return self._errors

    def __str__(self) -> str:
        message = f"{len(self._errors)} configuration errors:\n"
        for err in self._errors:
            message += f"  {err}\n"
        return message


class DimensionMismatchError(LoanBanditError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected input dimension {expected}, got {actual}")


class ParameterError(LoanBanditError): ...


class StreamExhaustedError(LoanBanditError): ...


class LengthMismatchError(LoanBanditError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected {expected} decisions, got {actual}")


class LabelConsistencyError(LoanBanditError): ...


class DatasetError(LoanBanditError):
    def __init__(self, detail: str, *, path: Any = None) -> None:
        self.detail = detail
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.path is None:
            return self.detail
        return f"{self.path}: {self.detail}"


class DatasetParseError(DatasetError):
    def __init__(self, detail: str, *, row: int, path: Any = None) -> None:
        self.row = row
        super().__init__(detail, path=path)

    def __str__(self) -> str:
        return f"{super().__str__()} (row {self.row})"


class SchemaMismatchError(DatasetError): ...


class FormatError(DatasetError): ...


class GenerationError(LoanBanditError): ...


class TheoryDomainError(LoanBanditError): ...


class EmitError(LoanBanditError):
    def __init__(self, path: Any, cause: BaseException) -> None:
        self.path = path
        self.cause = cause
        super().__init__(f"failed to write {path}: {cause}")
