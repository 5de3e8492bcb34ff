"""
Error types and error handling utilities for fitting and simulation runs.
"""
from typing import Dict, Any
import traceback

from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from src.utility_modules.enums import ErrorType, ErrorSeverity

class SubartError(Exception):
    """Base exception for model errors."""
    error_type = ErrorType.UNKNOWN

    def __init__(self, message: str, error_type: ErrorType = None):
        self.message = message
        if error_type is not None:
            self.error_type = error_type
        super().__init__(self.message)

class ValidationFailure(SubartError):
    """Input data or parameters violate a documented domain."""
    error_type = ErrorType.VALIDATION

class NumericalFailure(SubartError):
    """A numerical routine could not produce a valid result."""
    error_type = ErrorType.NUMERICAL

class EmptyData(ValidationFailure):
    pass

class NonBinaryOutcome(ValidationFailure):
    pass

class ConstantOutcome(ValidationFailure):
    pass

class DimensionMismatch(ValidationFailure):
    pass

class InvalidParameter(ValidationFailure):
    pass

class InvalidDegreesOfFreedom(ValidationFailure):
    pass

class OutOfSupport(ValidationFailure):
    pass

class SingleLevel(ValidationFailure):
    pass

class AllOneTreatment(ValidationFailure):
    pass

class LengthMismatch(ValidationFailure):
    pass

class InsufficientDraws(ValidationFailure):
    pass

class DegenerateDesign(ValidationFailure):
    pass

class SchemaMismatch(SubartError):
    """New data does not match the training schema."""
    error_type = ErrorType.SCHEMA

class UnknownCategoryLevel(SchemaMismatch):
    pass

class NotPositiveDefinite(NumericalFailure):
    pass

class TailSamplingFailure(NumericalFailure):
    pass

class RootNotBracketed(NumericalFailure):
    pass

class ZeroVariance(NumericalFailure):
    pass

class SubartErrorHandler:
    """Maps errors to types, severities, exit codes and payloads."""

    @staticmethod
    def determine_error_type(error: Exception) -> ErrorType:
        """Determine the type of error based on the exception."""
        if isinstance(error, SubartError):
            return error.error_type
        elif isinstance(error, ValidationError):
            return ErrorType.VALIDATION
        elif isinstance(error, SQLAlchemyError):
            return ErrorType.DATABASE
        elif isinstance(error, (OSError, UnicodeDecodeError)):
            return ErrorType.IO
        elif isinstance(error, (FloatingPointError, ZeroDivisionError)):
            return ErrorType.NUMERICAL
        elif isinstance(error, ValueError):
            return ErrorType.VALIDATION
        return ErrorType.UNKNOWN

    @staticmethod
    def determine_severity(error_type: ErrorType) -> ErrorSeverity:
        """Determine the severity of an error based on its type."""
        severity_map = {
            ErrorType.VALIDATION: ErrorSeverity.LOW,
            ErrorType.SCHEMA: ErrorSeverity.LOW,
            ErrorType.NUMERICAL: ErrorSeverity.HIGH,
            ErrorType.IO: ErrorSeverity.MEDIUM,
            ErrorType.DATABASE: ErrorSeverity.CRITICAL,
            ErrorType.UNKNOWN: ErrorSeverity.HIGH
        }
        return severity_map.get(error_type, ErrorSeverity.HIGH)

    @staticmethod
    def exit_code(error: Exception) -> int:
        """Process exit code for a failed command: 2 for bad input, 3 for numerical failure."""
        error_type = SubartErrorHandler.determine_error_type(error)
        if error_type in (ErrorType.VALIDATION, ErrorType.SCHEMA):
            return 2
        if error_type == ErrorType.NUMERICAL:
            return 3
        return 1

    @staticmethod
    def error_payload(error: Exception, include_trace: bool = False) -> Dict[str, Any]:
        """Machine-readable description of an error."""
        error_type = SubartErrorHandler.determine_error_type(error)
        payload = {
            "error": type(error).__name__,
            "error_type": error_type.value,
            "severity": SubartErrorHandler.determine_severity(error_type).value,
            "message": str(error),
        }
        if include_trace:
            payload["stack_trace"] = "".join(
                traceback.format_exception(type(error), error, error.__traceback__)
            )
        return payload
