"""Ошибки Sufficiency Workbench и коды выхода CLI."""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, Optional


class ErrorCode(str, Enum):
    # model_core
    NEGATIVE_PROB = "NEGATIVE_PROB"
    NORMALIZATION = "NORMALIZATION"
    SHAPE_MISMATCH = "SHAPE_MISMATCH"
    DUPLICATE_SYMBOL = "DUPLICATE_SYMBOL"
    TOO_LARGE = "TOO_LARGE"
    EMPTY_AXIS_SET = "EMPTY_AXIS_SET"
    UNKNOWN_AXIS = "UNKNOWN_AXIS"
    ZERO_EVENT = "ZERO_EVENT"
    AXIS_OVERLAP = "AXIS_OVERLAP"
    # statistics
    MISSING_SYMBOL = "MISSING_SYMBOL"
    SAME_DOMAIN = "SAME_DOMAIN"
    DOMAIN_MISMATCH = "DOMAIN_MISMATCH"
    # sufficiency / hci
    COMPOSITION_MISMATCH = "COMPOSITION_MISMATCH"
    PRECONDITION_FAILED = "PRECONDITION_FAILED"
    # source coding
    CARD_TOO_LARGE = "CARD_TOO_LARGE"
    NO_CONVERGENCE = "NO_CONVERGENCE"
    DISTORTION_OUT_OF_RANGE = "DISTORTION_OUT_OF_RANGE"
    # continuous examples
    LENGTH_MISMATCH = "LENGTH_MISMATCH"
    NONFINITE_INPUT = "NONFINITE_INPUT"
    EMPTY_COMMON_SUPPORT = "EMPTY_COMMON_SUPPORT"
    # общие
    INVALID_CONFIG = "INVALID_CONFIG"
    MODEL_FILE = "MODEL_FILE"


# Контракт кодов выхода CLI
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_MODEL_ERROR = 3


class WorkbenchError(ValueError):
    """Невалидный вход или нарушенное предусловие операции."""

    def __init__(self, code: ErrorCode, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"{code.value}: {message}")
        self.code = code
        self.message = message
        self.details = dict(details or {})

    def to_record(self) -> Dict[str, Any]:
        return {"code": self.code.value, "message": self.message, "details": self.details}


class UsageError(Exception):
    """Неизвестная команда или флаг (exit 2)."""
