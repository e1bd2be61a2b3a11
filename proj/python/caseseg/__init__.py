"""Case-id detection in cyclic sensor time series."""

from ._core import (
    ContractError,
    DetectorParams,
    Error,
    InputError,
    LabelSegment,
    ParameterError,
    Pattern,
    TimeSeries,
    assign_case_ids,
    clean_outliers,
    detect_patterns,
    detect_patterns_reference,
    evaluate,
    generate_cyclic_series,
    inject_outliers,
    metrics,
    parse_csv,
)

__all__ = [
    "ContractError",
    "DetectorParams",
    "Error",
    "InputError",
    "LabelSegment",
    "ParameterError",
    "Pattern",
    "TimeSeries",
    "assign_case_ids",
    "clean_outliers",
    "detect_patterns",
    "detect_patterns_reference",
    "evaluate",
    "generate_cyclic_series",
    "inject_outliers",
    "metrics",
    "parse_csv",
]
