"""ELSED line segment detector."""

from ._elsed import (
    DetectorParams,
    ElsedError,
    EvalMetrics,
    detect,
    evaluate,
    load_image,
    repeatability,
)

__all__ = [
    "DetectorParams",
    "ElsedError",
    "EvalMetrics",
    "detect",
    "evaluate",
    "load_image",
    "repeatability",
]
