"""Black-box target adapters: local desk models and the offline API mock."""

from .base import TASKS, FailingTarget, TargetAdapter
from .local import (
    DeskClassifyTarget,
    DeskDetectTarget,
    DeskSegmentTarget,
    local_adapter,
)
from .mock_api import MockApiTarget, build_fixture, mock_api_adapter

__all__ = [
    "TASKS",
    "DeskClassifyTarget",
    "DeskDetectTarget",
    "DeskSegmentTarget",
    "FailingTarget",
    "MockApiTarget",
    "TargetAdapter",
    "build_fixture",
    "local_adapter",
    "mock_api_adapter",
]
