"""
Error Types Module

Base exception shared by every pipeline stage. Stage modules derive their own
small hierarchies from ``CurvePairError`` so callers can catch one type and still
report which stage failed and on which box.

Example Usage:
    try:
        run_pipeline(config)
    except CurvePairError as e:
        print(json.dumps(e.to_dict()))
"""

from typing import Any, Dict, Optional


class CurvePairError(Exception):
    """Base exception for curvepair errors."""

    stage: str = "unknown"

    def __init__(
        self,
        message: str,
        stage: Optional[str] = None,
        box: Optional[Any] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        if stage is not None:
            self.stage = stage
        self.box = box
        self.details = details or {}

    def with_stage(self, stage: str) -> 'CurvePairError':
        """Tag the error with the pipeline stage it surfaced in (first tag wins)."""
        if self.stage == type(self).stage:
            self.stage = stage
        return self

    def box_address(self) -> Optional[Dict[str, int]]:
        if self.box is None:
            return None
        return {
            'depth': self.box.depth,
            'ix': self.box.ix,
            'iy': self.box.iy
        }

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the error to the machine-readable error object.

        Returns:
            Dictionary with type, stage, message, box address and details
        """
        return {
            'type': type(self).__name__,
            'stage': self.stage,
            'message': self.message,
            'box': self.box_address(),
            'details': self.details
        }


class StageError(CurvePairError):
    """Unexpected failure inside a pipeline stage."""
    pass


class ConfigurationError(CurvePairError):
    """Invalid run configuration or environment setting."""

    stage = "config"
