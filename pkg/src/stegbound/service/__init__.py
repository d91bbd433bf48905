"""HTTP service layer: pydantic schemas, handlers, FastAPI app."""

from .handlers import (
    handle_bound,
    handle_code,
    handle_curve,
    handle_detect,
    handle_image_bound,
)
from .schemas import (
    BoundRequest,
    CodeRequest,
    CurveRequest,
    DetectRequest,
    ErrorBody,
    ImageBoundRequest,
    RunEnvelope,
)

__all__ = [
    "BoundRequest",
    "CurveRequest",
    "DetectRequest",
    "CodeRequest",
    "ImageBoundRequest",
    "RunEnvelope",
    "ErrorBody",
    "handle_bound",
    "handle_curve",
    "handle_detect",
    "handle_code",
    "handle_image_bound",
]
