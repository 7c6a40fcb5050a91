"""
API controllers for the presentation layer.
"""
from .inference_controller import router as inference_router

__all__ = ["inference_router"]
