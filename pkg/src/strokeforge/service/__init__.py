"""HTTP service wrapping the restoration pipeline for interactive clients."""

from .app import create_app

__all__ = ["create_app"]
