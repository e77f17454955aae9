"""HTTP service wrapping the codec; run with ``python -m fmcodec.service``."""

from .app import app

__all__ = ["app"]
