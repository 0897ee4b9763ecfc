from .base import BaseReader
from .proximity import ProximityReader, extract_span

__all__ = ["BaseReader", "ProximityReader", "extract_span"]
