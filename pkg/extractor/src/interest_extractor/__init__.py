"""CNN feature extraction for the interestboard pipeline."""

from .backbone import IMAGE_SIZE, Backbone
from .batch import extract_batch

__version__ = "0.1.0"

__all__ = ["Backbone", "IMAGE_SIZE", "extract_batch", "__version__"]
