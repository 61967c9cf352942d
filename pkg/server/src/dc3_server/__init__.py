"""HTTP model server for the dc3 pipeline."""

from .app import BATCH_LIMIT, create_app
from .models import FeatureExtractor, ModelRegistry, Recolorizer

__version__ = "0.1.0"

__all__ = [
    "BATCH_LIMIT",
    "FeatureExtractor",
    "ModelRegistry",
    "Recolorizer",
    "create_app",
    "__version__",
]
