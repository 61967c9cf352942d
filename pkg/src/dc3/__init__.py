"""Dataset condensation by bin-and-select with hue-diverse image synthesis.

The package condenses an image classification dataset to a small per-class
budget: features are clustered into bins, the most representative members of
each bin are selected by a pairwise-distance gain, each kept image is
recolored into cool and warm variants, and the variants are stitched back
into a single image so the condensed set keeps more color diversity than the
raw selection. Color statistics before and after quantify the effect.
"""

from .catalog import (
    DatasetManifest,
    FeatureMatrix,
    SampleRecord,
    load_features,
    load_manifest,
    write_features,
)
from .compensator import (
    DEFAULT_CATALOG,
    CompensatedPair,
    FallbackBackend,
    HttpBackend,
    HuePrompt,
    PromptFamily,
    compensate,
    compensate_pair,
    pick_prompts,
)
from .errors import Dc3Error
from .metrics import (
    ColorfulnessScore,
    KdeCurve,
    colorfulness,
    dataset_colorfulness,
    homogenization_report,
    kde_rgb,
)
from .pipeline import CondensedManifest, PipelineConfig, run
from .quantizer import BinPartition, assign, kmeans_partition
from .sampler import (
    GainTable,
    SelectionMode,
    SelectionResult,
    incremental_gain,
    select_per_class,
    static_gains,
)
from .stitcher import StitchKind, StitchStrategy, parse_strategy, provenance_mask, stitch

__version__ = "0.1.0"

__all__ = [
    "BinPartition",
    "ColorfulnessScore",
    "CompensatedPair",
    "CondensedManifest",
    "DEFAULT_CATALOG",
    "DatasetManifest",
    "Dc3Error",
    "FallbackBackend",
    "FeatureMatrix",
    "GainTable",
    "HttpBackend",
    "HuePrompt",
    "KdeCurve",
    "PipelineConfig",
    "PromptFamily",
    "SampleRecord",
    "SelectionMode",
    "SelectionResult",
    "StitchKind",
    "StitchStrategy",
    "assign",
    "colorfulness",
    "compensate",
    "compensate_pair",
    "dataset_colorfulness",
    "homogenization_report",
    "incremental_gain",
    "kde_rgb",
    "kmeans_partition",
    "load_features",
    "load_manifest",
    "parse_strategy",
    "pick_prompts",
    "provenance_mask",
    "run",
    "select_per_class",
    "static_gains",
    "stitch",
    "write_features",
]
