"""
synthal - synthetic instrument images for active learning in surgical segmentation
"""

from .config import RunConfig, SynthesisConfig, load_config, preset
from .data_types import (
    RasterImage, BinaryMask, SoftMask, LabeledImage,
    TransformParams, FusionParams, BlurKind, TrimSpec, TrimShape, ColorAdjustParams,
    SampledParams, SyntheticSample, SynthType,
    BackgroundImage, BackgroundOrigin, SelfTransform,
    ProbabilityStack, ImageScore, ImageEval, EvalResult,
)
from .errors import SynthALError
from .inpaint import BackgroundPool, acquire_background
from .metrics import dsc, iou, iou_nb
from .orchestrator import ActiveLoop
from .query import bald_map, entropy_map
from .synthesis import generate_type1, generate_type2, multi_blend_pair
from .trainers import ExternalTrainer, MockTrainer

__version__ = "0.1.0"
__all__ = [
    "RunConfig",
    "SynthesisConfig",
    "load_config",
    "preset",
    "RasterImage",
    "BinaryMask",
    "SoftMask",
    "LabeledImage",
    "TransformParams",
    "FusionParams",
    "BlurKind",
    "TrimSpec",
    "TrimShape",
    "ColorAdjustParams",
    "SampledParams",
    "SyntheticSample",
    "SynthType",
    "BackgroundImage",
    "BackgroundOrigin",
    "SelfTransform",
    "ProbabilityStack",
    "ImageScore",
    "ImageEval",
    "EvalResult",
    "SynthALError",
    "BackgroundPool",
    "acquire_background",
    "dsc",
    "iou",
    "iou_nb",
    "ActiveLoop",
    "bald_map",
    "entropy_map",
    "generate_type1",
    "generate_type2",
    "multi_blend_pair",
    "ExternalTrainer",
    "MockTrainer",
]
