"""Seeded, reproducible image data augmentation."""

from .core import FillMode, clamp_round, load_image, map_index, new_image, resize_bilinear
from .geometry import (
    AffineTransform,
    compose,
    flip_h,
    flip_v,
    make_rotation,
    make_shear,
    make_translation,
    make_zoom,
    warp_affine,
)
from .pipeline import PipelineConfig, execute, plan, replay, run
from .rng import RandomStream, derive_seed
from .sampling import TechniqueSpec, sample_params

__version__ = "0.1.0"

__all__ = [
    "AffineTransform",
    "FillMode",
    "PipelineConfig",
    "RandomStream",
    "TechniqueSpec",
    "clamp_round",
    "compose",
    "derive_seed",
    "execute",
    "flip_h",
    "flip_v",
    "load_image",
    "make_rotation",
    "make_shear",
    "make_translation",
    "make_zoom",
    "map_index",
    "new_image",
    "plan",
    "replay",
    "resize_bilinear",
    "run",
    "sample_params",
    "warp_affine",
]
