"""Technique registry and per-technique parameter distributions.

``sample_params`` turns a :class:`TechniqueSpec` and a job's parameter
stream into the concrete, JSON-serializable values recorded in the
manifest. Pixel-level randomness (noise fields, erase fill, shuffles) is
drawn later from a separate content stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from . import advanced, noise
from .photometric import KERNELS
from .rng import RandomStream


@dataclass(frozen=True)
class Technique:
    name: str
    code: int
    prefix: str
    multiplicity: int
    defaults: dict[str, Any]


def _prefix(name: str) -> str:
    return "".join(part.capitalize() for part in name.split("-")) + "_img"


_REGISTRY = [
    Technique("rotate", 1, "Rotated_img", 7, {"range": [-180.0, 180.0]}),
    Technique("shift", 2, "Shifted_img", 4, {"width_range": 0.2, "height_range": 0.2}),
    Technique("shear", 3, "Sheared_img", 3, {"range": [-45.0, 45.0]}),
    Technique("zoom", 4, "Zoomed_img", 4, {"range": [0.5, 1.5], "isotropic": False}),
    Technique("flip", 5, "Flipped_img", 4, {"p_horizontal": 0.5, "p_vertical": 0.5}),
    Technique("brightness", 6, "Brightness_Changed_img", 5, {"range": [0.2, 2.1]}),
    Technique(
        "noise-gaussian", 7, "Noise_injected_img", 5, {"variability": noise.DEFAULT_VARIABILITY}
    ),
    Technique("noise-sp", 8, _prefix("noise-sp"), 5, {"amount": [0.01, 0.1], "salt_ratio": 0.5}),
    Technique(
        "erase",
        9,
        _prefix("erase"),
        3,
        {"area": [0.02, 0.4], "aspect": [0.3, 3.33], "fill_policy": "random", "cval": 0},
    ),
    Technique("patch-shuffle", 10, _prefix("patch-shuffle"), 3, {"window": 2, "p": 0.05}),
    Technique("sample-pairing", 11, _prefix("sample-pairing"), 3, {"crop": advanced.DEFAULT_CROP}),
    Technique("channel-isolate", 12, _prefix("channel-isolate"), 3, {"channels": ["R", "G", "B"]}),
    Technique("blur", 13, _prefix("blur"), 1, {"kernel": "gaussian"}),
    Technique("sharpen", 14, _prefix("sharpen"), 1, {"kernel": "sharpen"}),
]

TECHNIQUES: dict[str, Technique] = {t.name: t for t in _REGISTRY}

# the seven techniques selected by "all"
CORE_TECHNIQUES = ("rotate", "shift", "shear", "zoom", "flip", "brightness", "noise-gaussian")

ALIASES = {"noise": "noise-gaussian", "salt-pepper": "noise-sp", "sp-noise": "noise-sp"}


def resolve_technique(name: str) -> str:
    """Canonical technique name; raises ValueError naming the bad token."""
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in TECHNIQUES:
        raise ValueError(f"unknown technique {name!r}")
    return key


@dataclass
class TechniqueSpec:
    technique: str
    multiplicity: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.technique = resolve_technique(self.technique)
        info = TECHNIQUES[self.technique]
        if self.multiplicity is None:
            self.multiplicity = info.multiplicity
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise ValueError(f"multiplicity for {self.technique} must be a positive integer")
        self.multiplicity = int(self.multiplicity)
        unknown = set(self.params) - set(info.defaults)
        if unknown:
            raise ValueError(f"unknown parameters for {self.technique}: {sorted(unknown)}")
        _validate(self.technique, self.resolved())

    @property
    def code(self) -> int:
        return TECHNIQUES[self.technique].code

    @property
    def prefix(self) -> str:
        return TECHNIQUES[self.technique].prefix

    def resolved(self) -> dict[str, Any]:
        return {**TECHNIQUES[self.technique].defaults, **self.params}


def _bounds(value, name: str, lo_limit=-math.inf, hi_limit=math.inf) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a [low, high] pair") from None
    if not (lo_limit <= lo <= hi <= hi_limit):
        raise ValueError(f"{name} bounds {[lo, hi]} outside [{lo_limit}, {hi_limit}] or reversed")
    return lo, hi


def _validate(name: str, p: dict[str, Any]) -> None:
    if name == "rotate":
        _bounds(p["range"], "rotate range")
    elif name == "shift":
        for k in ("width_range", "height_range"):
            if not 0 <= p[k] < 1:
                raise ValueError(f"shift {k} must be in [0, 1)")
    elif name == "shear":
        lo, hi = _bounds(p["range"], "shear range")
        if max(abs(lo), abs(hi)) >= 90:
            raise ValueError("shear range must lie strictly inside (-90, 90)")
    elif name == "zoom":
        lo, _ = _bounds(p["range"], "zoom range")
        if lo <= 0:
            raise ValueError("zoom factors must be positive")
    elif name == "flip":
        for k in ("p_horizontal", "p_vertical"):
            if not 0 <= p[k] <= 1:
                raise ValueError(f"flip {k} must be in [0, 1]")
    elif name == "brightness":
        _bounds(p["range"], "brightness range", 0.0)
    elif name == "noise-gaussian":
        if not p["variability"] >= 0:
            raise ValueError("variability must be non-negative")
    elif name == "noise-sp":
        _bounds(p["amount"], "salt-and-pepper amount", 0.0, 1.0)
        noise.SaltPepperParams(0.0, p["salt_ratio"])
    elif name == "erase":
        area = _bounds(p["area"], "erase area")
        aspect = _bounds(p["aspect"], "erase aspect")
        advanced.EraseParams(*area, *aspect, p["fill_policy"], p["cval"])
    elif name == "patch-shuffle":
        advanced.PatchShuffleParams(p["window"], p["p"])
    elif name == "sample-pairing":
        if int(p["crop"]) < 1:
            raise ValueError("crop must be >= 1")
    elif name == "channel-isolate":
        channels = p["channels"]
        if not channels or any(str(c).upper() not in ("R", "G", "B") for c in channels):
            raise ValueError("channel-isolate channels must be a non-empty subset of R, G, B")
    elif name in ("blur", "sharpen"):
        if p["kernel"] not in KERNELS:
            raise ValueError(f"unknown kernel {p['kernel']!r}")


def sample_params(
    spec: TechniqueSpec,
    rng: RandomStream,
    *,
    width: int = 512,
    height: int = 512,
) -> dict[str, Any]:
    """Draw concrete parameters for one job.

    ``width``/``height`` are the dimensions of the image the technique will
    see; only shift (pixel offsets) and erase (rectangle) depend on them.
    Sample-pairing partner selection happens in the pipeline, which knows
    the dataset.
    """
    if not isinstance(spec, TechniqueSpec):
        raise ValueError("spec must be a TechniqueSpec")
    p = spec.resolved()
    name = spec.technique

    if name == "rotate":
        return {"degrees": rng.uniform(*p["range"])}
    if name == "shift":
        fx = rng.uniform(-p["width_range"], p["width_range"])
        fy = rng.uniform(-p["height_range"], p["height_range"])
        return {"dx_frac": fx, "dy_frac": fy, "dx": fx * width, "dy": fy * height}
    if name == "shear":
        return {"degrees": rng.uniform(*p["range"])}
    if name == "zoom":
        fx = rng.uniform(*p["range"])
        fy = fx if p["isotropic"] else rng.uniform(*p["range"])
        return {"fx": fx, "fy": fy}
    if name == "flip":
        return {
            "horizontal": rng.bernoulli(p["p_horizontal"]),
            "vertical": rng.bernoulli(p["p_vertical"]),
        }
    if name == "brightness":
        return {"factor": rng.uniform(*p["range"])}
    if name == "noise-gaussian":
        variability = float(p["variability"])
        return {"variability": variability, "deviation": noise.draw_deviation(variability, rng)}
    if name == "noise-sp":
        return {"amount": rng.uniform(*p["amount"]), "salt_ratio": float(p["salt_ratio"])}
    if name == "erase":
        params = advanced.EraseParams(*p["area"], *p["aspect"], p["fill_policy"], p["cval"])
        rect = advanced.sample_erase_rect(height, width, params, rng)
        out = {"fill_policy": params.fill_policy, "cval": params.cval, "erased": rect is not None}
        if rect is not None:
            out.update(rect._asdict())
        return out
    if name == "patch-shuffle":
        return {"window": int(p["window"]), "p": float(p["p"])}
    if name == "sample-pairing":
        return {"crop": int(p["crop"])}
    if name == "channel-isolate":
        channels = [str(c).upper() for c in p["channels"]]
        return {"channel": channels[rng.below(len(channels))]}
    if name in ("blur", "sharpen"):
        return {"kernel": p["kernel"]}
    raise ValueError(f"unknown technique {name!r}")
