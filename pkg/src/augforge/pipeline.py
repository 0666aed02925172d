"""Job planning, deterministic execution, manifests and replay.

Every job is identified by ``(source_index, technique, replicate)``; its
seed comes from :func:`augforge.rng.derive_seed`, so outputs do not depend
on worker count or scheduling order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Any

import numpy as np

from . import advanced, geometry, noise, photometric
from .core import FillMode, encode_png, load_image, resize_bilinear
from .dataset import DatasetEntry, oversample_minority, scan_dataset
from .rng import RandomStream, derive_seed, mix64
from .sampling import TECHNIQUES, TechniqueSpec, sample_params

log = logging.getLogger(__name__)

DEFAULT_SIZE = 512
MANIFEST_NAME = "manifest.jsonl"

# seeds the per-job content stream (noise fields, erase fill, shuffles)
CONTENT_SALT = 0xA5A5_5A5A_C3C3_3C3C
# technique code 0 is reserved for the oversampling draw
BALANCE_CODE = 0

WARP_TECHNIQUES = ("rotate", "shift", "shear", "zoom")
KERNEL_TECHNIQUES = ("blur", "sharpen")


class PipelineError(RuntimeError):
    """Run aborted; ``completed`` jobs had been written before the failure."""

    def __init__(self, message: str, completed: int = 0, total: int = 0):
        super().__init__(message)
        self.completed = completed
        self.total = total


@dataclass
class PipelineConfig:
    input_dir: Path
    output_dir: Path
    techniques: list[TechniqueSpec]
    master_seed: int
    size: int = DEFAULT_SIZE
    fill: FillMode = field(default_factory=FillMode)
    interp: str = "bilinear"
    label_rule: str = "parent-dir"
    balance_ratio: float | None = None
    jobs: int = 1
    manifest_path: Path | None = None

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_dir = Path(self.output_dir)
        if self.manifest_path is not None:
            self.manifest_path = Path(self.manifest_path)
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.interp not in geometry.INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {self.interp!r}")
        names = [t.technique for t in self.techniques]
        if len(set(names)) != len(names):
            raise ValueError("technique identifiers must be unique")
        if self.balance_ratio is not None and not 0 < self.balance_ratio <= 1:
            raise ValueError("balance ratio must be in (0, 1]")

    @property
    def manifest_file(self) -> Path:
        return self.manifest_path or self.output_dir / MANIFEST_NAME


@dataclass(frozen=True)
class Job:
    source_index: int
    source_path: Path
    label: str
    technique: str
    replicate: int
    seed: int

    @property
    def output_name(self) -> str:
        # the seed's high 32 bits as 8 hex digits
        prefix = TECHNIQUES[self.technique].prefix
        return f"{prefix}_{self.source_index}_{self.replicate}_{self.seed >> 32:08x}.png"

    def sort_key(self):
        return (self.source_index, TECHNIQUES[self.technique].code, self.replicate)


@dataclass
class ManifestEntry:
    output_file: str | None
    source_file: str
    label: str
    technique: str
    replicate: int
    params: dict[str, Any]
    seed: str
    width: int | None
    height: int | None
    sha256: str | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> ManifestEntry:
        return cls(**json.loads(line))

    @property
    def failed(self) -> bool:
        return self.output_file is None

    @property
    def seed_int(self) -> int:
        return int(self.seed, 16)

    def sort_key(self):
        return (self.params.get("source_index", 0), TECHNIQUES[self.technique].code, self.replicate)


def content_stream(seed: int) -> RandomStream:
    return RandomStream(mix64(seed ^ CONTENT_SALT))


def plan(config: PipelineConfig, dataset) -> list[Job]:
    """One job per (entry, technique, replicate), in canonical order."""
    specs = sorted(config.techniques, key=lambda s: s.code)
    jobs = []
    for entry in sorted(dataset, key=lambda e: e.source_index):
        for spec in specs:
            for r in range(spec.multiplicity):
                seed = derive_seed(config.master_seed, entry.source_index, spec.code, r)
                jobs.append(Job(entry.source_index, entry.path, entry.label, spec.technique, r, seed))
    return jobs


def prepare_source(path: Path, size: int) -> np.ndarray:
    return resize_bilinear(load_image(path), size, size)


def render(
    img: np.ndarray,
    technique: str,
    params: dict[str, Any],
    seed: int,
    partner: np.ndarray | None = None,
) -> np.ndarray:
    """Apply one technique with fully concrete ``params``.

    ``img`` is the already resized source. Randomness beyond ``params``
    comes from the content stream derived from ``seed``.
    """
    h, w = img.shape[:2]
    cx, cy = geometry.image_center(w, h)
    fill = FillMode(params.get("fill", "reflect"), params.get("cval", 0))
    interp = params.get("interp", "bilinear")

    if technique == "rotate":
        return geometry.warp_affine(img, geometry.make_rotation(params["degrees"], cx, cy), interp, fill)
    if technique == "shift":
        t = geometry.make_translation(params["dx"], params["dy"])
        return geometry.warp_affine(img, t, interp, fill)
    if technique == "shear":
        return geometry.warp_affine(img, geometry.make_shear(params["degrees"], cx, cy), interp, fill)
    if technique == "zoom":
        t = geometry.make_zoom(params["fx"], params["fy"], cx, cy)
        return geometry.warp_affine(img, t, interp, fill)
    if technique == "flip":
        out = img
        if params["horizontal"]:
            out = geometry.flip_h(out)
        if params["vertical"]:
            out = geometry.flip_v(out)
        return out.copy() if out is img else out
    if technique == "brightness":
        return photometric.adjust_brightness(img, params["factor"])
    if technique == "noise-gaussian":
        return noise.gaussian_noise(img, params["deviation"], content_stream(seed))
    if technique == "noise-sp":
        sp = noise.SaltPepperParams(params["amount"], params["salt_ratio"])
        return noise.add_salt_pepper(img, sp, content_stream(seed))
    if technique == "erase":
        if not params["erased"]:
            return img.copy()
        ep = advanced.EraseParams(fill_policy=params["fill_policy"], cval=params["cval"])
        rect = advanced.Rect(params["x"], params["y"], params["w"], params["h"])
        return advanced.erase_rect(img, rect, ep, content_stream(seed))
    if technique == "patch-shuffle":
        ps = advanced.PatchShuffleParams(params["window"], params["p"])
        return advanced.patch_shuffle(img, ps, content_stream(seed))
    if technique == "sample-pairing":
        if partner is None:
            raise ValueError("sample-pairing needs a partner image")
        crop = params["crop"]
        a = advanced.prepare_for_pairing(img, crop)
        b = advanced.prepare_for_pairing(partner, crop)
        draw = advanced.PairingDraw(
            params["a_x"], params["a_y"], params["a_flip"],
            params["b_x"], params["b_y"], params["b_flip"],
        )
        return advanced.pair_images(a, b, crop, draw)
    if technique == "channel-isolate":
        return photometric.isolate_channel(img, params["channel"])
    if technique in KERNEL_TECHNIQUES:
        return photometric.convolve3(img, photometric.KERNELS[params["kernel"]], fill)
    raise ValueError(f"unknown technique {technique!r}")


@dataclass(frozen=True)
class RunContext:
    specs: dict[str, TechniqueSpec]
    size: int
    fill: FillMode
    interp: str
    output_dir: Path | None
    manifest_dir: Path | None
    # (source_index, path) for every dataset entry, for sample-pairing partners
    sources: tuple[tuple[int, Path], ...]


def _relpath(path: Path, start: Path) -> str:
    return Path(os.path.relpath(Path(path).resolve(), start.resolve())).as_posix()


def job_params(job: Job, ctx: RunContext) -> dict[str, Any]:
    """Draw the concrete parameters for ``job`` from its parameter stream."""
    rng = RandomStream(job.seed)
    spec = ctx.specs[job.technique]
    params = sample_params(spec, rng, width=ctx.size, height=ctx.size)
    if job.technique == "sample-pairing":
        n = len(ctx.sources)
        own = next(i for i, (idx, _) in enumerate(ctx.sources) if idx == job.source_index)
        pick = rng.below(n - 1) if n > 1 else 0
        if n > 1 and pick >= own:
            pick += 1
        partner_index = ctx.sources[pick][0]
        crop = params["crop"]
        side = max(ctx.size, crop)
        draw = advanced.draw_pairing((side, side), (side, side), crop, rng)
        params.update(partner_index=partner_index, **draw._asdict())
    if job.technique in WARP_TECHNIQUES:
        params.update(fill=ctx.fill.mode, cval=ctx.fill.cval, interp=ctx.interp)
    elif job.technique in KERNEL_TECHNIQUES:
        params.update(fill=ctx.fill.mode, cval=ctx.fill.cval)
    params["size"] = ctx.size
    params["source_index"] = job.source_index
    return params


def _run_group(jobs: list[Job], ctx: RunContext) -> list[ManifestEntry]:
    """Run all jobs of one source image; the resized source is loaded once."""
    rows = []
    first = jobs[0]
    source_file = _relpath(first.source_path, ctx.manifest_dir)
    try:
        img = prepare_source(first.source_path, ctx.size)
    except (OSError, ValueError) as exc:
        log.error("cannot decode %s: %s", first.source_path, exc)
        for job in jobs:
            rows.append(
                ManifestEntry(None, source_file, job.label, job.technique, job.replicate,
                              {"source_index": job.source_index, "error": str(exc)},
                              f"0x{job.seed:016x}", None, None, None)
            )
        return rows

    partners: dict[Path, np.ndarray] = {}
    label_dir = ctx.output_dir / first.label
    label_dir.mkdir(parents=True, exist_ok=True)
    for job in jobs:
        params = job_params(job, ctx)
        partner = None
        try:
            if job.technique == "sample-pairing":
                ppath = dict(ctx.sources)[params["partner_index"]]
                params["partner_file"] = _relpath(ppath, ctx.manifest_dir)
                if ppath not in partners:
                    partners[ppath] = prepare_source(ppath, ctx.size)
                partner = partners[ppath]
        except (OSError, ValueError) as exc:
            params["error"] = f"partner: {exc}"
            rows.append(ManifestEntry(None, source_file, job.label, job.technique, job.replicate,
                                      params, f"0x{job.seed:016x}", None, None, None))
            continue
        out = render(img, job.technique, params, job.seed, partner)
        data = encode_png(out)
        target = label_dir / job.output_name
        target.write_bytes(data)
        rows.append(
            ManifestEntry(
                output_file=_relpath(target, ctx.manifest_dir),
                source_file=source_file,
                label=job.label,
                technique=job.technique,
                replicate=job.replicate,
                params=params,
                seed=f"0x{job.seed:016x}",
                width=int(out.shape[1]),
                height=int(out.shape[0]),
                sha256=hashlib.sha256(data).hexdigest(),
            )
        )
    return rows


def write_manifest(rows: list[ManifestEntry], path: Path) -> None:
    """Write JSON lines atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".manifest-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(row.to_json() + "\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    with open(path, encoding="utf-8") as fh:
        return [ManifestEntry.from_json(line) for line in fh if line.strip()]


def execute(jobs: list[Job], config: PipelineConfig, dataset=None) -> list[ManifestEntry]:
    """Run every job, write outputs and the manifest, return the manifest rows.

    ``dataset`` supplies sample-pairing partners; it defaults to the
    sources referenced by ``jobs``.
    """
    manifest_file = config.manifest_file
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        manifest_file.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PipelineError(f"cannot create output directory: {exc}", 0, len(jobs)) from exc

    if dataset is None:
        sources = sorted({(j.source_index, j.source_path) for j in jobs})
    else:
        sources = sorted((e.source_index, e.path) for e in dataset)
    ctx = RunContext(
        specs={s.technique: s for s in config.techniques},
        size=config.size,
        fill=config.fill,
        interp=config.interp,
        output_dir=config.output_dir,
        manifest_dir=manifest_file.parent,
        sources=tuple(sources),
    )
    ordered = sorted(jobs, key=Job.sort_key)
    groups = [list(g) for _, g in groupby(ordered, key=lambda j: j.source_index)]

    rows: list[ManifestEntry] = []
    try:
        if config.jobs == 1 or len(groups) <= 1:
            for g in groups:
                rows.extend(_run_group(g, ctx))
        else:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(_run_group, g, ctx) for g in groups]
                for fut in futures:
                    rows.extend(fut.result())
    except OSError as exc:
        raise PipelineError(f"write failed: {exc}", len(rows), len(jobs)) from exc

    rows.sort(key=ManifestEntry.sort_key)
    write_manifest(rows, manifest_file)
    return rows


def load_dataset(config: PipelineConfig) -> list[DatasetEntry]:
    entries = scan_dataset(config.input_dir, config.label_rule).entries
    if config.balance_ratio is not None:
        rng = RandomStream(derive_seed(config.master_seed, 0, BALANCE_CODE, 0))
        entries = oversample_minority(entries, config.balance_ratio, rng)
    return entries


def run(config: PipelineConfig) -> list[ManifestEntry]:
    dataset = load_dataset(config)
    return execute(plan(config, dataset), config, dataset)


def replay(row: ManifestEntry, base_dir: str | Path) -> bytes:
    """Regenerate one output's PNG bytes from its manifest row.

    Relative paths in the row are resolved against ``base_dir`` (the
    directory holding the manifest).
    """
    if row.failed:
        raise ValueError("cannot replay a failed job")
    base = Path(base_dir)
    params = row.params
    size = params["size"]
    img = prepare_source(base / row.source_file, size)
    partner = None
    if row.technique == "sample-pairing":
        partner = prepare_source(base / params["partner_file"], size)
    return encode_png(render(img, row.technique, params, row.seed_int, partner))


def verify_manifest(path: str | Path) -> list[str]:
    """Check every manifest row against its file; returns a list of problems."""
    path = Path(path)
    base = path.parent
    rows = read_manifest(path)
    problems = []
    seen = set()
    for row in rows:
        if row.failed:
            problems.append(f"failed job: {row.source_file} {row.technique}#{row.replicate}: "
                            f"{row.params.get('error', 'unknown error')}")
            continue
        if row.output_file in seen:
            problems.append(f"duplicate row for {row.output_file}")
        seen.add(row.output_file)
        target = base / row.output_file
        try:
            digest = hashlib.sha256(target.read_bytes()).hexdigest()
        except OSError:
            problems.append(f"missing output: {row.output_file}")
            continue
        if digest != row.sha256:
            problems.append(f"sha256 mismatch: {row.output_file}")
    return problems
