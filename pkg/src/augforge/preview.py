"""Contact sheets: each source next to a few augmented samples."""

from __future__ import annotations

import numpy as np

from .core import FillMode, new_image, resize_bilinear
from .pipeline import Job, RunContext, job_params, prepare_source, render
from .rng import derive_seed
from .sampling import TechniqueSpec

CELL = 128
MAX_ROWS = 8


def preview_sheet(
    entries,
    technique: str | TechniqueSpec,
    count: int,
    seed: int,
    *,
    max_rows: int = MAX_ROWS,
    fill: FillMode | None = None,
    interp: str = "bilinear",
) -> np.ndarray:
    """Grid with one row per source: the original, then ``count`` samples.

    Cells are 128x128. Samples are rendered at cell resolution with the
    job seeds a ``run`` under ``seed`` would use.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    spec = technique if isinstance(technique, TechniqueSpec) else TechniqueSpec(technique)
    entries = sorted(entries, key=lambda e: e.source_index)
    shown = entries[:max_rows]
    sheet = new_image(CELL * (count + 1), CELL * max(1, len(shown)), 0)

    ctx = RunContext(
        specs={spec.technique: spec},
        size=CELL,
        fill=fill or FillMode(),
        interp=interp,
        output_dir=None,
        manifest_dir=None,
        sources=tuple((e.source_index, e.path) for e in entries),
    )
    paths = dict(ctx.sources)
    cache: dict[int, np.ndarray] = {}

    def source(idx: int) -> np.ndarray:
        if idx not in cache:
            cache[idx] = prepare_source(paths[idx], CELL)
        return cache[idx]

    for r, entry in enumerate(shown):
        original = source(entry.source_index)
        y0 = r * CELL
        sheet[y0 : y0 + CELL, :CELL] = original
        for k in range(count):
            job_seed = derive_seed(seed, entry.source_index, spec.code, k)
            job = Job(entry.source_index, entry.path, entry.label, spec.technique, k, job_seed)
            params = job_params(job, ctx)
            partner = source(params["partner_index"]) if "partner_index" in params else None
            out = render(original, spec.technique, params, job_seed, partner)
            if out.shape[:2] != (CELL, CELL):
                out = resize_bilinear(out, CELL, CELL)
            x0 = (k + 1) * CELL
            sheet[y0 : y0 + CELL, x0 : x0 + CELL] = out
    return sheet
