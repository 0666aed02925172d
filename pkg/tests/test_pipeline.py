import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from augforge.core import FillMode
from augforge.dataset import DatasetEntry, scan_dataset
from augforge.pipeline import (
    MANIFEST_NAME,
    PipelineConfig,
    execute,
    load_dataset,
    plan,
    read_manifest,
    replay,
    run,
    verify_manifest,
)
from augforge.preview import preview_sheet
from augforge.sampling import CORE_TECHNIQUES, TECHNIQUES, TechniqueSpec

from conftest import write_pets_fixture


def config(src, out, techniques, seed=7, **kw):
    specs = [TechniqueSpec(t) if isinstance(t, str) else t for t in techniques]
    kw.setdefault("size", 32)
    return PipelineConfig(src, out, specs, seed, **kw)


def fake_dataset(n):
    return [DatasetEntry(Path(f"img_{i}.png"), "x", i) for i in range(n)]


@pytest.mark.parametrize(
    "techniques, n, expected",
    [(["rotate"], 23, 161), (list(CORE_TECHNIQUES), 23, 736), (["shear"], 1, 3),
     (["shift"], 23, 92), (["brightness"], 23, 115)],
)
def test_plan_counts(techniques, n, expected):
    assert len(plan(config(".", "o", techniques), fake_dataset(n))) == expected


def test_plan_order_and_seeds():
    jobs = plan(config(".", "o", ["zoom", "rotate"]), fake_dataset(2))
    keys = [(j.source_index, TECHNIQUES[j.technique].code, j.replicate) for j in jobs]
    assert keys == sorted(keys)
    assert len({j.seed for j in jobs}) == len(jobs)
    assert jobs[0].output_name.startswith("Rotated_img_0_0_")
    assert jobs[0].output_name.endswith(f"{jobs[0].seed >> 32:08x}.png")


def test_config_validation():
    with pytest.raises(ValueError):
        config(".", "o", ["rotate", "rotate"])
    with pytest.raises(ValueError):
        config(".", "o", ["rotate"], size=0)
    with pytest.raises(ValueError):
        config(".", "o", ["rotate"], interp="cubic")


ALL = [t for t in TECHNIQUES]


@pytest.fixture
def full_run(pets, tmp_path):
    cfg = config(pets, tmp_path / "out", ALL)
    rows = run(cfg)
    return cfg, rows


def test_run_writes_everything(full_run):
    cfg, rows = full_run
    expected = 6 * sum(TechniqueSpec(t).multiplicity for t in ALL)
    files = sorted(p for p in cfg.output_dir.rglob("*.png"))
    assert len(rows) == len(files) == expected
    assert {p.parent.name for p in files} == {"cats", "dogs"}
    for row in rows:
        data = (cfg.output_dir / row.output_file).read_bytes()
        assert hashlib.sha256(data).hexdigest() == row.sha256
        with Image.open(cfg.output_dir / row.output_file) as im:
            assert im.mode == "RGB"
            side = 224 if row.technique == "sample-pairing" else 32
            assert im.size == (row.width, row.height) == (side, side)


def test_manifest_format(full_run):
    cfg, rows = full_run
    raw = cfg.manifest_file.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode("utf-8").splitlines()
    first = json.loads(lines[0])
    assert list(first) == ["output_file", "source_file", "label", "technique", "replicate",
                           "params", "seed", "width", "height", "sha256"]
    keys = [(r.params["source_index"], TECHNIQUES[r.technique].code, r.replicate) for r in rows]
    assert keys == sorted(keys)
    assert read_manifest(cfg.manifest_file) == rows


def test_replay_every_row(full_run):
    cfg, rows = full_run
    for row in rows:
        data = replay(row, cfg.manifest_file.parent)
        assert hashlib.sha256(data).hexdigest() == row.sha256, row.output_file


def test_verify_detects_corruption(full_run):
    cfg, rows = full_run
    assert verify_manifest(cfg.manifest_file) == []
    target = cfg.output_dir / rows[3].output_file
    data = bytearray(target.read_bytes())
    data[-20] ^= 0xFF
    target.write_bytes(bytes(data))
    problems = verify_manifest(cfg.manifest_file)
    assert len(problems) == 1 and rows[3].output_file in problems[0]


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file()}


def test_deterministic_and_worker_independent(pets, tmp_path):
    techniques = ["rotate", "noise-gaussian", "sample-pairing", "erase"]
    a, b, c = (tmp_path / k for k in "abc")
    run(config(pets, a, techniques))
    run(config(pets, b, techniques))
    run(config(pets, c, techniques, jobs=3))
    assert tree(a) == tree(b) == tree(c)
    assert (a / MANIFEST_NAME).exists()


def test_seed_changes_outputs(pets, tmp_path):
    r1 = run(config(pets, tmp_path / "a", ["rotate"], seed=1))
    r2 = run(config(pets, tmp_path / "b", ["rotate"], seed=2))
    assert {r.sha256 for r in r1}.isdisjoint({r.sha256 for r in r2})


def test_manifest_elsewhere(pets, tmp_path):
    cfg = config(pets, tmp_path / "out", ["flip"], manifest_path=tmp_path / "m" / "run.jsonl")
    run(cfg)
    assert verify_manifest(tmp_path / "m" / "run.jsonl") == []
    row = read_manifest(tmp_path / "m" / "run.jsonl")[0]
    assert row.output_file.startswith("../out/")


def test_sample_pairing_partner_is_other_image(full_run):
    _, rows = full_run
    for row in rows:
        if row.technique == "sample-pairing":
            assert row.params["partner_index"] != row.params["source_index"]
            assert row.params["partner_file"] != row.source_file


def test_decode_failure_is_recorded(pets, tmp_path):
    dataset = scan_dataset(pets).entries
    victim = dataset[1].path
    victim.write_bytes(b"garbage")  # corrupt after the scan
    cfg = config(pets, tmp_path / "out", ["shear"])
    rows = execute(plan(cfg, dataset), cfg, dataset)
    failed = [r for r in rows if r.failed]
    assert len(failed) == 3 and all("error" in r.params for r in failed)
    assert len(rows) == 6 * 3
    assert any("failed job" in p for p in verify_manifest(cfg.manifest_file))


def test_balance_in_pipeline(tmp_path):
    src = write_pets_fixture(tmp_path / "p", n=5, size_base=16)  # 3 cats, 2 dogs
    cfg = config(src, tmp_path / "o", ["flip"], balance_ratio=1.0)
    ds = load_dataset(cfg)
    assert len(ds) == 6
    rows = run(cfg)
    assert len(rows) == 24
    assert {r.params["source_index"] for r in rows} == set(range(6))


def test_fill_recorded_and_used(pets, tmp_path):
    cfg = config(pets, tmp_path / "o", ["rotate"], fill=FillMode("constant", 9), interp="nearest")
    rows = run(cfg)
    assert rows[0].params["fill"] == "constant" and rows[0].params["cval"] == 9
    assert rows[0].params["interp"] == "nearest"
    assert replay(rows[0], cfg.output_dir) == (cfg.output_dir / rows[0].output_file).read_bytes()


def test_preview_sheet(pets):
    entries = scan_dataset(pets).entries
    sheet = preview_sheet(entries[:1], "rotate", 3, seed=5)
    assert sheet.shape == (128, 512, 3)
    original = sheet[:, :128].astype(int)
    for k in range(1, 4):
        assert np.abs(sheet[:, 128 * k:128 * (k + 1)] - original).mean() > 1.0
    flip1 = preview_sheet(entries, "flip", 2, seed=11)
    flip2 = preview_sheet(entries, "flip", 2, seed=11)
    assert flip1.shape == (6 * 128, 3 * 128, 3) and np.array_equal(flip1, flip2)
    paired = preview_sheet(entries, "sample-pairing", 1, seed=1, max_rows=2)
    assert paired.shape == (256, 256, 3)
    with pytest.raises(ValueError):
        preview_sheet(entries, "rotate", 0, seed=1)
