"""Command-line entry point: ``run``, ``preview``, ``stats`` and ``verify``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every failure
writes one ``augforge: error[<kind>]: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
import time
from pathlib import Path

from .core import FILL_MODES, FillMode, save_png
from .dataset import LABEL_RULES, scan_dataset, stats_report
from .geometry import INTERPOLATIONS
from .pipeline import (
    PipelineConfig,
    PipelineError,
    execute,
    load_dataset,
    plan,
    verify_manifest,
)
from .preview import preview_sheet
from .rng import parse_seed
from .sampling import CORE_TECHNIQUES, TechniqueSpec, resolve_technique

PROG = "augforge"

CONFIG_KEYS = {
    "input_dir", "output_dir", "techniques", "master_seed", "size", "fill", "cval",
    "interp", "label_rule", "balance_ratio", "jobs", "manifest_path", "multiplicity",
    "isotropic_zoom",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _fail("usage", message, 2)


def _fail(kind: str, message: str, code: int):
    print(f"{PROG}: error[{kind}]: {message}", file=sys.stderr)
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Seeded, reproducible image data augmentation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="augment a dataset")
    run.add_argument("--input", type=Path)
    run.add_argument("--output", type=Path)
    run.add_argument("--techniques", help="comma-separated technique names, or 'all'")
    run.add_argument("--seed")
    run.add_argument("--size", type=int)
    run.add_argument("--fill", choices=FILL_MODES)
    run.add_argument("--cval", type=int)
    run.add_argument("--interp", choices=INTERPOLATIONS)
    run.add_argument("--multiplicity", help="per-technique counts, e.g. rotate=2,flip=1")
    run.add_argument("--manifest", type=Path)
    run.add_argument("--label-rule", choices=LABEL_RULES)
    run.add_argument("--balance", type=float)
    run.add_argument("--isotropic-zoom", action="store_true", default=None)
    run.add_argument("--jobs", type=int)
    run.add_argument("--config", type=Path, help="JSON file with PipelineConfig field names")

    prev = sub.add_parser("preview", help="render a contact sheet for one technique")
    prev.add_argument("--input", type=Path, required=True)
    prev.add_argument("--technique", required=True)
    prev.add_argument("--count", type=int, default=4)
    prev.add_argument("--seed")
    prev.add_argument("--out", type=Path, required=True)
    prev.add_argument("--label-rule", choices=LABEL_RULES, default="parent-dir")

    st = sub.add_parser("stats", help="per-class image counts")
    st.add_argument("--input", type=Path, required=True)
    st.add_argument("--label-rule", choices=LABEL_RULES, default="parent-dir")

    ver = sub.add_parser("verify", help="check output files against a manifest")
    ver.add_argument("--manifest", type=Path, required=True)
    return parser


def parse_techniques(text) -> list[str]:
    if isinstance(text, str):
        tokens = [t.strip() for t in text.split(",") if t.strip()]
    else:
        tokens = list(text)
    names: list[str] = []
    for tok in tokens:
        expanded = CORE_TECHNIQUES if isinstance(tok, str) and tok.lower() == "all" else [tok]
        for name in expanded:
            try:
                canon = resolve_technique(name)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if canon not in names:
                names.append(canon)
    if not names:
        raise UsageError("no techniques selected")
    return names


def parse_multiplicity(text) -> dict[str, int]:
    if isinstance(text, dict):
        pairs = list(text.items())
    else:
        pairs = []
        for item in (t.strip() for t in text.split(",") if t.strip()):
            if "=" not in item:
                raise UsageError(f"bad multiplicity {item!r}; expected TECH=K")
            pairs.append(tuple(item.split("=", 1)))
    out = {}
    for name, k in pairs:
        try:
            canon = resolve_technique(str(name))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        try:
            out[canon] = int(k)
        except ValueError:
            raise UsageError(f"bad multiplicity count {k!r} for {name}") from None
    return out


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _technique_specs(techniques, multiplicity: dict[str, int], isotropic: bool) -> list[TechniqueSpec]:
    entries = []
    for item in techniques:
        if isinstance(item, dict):
            item = dict(item)
            try:
                name = resolve_technique(item.pop("technique"))
            except (KeyError, ValueError) as exc:
                raise UsageError(f"bad technique entry: {exc}") from None
            entries.append((name, item.get("multiplicity"), dict(item.get("params", {}))))
        else:
            entries.extend((n, None, {}) for n in parse_techniques([item]))

    names = [e[0] for e in entries]
    stray = set(multiplicity) - set(names)
    if stray:
        raise UsageError(f"multiplicity given for unselected technique(s): {', '.join(sorted(stray))}")

    specs = []
    for name, mult, params in entries:
        if name in multiplicity:
            mult = multiplicity[name]
        if name == "zoom" and isotropic:
            params["isotropic"] = True
        try:
            specs.append(TechniqueSpec(name, mult, params))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return specs


def config_from_args(args) -> tuple[PipelineConfig, bool]:
    """Merge ``--config`` with flags (flags win). Returns (config, seed_was_drawn)."""
    cfg = _load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, default=None):
        return flag_value if flag_value is not None else cfg.get(key, default)

    input_dir = pick(args.input, "input_dir")
    output_dir = pick(args.output, "output_dir")
    if input_dir is None:
        raise UsageError("run requires --input")
    if output_dir is None:
        raise UsageError("run requires --output")

    techniques = pick(args.techniques, "techniques")
    if techniques is None:
        raise UsageError("run requires --techniques (use 'all' for the seven defaults)")
    if isinstance(techniques, str):
        techniques = parse_techniques(techniques)

    multiplicity = parse_multiplicity(pick(args.multiplicity, "multiplicity", {}))
    isotropic = bool(pick(args.isotropic_zoom, "isotropic_zoom", False))
    specs = _technique_specs(techniques, multiplicity, isotropic)

    seed_text = pick(args.seed, "master_seed")
    drawn = seed_text is None
    try:
        seed = secrets.randbits(64) if drawn else parse_seed(seed_text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    fill_value = pick(args.fill, "fill", "reflect")
    cval = pick(args.cval, "cval", 0)
    if isinstance(fill_value, dict):
        cval = fill_value.get("cval", cval) if args.cval is None else cval
        fill_value = fill_value.get("mode", "reflect")

    try:
        config = PipelineConfig(
            input_dir=Path(input_dir),
            output_dir=Path(output_dir),
            techniques=specs,
            master_seed=seed,
            size=int(pick(args.size, "size", 512)),
            fill=FillMode(fill_value, int(cval)),
            interp=pick(args.interp, "interp", "bilinear"),
            label_rule=pick(args.label_rule, "label_rule", "parent-dir"),
            balance_ratio=pick(args.balance, "balance_ratio"),
            jobs=int(pick(args.jobs, "jobs", 1)),
            manifest_path=pick(args.manifest, "manifest_path"),
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if config.label_rule not in LABEL_RULES:
        raise UsageError(f"unknown label rule {config.label_rule!r}")
    return config, drawn


def cmd_run(args) -> int:
    config, drawn = config_from_args(args)
    print(f"seed: {config.master_seed:#018x}" + (" (drawn from system entropy)" if drawn else ""))
    started = time.perf_counter()
    try:
        dataset = load_dataset(config)
    except FileNotFoundError as exc:
        _fail("not-found", str(exc), 1)
    jobs = plan(config, dataset)
    try:
        rows = execute(jobs, config, dataset)
    except PipelineError as exc:
        print(f"partial run: {exc.completed} of {exc.total} jobs completed", file=sys.stderr)
        _fail("runtime", str(exc), 1)
    failed = [r for r in rows if r.failed]
    print(f"sources: {len(dataset)}")
    print(f"jobs: {len(jobs)}")
    print(f"written: {len(rows) - len(failed)}")
    print(f"failed: {len(failed)}")
    print(f"manifest: {config.manifest_file}")
    print(f"elapsed: {time.perf_counter() - started:.1f}s")
    if failed:
        _fail("runtime", f"{len(failed)} job(s) failed; see manifest rows with null output_file", 1)
    return 0


def cmd_preview(args) -> int:
    try:
        technique = resolve_technique(args.technique)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    try:
        seed = secrets.randbits(64) if args.seed is None else parse_seed(args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.seed is None:
        print(f"seed: {seed:#018x} (drawn from system entropy)")
    try:
        entries = scan_dataset(args.input, args.label_rule).entries
    except FileNotFoundError as exc:
        _fail("not-found", str(exc), 1)
    if not entries:
        _fail("runtime", f"no images in {args.input}", 1)
    sheet = preview_sheet(entries, technique, args.count, seed)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        save_png(sheet, args.out)
    except OSError as exc:
        _fail("runtime", f"cannot write {args.out}: {exc}", 1)
    print(f"preview: {args.out} ({sheet.shape[1]}x{sheet.shape[0]})")
    return 0


def cmd_stats(args) -> int:
    try:
        result = scan_dataset(args.input, args.label_rule)
    except FileNotFoundError as exc:
        _fail("not-found", str(exc), 1)
    sys.stdout.write(stats_report(result.entries))
    if result.skipped:
        print(f"skipped: {len(result.skipped)} undecodable file(s)")
    return 0


def cmd_verify(args) -> int:
    if not args.manifest.is_file():
        _fail("not-found", f"manifest not found: {args.manifest}", 1)
    try:
        problems = verify_manifest(args.manifest)
    except (ValueError, TypeError, KeyError) as exc:
        _fail("runtime", f"unreadable manifest: {exc}", 1)
    if problems:
        for p in problems:
            print(f"{PROG}: error[verify]: {p}", file=sys.stderr)
        return 1
    print(f"ok: {args.manifest}")
    return 0


COMMANDS = {"run": cmd_run, "preview": cmd_preview, "stats": cmd_stats, "verify": cmd_verify}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format=f"{PROG}: %(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{PROG}: error[usage]: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
