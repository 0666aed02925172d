"""Dataset discovery, labeling, class statistics and random oversampling."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .rng import RandomStream

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png"}
LABEL_RULES = ("parent-dir", "stem")

# Oxford-pets style names: <class>_<number>.jpg
DEFAULT_STEM_PATTERN = r"^(?P<label>.+?)_\d+$"


@dataclass(frozen=True)
class DatasetEntry:
    path: Path
    label: str
    source_index: int


@dataclass
class ScanResult:
    entries: list[DatasetEntry] = field(default_factory=list)
    skipped: list[Path] = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def label_for(path: Path, rule: str = "parent-dir", pattern: str = DEFAULT_STEM_PATTERN) -> str:
    if rule == "parent-dir":
        return path.parent.name
    if rule == "stem":
        m = re.match(pattern, path.stem)
        if m is None:
            return path.stem
        return m.group("label") if "label" in m.re.groupindex else m.group(1)
    raise ValueError(f"unknown label rule {rule!r}; expected one of {LABEL_RULES}")


def _decodes(path: Path) -> bool:
    try:
        with Image.open(path) as im:
            im.verify()
        return True
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError):
        return False


def scan_dataset(
    input_dir: str | Path,
    label_rule: str = "parent-dir",
    pattern: str = DEFAULT_STEM_PATTERN,
) -> ScanResult:
    """Collect decodable JPEG/PNG files under ``input_dir`` recursively.

    Entries are numbered from 0 in lexicographic order of their path
    relative to ``input_dir``. Files that fail to decode are logged and
    listed in ``skipped``.
    """
    root = Path(input_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"input directory not found: {root}")
    if label_rule not in LABEL_RULES:
        raise ValueError(f"unknown label rule {label_rule!r}; expected one of {LABEL_RULES}")

    candidates = sorted(
        (p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    result = ScanResult()
    for path in candidates:
        if not _decodes(path):
            log.warning("skipping undecodable image: %s", path)
            result.skipped.append(path)
            continue
        label = label_for(path, label_rule, pattern)
        result.entries.append(DatasetEntry(path, label, len(result.entries)))
    if not result.entries:
        log.warning("no images found in %s", root)
    return result


def class_counts(entries) -> dict[str, int]:
    return dict(sorted(Counter(e.label for e in entries).items()))


def oversample_minority(entries, target_ratio: float, rng: RandomStream) -> list[DatasetEntry]:
    """Random oversampling: duplicate minority-class entries until balanced.

    Every class ends with at least ``ceil(target_ratio * majority)``
    entries. Duplicates are drawn uniformly with replacement from the
    class's original entries, classes in sorted label order, and receive
    fresh source indices after the current maximum.
    """
    entries = list(entries)
    if not 0 < target_ratio <= 1:
        raise ValueError(f"balance ratio must be in (0, 1], got {target_ratio}")
    counts = class_counts(entries)
    if len(counts) < 2:
        log.warning("oversampling needs at least two classes; dataset left unchanged")
        return entries

    majority = max(counts.values())
    # round away float noise such as 0.3 * 10 = 3.0000000000000004 before the ceiling
    target = math.ceil(round(target_ratio * majority, 9))
    next_index = max(e.source_index for e in entries) + 1
    out = list(entries)
    for label, count in counts.items():
        members = [e for e in entries if e.label == label]
        for _ in range(max(0, target - count)):
            pick = members[rng.below(len(members))]
            out.append(replace(pick, source_index=next_index))
            next_index += 1
    return out


def stats_report(entries) -> str:
    counts = class_counts(entries)
    total = sum(counts.values())
    lines = [f"total: {total} images", f"classes: {len(counts)}"]
    width = max((len(k) for k in counts), default=0)
    for label, n in counts.items():
        lines.append(f"  {label:<{width}}  {n}")
    if counts:
        ratio = min(counts.values()) / max(counts.values())
        lines.append(f"minority/majority ratio: {ratio:.2f}")
    return "\n".join(lines) + "\n"
