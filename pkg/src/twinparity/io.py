"""Counts CSV, distribution CSV and JSON serialization.

Counts files look like::

    # pulses=1000000 seed=7 regime=mm mean_n=0.5 ...
    k,l,count
    0,0,994012
    1,1,2417
    ...

Zero cells are omitted.  Metadata values are written with ``repr`` for floats
so a round trip is exact.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .errors import InvalidParameter, MalformedCounts
from .estimate import JointCounts
from .fock import PhotonDistribution

__all__ = [
    "format_counts_csv",
    "parse_counts_csv",
    "read_counts_csv",
    "write_counts_csv",
    "format_distribution_csv",
    "dumps_json",
]

PathLike = Union[str, Path]


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if any(c.isspace() for c in text) or "=" in text:
        raise InvalidParameter(f"metadata value {text!r} may not contain whitespace or '='")
    return text


def _header(fields: dict) -> str:
    return "# " + " ".join(f"{k}={_format_value(v)}" for k, v in fields.items())


def format_counts_csv(counts: JointCounts) -> str:
    meta = {k: v for k, v in counts.metadata.items() if k != "pulses"}
    lines = [_header({"pulses": counts.total_pulses, **meta}), "k,l,count"]
    ks, ls = np.nonzero(counts.counts)
    for k, l in zip(ks.tolist(), ls.tolist()):
        lines.append(f"{k},{l},{int(counts.counts[k, l])}")
    return "\n".join(lines) + "\n"


def write_counts_csv(counts: JointCounts, path: PathLike) -> None:
    Path(path).write_text(format_counts_csv(counts), encoding="utf-8")


def _parse_meta_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_counts_csv(text: str) -> JointCounts:
    """Parse the sparse counts format; raises :class:`MalformedCounts`."""
    meta: dict = {}
    cells: dict = {}
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" not in token:
                    raise MalformedCounts(f"line {lineno}: bad header token {token!r}")
                key, value = token.split("=", 1)
                meta[key] = _parse_meta_value(value)
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts == ["k", "l", "count"]:
            saw_header = True
            continue
        if len(parts) != 3:
            raise MalformedCounts(f"line {lineno}: expected 'k,l,count', got {raw!r}")
        try:
            k, l, c = (int(p) for p in parts)
        except ValueError:
            raise MalformedCounts(f"line {lineno}: non-integer field in {raw!r}") from None
        if k < 0 or l < 0 or c < 0:
            raise MalformedCounts(f"line {lineno}: negative value in {raw!r}")
        if (k, l) in cells:
            raise MalformedCounts(f"line {lineno}: duplicate cell ({k}, {l})")
        cells[(k, l)] = c

    pulses = meta.get("pulses")
    if not isinstance(pulses, int) or pulses <= 0:
        raise MalformedCounts("missing or invalid '# pulses=<N>' header")
    if not cells and not saw_header:
        raise MalformedCounts("no count rows found")
    shape = (max((k for k, _ in cells), default=0) + 1, max((l for _, l in cells), default=0) + 1)
    matrix = np.zeros(shape, dtype=np.int64)
    for (k, l), c in cells.items():
        matrix[k, l] = c
    if int(matrix.sum()) > pulses:
        raise MalformedCounts(f"counts sum to {int(matrix.sum())}, more than pulses={pulses}")
    return JointCounts(matrix, pulses, meta)


def read_counts_csv(path: PathLike) -> JointCounts:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedCounts(f"cannot read {path}: {exc}") from None
    return parse_counts_csv(text)


def format_distribution_csv(dist: PhotonDistribution, header: dict | None = None) -> str:
    lines = [_header(header)] if header else []
    lines.append("n,probability")
    lines.extend(f"{n},{p!r}" for n, p in enumerate(dist.probs.tolist()))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, non-finite floats as null."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
