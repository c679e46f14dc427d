"""Utility helpers for daxt."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
from pathlib import Path
from typing import Any, Iterable, Iterator, List, Sequence, TypeVar

import pandas as pd

T = TypeVar("T")


def chunked(iterable: Iterable[T], size: int) -> Iterator[List[T]]:
    """Yield fixed-size chunks from *iterable*."""

    iterator = iter(iterable)
    while True:
        block = list(itertools.islice(iterator, size))
        if not block:
            break
        yield block


def ensure_directory(path: Path) -> None:
    """Create directory if missing."""

    path.mkdir(parents=True, exist_ok=True)


def format_value(value: Any) -> str:
    """Render a CSV cell; floats use the shortest round-trip form."""

    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Serialize rows to CSV text with ``\\n`` line endings."""

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file deterministically."""

    ensure_directory(path.parent)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def read_csv_frame(path: Path, **kwargs: Any) -> pd.DataFrame:
    """Read a CSV with exact float round-trip."""

    kwargs.setdefault("float_precision", "round_trip")
    return pd.read_csv(path, **kwargs)


def write_json(path: Path, payload: Any) -> Path:
    ensure_directory(path.parent)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def text_digest(text: str) -> str:
    return hashlib.blake2s(text.encode("utf-8"), digest_size=16).hexdigest()


def file_digest(path: Path) -> str:
    """Content hash of a file (blake2s, 128-bit)."""

    digest = hashlib.blake2s(digest_size=16)
    with path.open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()
