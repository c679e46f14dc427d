"""Manifest writer for reproducibility."""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping

from daxt import __version__
from daxt.utils import file_digest, write_json

MANIFEST_NAME = "MANIFEST.json"


@dataclass
class Manifest:
    path: Path
    data: Dict[str, Any]

    def save(self) -> None:
        write_json(self.path, self.data)


def load_manifest(path: Path) -> Manifest:
    if path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        data = _create_manifest_stub()
    return Manifest(path=path, data=data)


def _relative_name(path: Path, root: Path) -> str:
    try:
        return path.resolve().relative_to(root.resolve()).as_posix()
    except ValueError:
        return path.name


def digest_files(paths: Iterable[Path], root: Path) -> Dict[str, str]:
    return {_relative_name(path, root): file_digest(path) for path in paths if path.is_file()}


def record_command(
    out_dir: Path,
    command: str,
    *,
    config: Mapping[str, Any],
    inputs: Iterable[Path] = (),
    outputs: Iterable[Path] = (),
) -> Path:
    """Record *command*'s config echo plus input and output hashes in ``<out>/MANIFEST.json``.

    Entries are keyed by command name so a rerun replaces its own entry; nothing
    time-dependent is stored.
    """

    manifest = load_manifest(out_dir / MANIFEST_NAME)
    manifest.data.setdefault("commands", {})[command] = {
        "config": dict(config),
        "inputs": digest_files(inputs, out_dir),
        "outputs": digest_files(outputs, out_dir),
    }
    manifest.save()
    return manifest.path


def _create_manifest_stub() -> Dict[str, Any]:
    return {
        "python": platform.python_version(),
        "package_versions": {"daxt": __version__},
        "commands": {},
    }
