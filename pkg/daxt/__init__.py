"""DAxT: valuing interceptions and tackles by the threat they prevented."""

from importlib import metadata

try:
    __version__ = metadata.version("daxt")
except metadata.PackageNotFoundError:  # pragma: no cover - during local dev
    __version__ = "0.0.0"

__all__ = ["__version__"]
