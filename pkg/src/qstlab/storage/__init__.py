"""File repositories for key sets, reports, tables and run manifests."""

from .repository import (
    BaseRepository,
    KeySetRepository,
    ManifestRepository,
    ReportRepository,
    sha256_file,
)

__all__ = [
    "BaseRepository",
    "KeySetRepository",
    "ManifestRepository",
    "ReportRepository",
    "sha256_file",
]
