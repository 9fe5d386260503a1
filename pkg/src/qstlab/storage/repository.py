"""
File Repositories

This module implements the repository pattern for on-disk artifacts, giving
the service layer one place to read and write key sets, states, reports,
tables and run manifests. Every writer produces UTF-8 text with ``\\n`` line
endings and no timestamps, so equal inputs give equal bytes.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..exceptions import KeyFileError
from ..models.base import BaseModel
from ..models.keysets import KeySet
from ..models.reports import RunManifest
from ..models.states import PureState

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
M = TypeVar("M", bound=BaseModel)

FLOAT_FORMAT = "%.17g"


def _parse_codes(hexes: List[str], n: int) -> np.ndarray:
    codes = []
    for text in hexes:
        cleaned = str(text).strip().lower().removeprefix("0x")
        try:
            code = int(cleaned, 16)
        except ValueError as e:
            raise KeyFileError(f"Invalid hex key {text!r}") from e
        if code < 0 or code.bit_length() > 2 * n:
            raise KeyFileError(f"Key {text!r} does not fit {2 * n} bits")
        codes.append(code)
    return np.array(codes, dtype=np.int64)


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class BaseRepository:
    """
    Base repository class with common file operations.
    """

    def __init__(self, root: Optional[PathLike] = None):
        """Initialize repository; relative paths resolve against ``root``."""
        self.root = Path(root) if root is not None else None

    def resolve(self, path: PathLike) -> Path:
        candidate = Path(path)
        if self.root is not None and not candidate.is_absolute():
            candidate = self.root / candidate
        return candidate

    def write_text(self, path: PathLike, text: str) -> Path:
        """Write ``text`` as UTF-8, creating parent directories."""
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info(f"Wrote {target}")
        return target

    def read_text(self, path: PathLike) -> str:
        target = self.resolve(path)
        try:
            with open(target, "r", encoding="utf-8") as handle:
                return handle.read()
        except (OSError, UnicodeDecodeError) as e:
            raise KeyFileError(f"Cannot read {target}: {e}") from e

    def write_json(self, path: PathLike, data: Any) -> Path:
        return self.write_text(path, json.dumps(data, indent=2) + "\n")

    def read_json(self, path: PathLike) -> Any:
        try:
            return json.loads(self.read_text(path))
        except json.JSONDecodeError as e:
            raise KeyFileError(f"{path} is not valid JSON: {e}") from e

    def hash(self, path: PathLike) -> str:
        return sha256_file(self.resolve(path))


class KeySetRepository(BaseRepository):
    """
    Repository for key-set files.

    ``.json`` files hold {"n", "epsilon", "certified", "beta_max", "keys"}
    with keys as fixed-width lowercase hex. Any other suffix is the plain
    form: one hex key per line, with a ``# n=<n>`` header and ``#`` comments.
    """

    @staticmethod
    def is_json(path: PathLike) -> bool:
        return Path(path).suffix.lower() == ".json"

    def save(self, key_set: KeySet, path: PathLike) -> Path:
        width = (2 * key_set.n + 3) // 4
        hexes = [format(code, f"0{width}x") for code in key_set.codes.tolist()]
        if self.is_json(path):
            return self.write_json(
                path,
                {
                    "n": key_set.n,
                    "epsilon": key_set.epsilon,
                    "certified": key_set.certified,
                    "beta_max": key_set.beta_max,
                    "keys": hexes,
                },
            )
        header = [f"# n={key_set.n}"]
        if key_set.epsilon is not None:
            header.append(f"# epsilon={key_set.epsilon!r}")
        header.append(f"# certified={str(key_set.certified).lower()}")
        if key_set.beta_max is not None:
            header.append(f"# beta_max={key_set.beta_max!r}")
        return self.write_text(path, "\n".join(header + hexes) + "\n")

    def load(self, path: PathLike) -> KeySet:
        """
        Load a key set.

        Raises:
            KeyFileError: If the file is unreadable or malformed
        """
        try:
            if self.is_json(path):
                return self._from_json(self.read_json(path))
            return self._from_text(self.read_text(path))
        except KeyFileError:
            raise
        except (ValueError, TypeError, KeyError) as e:
            raise KeyFileError(f"Invalid key-set file {path}: {e}") from e

    def _from_json(self, data: Dict[str, Any]) -> KeySet:
        if not isinstance(data, dict) or "n" not in data or "keys" not in data:
            raise KeyFileError("Key-set JSON needs 'n' and 'keys'")
        n = int(data["n"])
        return KeySet(
            n=n,
            codes=_parse_codes(data["keys"], n),
            epsilon=data.get("epsilon"),
            certified=bool(data.get("certified", False)),
            beta_max=data.get("beta_max"),
        )

    def _from_text(self, text: str) -> KeySet:
        meta: Dict[str, str] = {}
        hexes: List[str] = []
        for line in text.splitlines():
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped.lstrip("#").strip()
                if "=" in body:
                    name, _, value = body.partition("=")
                    meta[name.strip()] = value.strip()
                continue
            hexes.append(stripped)
        if "n" not in meta:
            raise KeyFileError("Plain key file needs a '# n=<qubits>' header")
        n = int(meta["n"])
        return KeySet(
            n=n,
            codes=_parse_codes(hexes, n),
            epsilon=float(meta["epsilon"]) if "epsilon" in meta else None,
            certified=meta.get("certified", "false") == "true",
            beta_max=float(meta["beta_max"]) if "beta_max" in meta else None,
        )


class ReportRepository(BaseRepository):
    """Repository for pydantic reports, states and result tables."""

    def save_model(self, model: BaseModel, path: PathLike) -> Path:
        return self.write_text(path, model.model_dump_json(indent=2, by_alias=True) + "\n")

    def save_document(self, document: Dict[str, Any], path: PathLike) -> Path:
        """Write a dict that may hold models, serialised in JSON mode."""
        plain = {
            name: value.model_dump(mode="json", by_alias=True)
            if isinstance(value, BaseModel)
            else value
            for name, value in document.items()
        }
        return self.write_json(path, plain)

    def load_model(self, model_type: Type[M], path: PathLike) -> M:
        try:
            return model_type.model_validate_json(self.read_text(path))
        except ValidationError as e:
            raise KeyFileError(f"Invalid {model_type.__name__} file {path}: {e}") from e

    def load_state(self, path: PathLike) -> PureState:
        """Pure state from {"n", "re", "im"} JSON."""
        return self.load_model(PureState, path)

    def save_table(self, frame: pd.DataFrame, path: PathLike, fmt: str = "csv") -> Path:
        if fmt == "csv":
            text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            return self.write_text(path, text)
        if fmt == "json":
            records = frame.astype(object).where(frame.notna(), None)
            return self.write_json(path, records.to_dict(orient="records"))
        raise ValueError(f"Unknown table format {fmt!r}")


class ManifestRepository(BaseRepository):
    """Repository for run manifests written beside every output."""

    @staticmethod
    def manifest_path(output: PathLike) -> Path:
        output = Path(output)
        return output.with_name(output.name + ".manifest.json")

    def save(self, manifest: RunManifest, output: PathLike) -> Path:
        return self.write_text(
            self.manifest_path(output), manifest.model_dump_json(indent=2) + "\n"
        )

    def load(self, path: PathLike) -> RunManifest:
        try:
            return RunManifest.model_validate_json(self.read_text(path))
        except ValidationError as e:
            raise KeyFileError(f"Invalid manifest {path}: {e}") from e
