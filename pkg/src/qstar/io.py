"""Atomic, versioned CSV/JSON output."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1
SCHEMA_PREFIX = "# qstar-schema:"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def csv_text(kind: str, columns: dict) -> str:
    """Header line ``# qstar-schema: <kind> v1``, column names, then one row per entry."""
    names = list(columns)
    cols = [np.asarray(columns[c]) for c in names]
    n = {c.shape[0] for c in cols}
    if len(n) != 1:
        raise ValueError("CSV columns have different lengths")
    lines = [f"{SCHEMA_PREFIX} {kind} v{SCHEMA_VERSION}", ",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, kind: str, columns: dict) -> Path:
    return write_atomic(path, csv_text(kind, columns))


def read_csv(path, expect_kind: str | None = None):
    """Return (kind, {column: float array})."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith(SCHEMA_PREFIX):
        raise ConfigError(f"{path} has no qstar schema header")
    kind, _, version = lines[0][len(SCHEMA_PREFIX):].strip().rpartition(" ")
    if version != f"v{SCHEMA_VERSION}":
        raise ConfigError(f"{path}: unsupported schema version {version}")
    if expect_kind is not None and kind != expect_kind:
        raise ConfigError(f"{path} holds '{kind}', expected '{expect_kind}'")
    names = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:] if ln], dtype=float)
    data = data.reshape(-1, len(names))
    return kind, {name: data[:, i] for i, name in enumerate(names)}


def write_json(path, obj) -> Path:
    return write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
