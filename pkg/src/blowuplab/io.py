"""Run-directory persistence: atomic writes, moment CSV, JSON reports and the manifest."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .errors import IoError, MissingManifest

MANIFEST = "manifest.json"

MOMENT_COLUMNS = ("t", "m_rho", "m_f", "M", "W", "I", "E_k", "E_i", "E_f", "J",
                  "leak_mass", "leak_mom")
ALPHA_COLUMNS = ("m_rho_a", "M_rho_a", "W_rho_a", "I_rho_a", "E_k_a", "E_i_a", "J_alpha")


def atomic_write_bytes(path, data: bytes) -> Path:
    """Write through a temporary file in the target directory and rename it into place."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON text (sorted keys, non-finite floats as strings)."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def moment_rows(series):
    """Header and rows of the moment CSV for a :class:`MomentSeries`.

    ``leak_mass`` is the total mass (fluid plus particles) that has left the
    domain, ``leak_mom`` the momentum.  Volume-fraction columns are appended
    when the samples carry them.
    """
    with_alpha = any(mv.has_alpha for mv in series.moments)
    header = list(MOMENT_COLUMNS) + (list(ALPHA_COLUMNS) if with_alpha else [])
    rows = []
    for mv, lk in zip(series.moments, series.leaks):
        row = [mv.t, mv.m_rho, mv.m_f, mv.M, mv.W, mv.I, mv.E_k, mv.E_i, mv.E_f, mv.J,
               lk["mass_rho"] + lk["mass_f"], lk["mom"]]
        if with_alpha:
            row += [getattr(mv, c) for c in ALPHA_COLUMNS]
        rows.append(row)
    return header, rows


def write_moments_csv(path, series) -> Path:
    header, rows = moment_rows(series)
    return write_csv(path, header, rows)


def read_csv_columns(path) -> dict:
    """Columns of a numeric CSV file as float arrays keyed by header name."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = [[float(v) for v in row] for row in reader if row]
    except (OSError, StopIteration, ValueError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def load_manifest(run_dir) -> dict:
    path = Path(run_dir) / MANIFEST
    if not path.is_file():
        raise MissingManifest(f"no {MANIFEST} in {run_dir}")
    return read_json(path)


def update_manifest(run_dir, command: str, scenario_hash: str, seed: Optional[int],
                    artifacts: list, summary: dict, started: str) -> dict:
    """Merge one command's outputs into the run manifest.

    Every artifact is listed with its sha256.  The manifest keeps one entry
    per command so ``check`` and ``simulate`` can share a directory.
    """
    run_dir = Path(run_dir)
    path = run_dir / MANIFEST
    manifest = read_json(path) if path.is_file() else {"tool": "blowuplab", "commands": {}}
    manifest["version"] = __version__
    manifest["scenario_hash"] = scenario_hash
    manifest["seed"] = seed
    manifest["commands"][command] = {
        "started": started,
        "finished": _now(),
        "summary": summary,
        "artifacts": {a: sha256_file(run_dir / a) for a in sorted(artifacts)},
    }
    listed = set()
    for entry in manifest["commands"].values():
        listed.update(entry["artifacts"])
    manifest["artifacts"] = sorted(listed)
    write_json(path, manifest)
    return manifest


now = _now
