"""Result files: atomic writes guarded by a lockfile, plus CSV/JSON renderers.

Every result carries a metadata block ``{version, config_hash, seed}``. CSV
files put it in leading ``# key: value`` lines before the header row; JSON
results hold it under ``"meta"``. Nothing time-dependent is written, so a
re-run with the same configuration produces identical bytes.
"""

from __future__ import annotations

import io
import json
import logging
import os
import tempfile
import time
from typing import Any

import pandas as pd

from randgraphstate import __version__

logger = logging.getLogger(__name__)


# ----------------- Lockfile helpers -----------------


def _is_process_alive(pid: int) -> bool:
    if pid <= 0:
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    except OSError:
        return False
    return True


def _write_lockfile(lockfile: str, pid: int, ts: float) -> None:
    try:
        with open(lockfile, "w", encoding="utf-8") as f:
            f.write(f"{pid}\n{ts}\n")
    except OSError:
        logger.exception("Failed to write lockfile %s", lockfile)


def _read_lockfile(lockfile: str) -> tuple[int, float] | None:
    try:
        with open(lockfile, encoding="utf-8") as f:
            parts = f.read().splitlines()
        if len(parts) >= 2:
            return int(parts[0]), float(parts[1])
    except FileNotFoundError:
        return None
    except (OSError, ValueError):
        logger.exception("Failed to read lockfile %s", lockfile)
    return None


def acquire_lock(
    lock_path: str, timeout: float = 5.0, poll: float = 0.05, stale_after: float = 30.0
) -> bool:
    """Create ``lock_path`` exclusively; reclaim it when stale or its owner is gone."""
    start = time.time()
    while True:
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.close(fd)
            _write_lockfile(lock_path, os.getpid(), time.time())
            return True
        except FileExistsError:
            info = _read_lockfile(lock_path)
            if info:
                pid, ts = info
                age = time.time() - ts
                if age > stale_after or not _is_process_alive(pid):
                    try:
                        os.remove(lock_path)
                        logger.warning("Removed stale lock %s (pid=%s, age=%.1f)", lock_path, pid, age)
                        continue
                    except OSError:
                        logger.exception("Failed to remove stale lock %s", lock_path)
            if (time.time() - start) >= timeout:
                return False
            time.sleep(poll)


def release_lock(lock_path: str) -> None:
    info = _read_lockfile(lock_path)
    try:
        if info is None or info[0] == os.getpid():
            os.remove(lock_path)
    except FileNotFoundError:
        pass
    except OSError:
        logger.exception("Failed to release lock %s", lock_path)


def atomic_write_text(file_path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then ``os.replace`` it."""
    dirpath = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(dirpath, exist_ok=True)
    lockfile = file_path + ".lock"
    if not acquire_lock(lockfile):
        raise RuntimeError(f"Could not acquire lock for writing {file_path}")
    try:
        fd, tmp_path = tempfile.mkstemp(dir=dirpath, prefix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, file_path)
        finally:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
    finally:
        release_lock(lockfile)


def atomic_write_json(file_path: str, obj: Any) -> None:
    atomic_write_text(file_path, json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


# ----------------- Result rendering -----------------


def result_meta(config_hash: str, seed: int | None) -> dict[str, Any]:
    return {"version": __version__, "config_hash": config_hash, "seed": seed}


def render_json(payload: dict[str, Any], meta: dict[str, Any]) -> str:
    return json.dumps({"meta": meta, **payload}, indent=2, sort_keys=False) + "\n"


def render_csv(frame: pd.DataFrame, meta: dict[str, Any]) -> str:
    buffer = io.StringIO()
    for key, value in meta.items():
        buffer.write(f"# {key}: {value}\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def read_csv_result(file_path: str) -> tuple[dict[str, str], pd.DataFrame]:
    """Inverse of ``render_csv``: metadata lines and the table."""
    meta: dict[str, str] = {}
    with open(file_path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            meta[key] = value
    return meta, pd.read_csv(file_path, comment="#")


def load_json(file_path: str) -> Any:
    with open(file_path, encoding="utf-8") as f:
        return json.load(f)
