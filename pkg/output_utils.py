"""Shared helpers for writing results: number formatting, output streams, zstd compression."""

import contextlib
import json
import math
import os
import subprocess
import sys

SIGNIFICANT_DIGITS = 9


def format_number(x):
    """Shortest decimal of x rounded to SIGNIFICANT_DIGITS significant digits."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return repr(float(f"{x:.{SIGNIFICANT_DIGITS}g}"))


def round_floats(obj):
    """Recursively round every float in a JSON-style structure to SIGNIFICANT_DIGITS."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    # numpy scalars
    return round_floats(obj.item()) if hasattr(obj, "item") else obj


def dump_json(obj, stream):
    json.dump(round_floats(obj), stream, indent=2)
    stream.write("\n")


@contextlib.contextmanager
def open_writable(path):
    """Yield a text stream for ``path``; stdout when path is None or "-".

    Stdout is flushed but never closed.
    """
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def compress_and_remove(path, logger=None):
    """Compress a file with zstd and remove the original.

    Args:
        path: Path to the file to compress.
        logger: Optional logger for progress messages.

    Returns:
        The .zst path, or None if nothing was compressed.
    """
    if not path or path == "-" or not os.path.exists(path):
        return None

    zst_path = path + ".zst"
    if logger:
        size_kb = os.path.getsize(path) / 1024
        logger.info(f"Compressing {path} ({size_kb:.0f}KB)...")

    try:
        result = subprocess.run(
            ["zstd", "-q", "-f", "--rm", path, "-o", zst_path],
            capture_output=True,
            text=True,
        )
    except FileNotFoundError:
        if logger:
            logger.error("zstd executable not found; leaving output uncompressed")
        return None

    if result.returncode != 0:
        if logger:
            logger.error(f"zstd compression failed for {path}: {result.stderr}")
        return None

    if logger and os.path.exists(zst_path):
        zst_kb = os.path.getsize(zst_path) / 1024
        logger.info(f"Compressed to {zst_path} ({zst_kb:.0f}KB)")
    return zst_path
