"""Small shared helpers: atomic file writes and numeric formatting."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and atomic rename.

    The destination never holds partial content: either the old file (or
    nothing) or the complete new text.
    """
    target = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def fmt12(value: float) -> str:
    """Format a float with up to 12 significant digits."""
    return format(float(value), ".12g")


def round12(value):
    """Round a float to 12 significant digits (None passes through)."""
    if value is None:
        return None
    return float(fmt12(value))
