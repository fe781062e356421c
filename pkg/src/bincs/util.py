"""Shared text formatting and tiny file helpers."""

from __future__ import annotations

import numpy as np

__all__ = ["fmt9", "read_vector", "write_vector"]


def fmt9(x) -> str:
    """Format a number at 9 significant digits for diff-stable output."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def read_vector(path) -> np.ndarray:
    """Read a real vector stored one value per line (blank lines ignored)."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                values.append(float(tok))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: not a number: {tok!r}")
    return np.asarray(values)


def write_vector(x, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for v in np.asarray(x, dtype=float):
            fh.write(fmt9(v) + "\n")
