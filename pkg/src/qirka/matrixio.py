"""Plain-text matrix files: a ``rows cols`` header, then row-major entries."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError
from .model import StateSpaceModel

__all__ = ["write_matrix", "read_matrix", "save_model", "load_model"]


def format_float(x: float) -> str:
    return "%.17g" % x


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    lines = [f"{rows} {cols}"]
    lines += [" ".join(format_float(v) for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    """Parse a matrix file; errors carry the 1-based line number."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].strip():
        raise ParseError("missing 'rows cols' header", line=1)
    head = text[0].split()
    try:
        rows, cols = int(head[0]), int(head[1])
        if len(head) != 2 or rows < 0 or cols < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise ParseError(f"bad header {text[0]!r}", line=1) from None
    body = [(i + 2, ln) for i, ln in enumerate(text[1:]) if ln.strip()]
    if len(body) < rows:
        last = body[-1][0] if body else 1
        raise ParseError(f"expected {rows} rows, found {len(body)}", line=last + 1)
    if len(body) > rows:
        raise ParseError("trailing data after last row", line=body[rows][0])
    out = np.empty((rows, cols))
    for r, (lineno, ln) in enumerate(body):
        fields = ln.split()
        if len(fields) != cols:
            raise ParseError(f"expected {cols} entries, found {len(fields)}", line=lineno)
        try:
            out[r] = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return out


def save_model(directory, model: StateSpaceModel) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name in "ABCD":
        write_matrix(d / f"{name}.txt", getattr(model, name))


def load_model(directory) -> StateSpaceModel:
    d = Path(directory)
    mats = {}
    for name in "ABCD":
        p = d / f"{name}.txt"
        try:
            mats[name] = read_matrix(p)
        except ParseError as exc:
            err = ParseError(f"{p}: {exc}")
            err.line = exc.line
            raise err from None
    return StateSpaceModel(**mats)
