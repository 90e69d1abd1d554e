"""Sign vectors and the block primitives built from them.

A sign row is a numpy int8 vector over {+1, -1}.  Blocks are p x p matrices
built from a first row, either back-circulant (the ``TAU`` action) or
circulant (the ``IOTA`` action).
"""
from __future__ import annotations

from enum import Enum

import numpy as np


class Action(Enum):
    TAU = "t"
    IOTA = "i"

    def __mul__(self, other: "Action") -> "Action":
        # the two actions form a group of order 2 with TAU as identity
        return Action.TAU if self is other else Action.IOTA

    @property
    def sign(self) -> int:
        """+1 for TAU, -1 for IOTA; the direction in which a block shifts."""
        return 1 if self is Action.TAU else -1

    @classmethod
    def parse(cls, s: str) -> "Action":
        s = s.strip().lower()
        if s in ("t", "tau", "τ"):
            return cls.TAU
        if s in ("i", "iota", "ι"):
            return cls.IOTA
        raise ValueError(f"unknown action {s!r}")

    def __str__(self) -> str:
        return "tau" if self is Action.TAU else "iota"


TAU = Action.TAU
IOTA = Action.IOTA


def sign_row(entries, p: int | None = None) -> np.ndarray:
    """Validate and convert to an int8 sign row."""
    row = np.asarray(entries, dtype=np.int8).ravel()
    if p is not None and len(row) != p:
        raise ValueError(f"row has length {len(row)}, expected {p}")
    if not np.all((row == 1) | (row == -1)):
        raise ValueError("row entries must be +1 or -1")
    return row


def row_to_text(row) -> str:
    return "".join("+" if v > 0 else "-" for v in np.asarray(row).ravel())


def row_from_text(text: str) -> np.ndarray:
    text = text.strip()
    if not text or any(c not in "+-" for c in text):
        raise ValueError(f"not a sign row: {text!r}")
    return np.array([1 if c == "+" else -1 for c in text], dtype=np.int8)


def row_sum(row) -> int:
    return int(np.asarray(row, dtype=np.int64).sum())


def back_circulant(row) -> np.ndarray:
    """m[r, c] = row[(c + r) mod p]."""
    row = np.asarray(row)
    p = len(row)
    idx = (np.arange(p)[:, None] + np.arange(p)[None, :]) % p
    return row[idx]


def circulant(row) -> np.ndarray:
    """m[r, c] = row[(c - r) mod p]."""
    row = np.asarray(row)
    p = len(row)
    idx = (np.arange(p)[None, :] - np.arange(p)[:, None]) % p
    return row[idx]


def apply_action(row, a: Action) -> np.ndarray:
    return back_circulant(row) if a is Action.TAU else circulant(row)


def gramian(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    return M @ M.T


def expanded_matrix(H) -> np.ndarray:
    H = np.asarray(H)
    return np.block([[H, -H], [-H, H]])


def periodic_autocorrelation(row) -> np.ndarray:
    """Dot products of row 0 with row t of the back-circulant block, t = 0..p-1.

    These are the first-row entries of the block Gramian.
    """
    u = np.asarray(row, dtype=np.int64)
    return np.array([int(u @ np.roll(u, -t)) for t in range(len(u))])


def pack_rows(rows) -> np.ndarray:
    """Pack sign rows (k, n) into uint64 words, +1 -> bit set, most significant first.

    Only used for n <= 64; it gives a fast total order on rows for dedup.
    """
    rows = np.asarray(rows)
    n = rows.shape[-1]
    if n > 64:
        raise ValueError("pack_rows supports at most 64 entries")
    weights = np.uint64(1) << np.arange(n - 1, -1, -1, dtype=np.uint64)
    return ((rows > 0).astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)
