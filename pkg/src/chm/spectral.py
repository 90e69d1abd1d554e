"""Eigenvalues of circulant block Gramians and the partial-sum pruning test.

For a back-circulant or circulant block U with first row u, the Gramian
U U^T is symmetric circulant.  Its eigenvalue on the q-th Fourier vector is

    lambda_q = c_0 + sum_{t=1}^{(p-1)/2} 2 c_t cos(2 pi q t / p),

with c_t the dot product of rows 0 and t.  Any subset of the four blocks of a
Hadamard matrix must have eigenvalue sums at most 4p for every q.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import periodic_autocorrelation

SLACK = 1e-6


@lru_cache(maxsize=None)
def cosine_table(p: int) -> np.ndarray:
    """(p, (p-1)/2) table of 2 cos(2 pi q t / p) for t = 1..(p-1)/2."""
    h = (p - 1) // 2
    q = np.arange(p)[:, None]
    t = np.arange(1, h + 1)[None, :]
    tab = 2.0 * np.cos(2.0 * np.pi * q * t / p)
    tab.setflags(write=False)
    return tab


@dataclass(frozen=True)
class EigenProfile:
    values: tuple

    @property
    def p(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def eigen_profile(row) -> EigenProfile:
    u = np.asarray(row)
    if np.all(u == u[0]):
        raise ValueError("constant row has a singular Gramian")
    c = periodic_autocorrelation(u)
    p = len(u)
    h = (p - 1) // 2
    lam = c[0] + cosine_table(p) @ c[1 : h + 1].astype(float)
    return EigenProfile(tuple(float(v) for v in lam))


def autocorrelations(rows) -> np.ndarray:
    """Batch version: (k, p) rows -> (k, (p-1)/2) dot products for lags 1..(p-1)/2."""
    R = np.asarray(rows, dtype=np.int32)
    p = R.shape[1]
    h = (p - 1) // 2
    return np.stack([(R * np.roll(R, -t, axis=1)).sum(axis=1) for t in range(1, h + 1)], axis=1)


def eigen_profiles(rows) -> np.ndarray:
    """Batch eigen profiles, (k, p) rows -> (k, p) array of lambda_q."""
    R = np.asarray(rows)
    p = R.shape[1]
    c = autocorrelations(R).astype(float)
    return p + c @ cosine_table(p).T


def prune(profiles, p: int, eps: float = SLACK) -> bool:
    """True (keep) iff the summed eigenvalues stay within 4p + eps for every q."""
    if not profiles:
        return True
    total = np.zeros(p)
    for prof in profiles:
        arr = prof.as_array() if isinstance(prof, EigenProfile) else np.asarray(prof, dtype=float)
        total = total + arr
    return bool(np.all(total <= 4 * p + eps))


def keep_mask(summed: np.ndarray, p: int, eps: float = SLACK) -> np.ndarray:
    """Vectorized prune over the last axis of already summed profiles."""
    return np.all(summed <= 4 * p + eps, axis=-1)
