"""Gauss-Legendre rules: composite 1D, tensor 2D, polar disc."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes/weights on (-1, 1)."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_interval(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss(n)
    h = 0.5 * (hi - lo)
    return lo + h * (x + 1.0), h * w


def breakpoints(lo: float, hi: float, extra=(), cells: int = 1) -> np.ndarray:
    """Sorted breakpoints of [lo, hi] including ``extra`` (clipped) with each
    resulting piece split into ``cells`` equal sub-cells."""
    pts = [lo, hi] + [float(p) for p in extra if lo < p < hi]
    pts = np.unique(np.asarray(pts, dtype=float))
    if cells <= 1:
        return pts
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        out.extend(np.linspace(a, b, cells + 1)[1:])
    return np.asarray(out)


def composite(breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule with n points on every interval between ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss(n)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    h = 0.5 * (hi - lo)
    return (lo + h * (x + 1.0)).ravel(), (h * w).ravel()


def tensor2d(breaks1, breaks2, n: int):
    """Points (x1, x2) and weights of a tensor composite rule on a rectangle."""
    x1, w1 = composite(breaks1, n)
    x2, w2 = composite(breaks2, n)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    W = np.outer(w1, w2)
    return X1.ravel(), X2.ravel(), W.ravel()


@lru_cache(maxsize=None)
def polar_disc(n_r: int = 16, n_t: int = 32) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rule on the unit disc: Gauss in r (weight r folded in), uniform in angle.

    Exact for polynomials in (X1, X2) of degree < min(2 n_r - 1, n_t).
    """
    r, wr = gauss_interval(0.0, 1.0, n_r)
    t = 2.0 * np.pi * (np.arange(n_t) + 0.5) / n_t
    R, T = np.meshgrid(r, t, indexing="ij")
    W = np.outer(wr * r, np.full(n_t, 2.0 * np.pi / n_t))
    X1, X2 = R * np.cos(T), R * np.sin(T)
    out = (X1.ravel(), X2.ravel(), W.ravel())
    for a in out:
        a.flags.writeable = False
    return out
