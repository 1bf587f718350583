"""Panel quadrature rules used throughout the package.

Everything here is a thin layer over Gauss-Legendre nodes from numpy:
composite panels, a cosine ("sine-graded") change of variables that
absorbs square-root endpoint behaviour, and geometric grading of panel
breaks toward points where the integrand is not smooth.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n: int):
    """Gauss-Legendre nodes and weights on [a, b].

    ``a`` and ``b`` may be arrays of equal shape ``S``; the result then has
    shape ``S + (n,)``.
    """
    x, w = _leggauss(int(n))
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def sine_graded(a, b, n: int):
    """Gauss-Legendre rule after the map ``t = a + (b-a) (1 - cos(pi s)) / 2``.

    The Jacobian vanishes at both ends, so integrands that behave like
    ``sqrt(t - a)`` or ``sqrt(b - t)`` become smooth in ``s``.
    """
    s, ws = gauss_legendre(0.0, 1.0, n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    t = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * s))
    w = (b - a) * 0.5 * np.pi * np.sin(np.pi * s) * ws
    return t, w


def composite(breaks, n: int, rule=gauss_legendre):
    """Concatenate ``rule`` over consecutive intervals of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    if breaks.size < 2:
        return np.empty(0), np.empty(0)
    t, w = rule(breaks[:-1], breaks[1:], n)
    return t.ravel(), w.ravel()


def graded_breaks(a: float, b: float, *, left: int = 0, right: int = 0,
                  ratio: float = 0.5) -> np.ndarray:
    """Breakpoints on [a, b] refined geometrically toward either end.

    ``left`` levels of refinement place breaks at ``a + (b-a)/2 * ratio**k``
    for ``k = 0..left-1`` (and symmetrically for ``right``).
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if b <= a:
        return np.array([a, b], dtype=float)
    mid = 0.5 * (a + b) if (left and right) else None
    pts = [a, b]
    span = b - a
    if left and right:
        pts.append(mid)
        half = 0.5 * span
        pts += [a + half * ratio ** k for k in range(1, left + 1)]
        pts += [b - half * ratio ** k for k in range(1, right + 1)]
    elif left:
        pts += [a + span * ratio ** k for k in range(1, left + 1)]
    elif right:
        pts += [b - span * ratio ** k for k in range(1, right + 1)]
    out = np.unique(np.asarray(pts, dtype=float))
    return out[(out >= a) & (out <= b)]


def geometric_breaks(a: float, b: float, max_ratio: float = 2.0) -> np.ndarray:
    """Split [a, b] (with ``0 < a``) so consecutive breaks differ by at most ``max_ratio``."""
    if a <= 0.0 or b <= a:
        return np.array([a, b], dtype=float)
    m = int(np.ceil(np.log(b / a) / np.log(max_ratio)))
    if m <= 1:
        return np.array([a, b], dtype=float)
    out = a * (b / a) ** (np.arange(m + 1) / m)
    out[0], out[-1] = a, b
    return out
