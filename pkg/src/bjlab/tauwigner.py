"""Pointwise and sliced tau-Wigner distributions.

    W_tau(f, g)(x, xi) = int exp(-2 pi i xi.y) f(x + tau y) conj(g(x - (1-tau) y)) dy

Radial piecewise-power profiles are handled by the polar engine in
:mod:`bjlab._radial`, wavepacket sums in closed form, and anything else
(sampled signals, mixed pairs) by a midpoint rule on the truncation box.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _radial
from .families import (PhaseSpacePoint, RadialProfile, SampledSignal, ShiftedSignal,
                       unit_sphere_area, vector_norm)
from .wavepackets import WavepacketSum, wtau_packets


class QuadResult(NamedTuple):
    """A quadrature value with its error estimate and any neglected tail bound."""

    value: complex
    error: float
    tail: float = 0.0


@dataclass(frozen=True)
class TruncationRadius:
    """Radius of a ball in y outside which the W_tau integrand vanishes."""

    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise ValueError("truncation radius must be positive")


def truncation_radius(f, g, x, tau: float | None = None) -> TruncationRadius:
    """``R0 + R1 + 2|x|`` from the support radii of f and g.

    With ``tau`` given the sharper ``min((R0 + |x|)/tau, (R1 + |x|)/(1 - tau))``
    is used when it is smaller.
    """
    R0, R1 = support_radius(f), support_radius(g)
    ax = float(vector_norm(np.atleast_1d(x)))
    val = R0 + R1 + 2.0 * ax
    if tau is not None:
        val = min(val, (R0 + ax) / tau, (R1 + ax) / (1.0 - tau))
    return TruncationRadius(max(val, np.finfo(float).tiny))


def support_radius(f) -> float:
    R = float(getattr(f, "support_radius", math.inf))
    if not math.isfinite(R):
        raise ValueError(f"{type(f).__name__} does not have bounded support")
    return R


def _check_tau(tau):
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in the open interval (0, 1), got {tau}")


def _as_point(z, d=None) -> PhaseSpacePoint:
    if isinstance(z, PhaseSpacePoint):
        return z
    return PhaseSpacePoint.from_array(z)


def wtau_fR_origin(d: int, R: float, tau: float) -> float:
    """Closed form of ``W_tau f_R(0, 0)``; zero for ``tau <= 1/(R+1)`` (and symmetric)."""
    _check_tau(tau)
    if R < 1.0:
        raise ValueError("R must be at least 1")
    t = min(tau, 1.0 - tau)
    if t <= 1.0 / (R + 1.0):
        return 0.0
    return unit_sphere_area(d) * (t * (1.0 - t)) ** (-d / 2.0) * math.log(R * t / (1.0 - t))


# ---------------------------------------------------------------------------
# radial profiles

def _decompose(x: np.ndarray, xi: np.ndarray):
    """``(|x|, xi_par, |xi_perp|)`` for xi rows relative to the direction of x."""
    X = float(vector_norm(x))
    xi = np.atleast_2d(xi)
    if X == 0.0:
        return 0.0, vector_norm(xi, axis=1), np.zeros(xi.shape[0])
    e = x / X
    par = xi @ e
    perp = vector_norm(xi - par[:, None] * e, axis=1)
    return X, par, perp


def radial_wtau(F: RadialProfile, G: RadialProfile, tau: float, X: float, xi_par, xi_perp,
                n: int = 16, method: str = "auto", x_sign: float = 1.0) -> np.ndarray:
    """``W_tau(F, G)`` at ``|x| = X`` for arrays of (xi_par, xi_perp).

    ``method`` selects ``"radial"`` (x = 0 only), ``"polar"`` or ``"auto"``.
    In d = 1, ``x_sign`` gives the sign of x and ``xi_par`` the signed xi.
    """
    _check_tau(tau)
    if F.d != G.d:
        raise ValueError("profiles must share the dimension")
    d = F.d
    xi_par = np.atleast_1d(np.asarray(xi_par, dtype=float))
    xi_perp = np.atleast_1d(np.asarray(xi_perp, dtype=float))
    if tau > 0.5:
        return np.conj(radial_wtau(G, F, 1.0 - tau, X, xi_par, xi_perp, n, method, x_sign))
    if X == 0.0 and method in ("auto", "radial"):
        return _radial.wtau_origin(F, G, tau, np.hypot(xi_par, xi_perp), n=max(n, 24))
    if method == "radial":
        raise ValueError("the radial fast path applies only at x = 0")
    if d == 1:
        return _radial.wtau_line(F, G, tau, x_sign * X, x_sign * xi_par, n=n)
    return _radial.wtau_polar(F, G, tau, X, xi_par, xi_perp, n=n)


# ---------------------------------------------------------------------------
# generic signals

def _shift_params(f, g):
    """Unwrap lazy shifts: returns (base_f, base_g, z_f, z_g) as arrays."""
    d = f.d
    zf = np.zeros(2 * d)
    zg = np.zeros(2 * d)
    if isinstance(f, ShiftedSignal):
        zf = f.z.as_array()
        f = f.base
    if isinstance(g, ShiftedSignal):
        zg = g.z.as_array()
        g = g.base
    return f, g, zf, zg


def shifted_arguments(tau, x, xi, zf, zg):
    """Reduce ``W_tau(pi(zf) f, pi(zg) g)(x, xi)`` to the unshifted pair.

    Returns ``(x', xi', phase)`` with
    ``W_tau(pi(zf) f, pi(zg) g)(x, xi) = phase * W_tau(f, g)(x', xi')``.
    """
    d = x.shape[-1]
    a1, e1, a2, e2 = zf[:d], zf[d:], zg[:d], zg[d:]
    om = tau * e1 + (1.0 - tau) * e2
    xs = x - (1.0 - tau) * a1 - tau * a2
    xis = xi - om
    phase = np.exp(2j * np.pi * (x @ (e1 - e2)) - 2j * np.pi * (xis @ (a1 - a2)))
    return xs, xis, phase


def _wtau_wavepackets(f: WavepacketSum, g: WavepacketSum, tau, x, xi):
    c = f.centers[:, None, :]
    e = g.centers[None, :, :]
    vals = wtau_packets(tau, x, xi, c, e)
    return np.sum(f.coeffs[:, None] * np.conj(g.coeffs)[None, :] * vals)


def _wtau_midpoint(f, g, tau, x, xi, step: float, Rt: float):
    d = x.size
    n = int(math.ceil(2.0 * Rt / step))
    t = -Rt + (np.arange(n) + 0.5) * (2.0 * Rt / n)
    h = 2.0 * Rt / n
    total = 0j
    if d == 1:
        Y = t[:, None]
        return complex(np.sum(np.exp(-2j * np.pi * (Y @ xi)) * f(x + tau * Y)
                              * np.conj(g(x - (1.0 - tau) * Y))) * h)
    rest = np.stack(np.meshgrid(*([t] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    for y1 in t:
        Y = np.concatenate([np.full((rest.shape[0], 1), y1), rest], axis=1)
        total += np.sum(np.exp(-2j * np.pi * (Y @ xi)) * f(x + tau * Y)
                        * np.conj(g(x - (1.0 - tau) * Y)))
    return complex(total * h ** d)


def _default_step(f, g):
    hs = [min(s.h) for s in (f, g) if isinstance(s, SampledSignal)]
    return 0.5 * min(hs) if hs else 0.05


def wtau_point(f, g, tau: float, z, *, n: int = 16, method: str = "auto",
               step: float | None = None) -> QuadResult:
    """``W_tau(f, g)(z)`` with a quadrature error estimate.

    Parameters
    ----------
    f, g : RadialProfile, SampledSignal, WavepacketSum or shifted versions
    tau : float in (0, 1)
    z : PhaseSpacePoint or array of length 2d
    n : int
        Base Gauss-Legendre order for profile pairs.
    method : {"auto", "radial", "polar"}
        Profile pairs at x = 0 use the one-dimensional radial reduction
        unless ``"polar"`` is requested.
    step : float, optional
        Midpoint spacing for sampled signals (default half the finest grid step).

    Returns
    -------
    QuadResult
        The error is the change under a refinement of the rule.
    """
    _check_tau(tau)
    z = _as_point(z)
    if f.d != g.d or f.d != z.d:
        raise ValueError("dimension mismatch")
    x = np.asarray(z.x)
    xi = np.asarray(z.xi)
    f0, g0, zf, zg = _shift_params(f, g)
    if np.any(zf) or np.any(zg):
        xs, xis, ph = shifted_arguments(tau, x, xi, zf, zg)
        r = wtau_point(f0, g0, tau, PhaseSpacePoint(xs, xis), n=n, method=method, step=step)
        return QuadResult(complex(ph * r.value), r.error, r.tail)
    if isinstance(f0, WavepacketSum) and isinstance(g0, WavepacketSum):
        v = _wtau_wavepackets(f0, g0, tau, x, xi)
        return QuadResult(complex(v), 1e-15 * abs(v))
    if isinstance(f0, RadialProfile) and isinstance(g0, RadialProfile):
        X, par, perp = _decompose(x, xi[None, :])
        sign = 1.0 if x[0] >= 0 else -1.0
        if f0.d == 1:
            par = xi * sign
        v1 = radial_wtau(f0, g0, tau, X, par, perp, n=n, method=method, x_sign=sign)[0]
        v2 = radial_wtau(f0, g0, tau, X, par, perp, n=n + 8, method=method, x_sign=sign)[0]
        return QuadResult(complex(v2), float(abs(v2 - v1)))
    Rt = truncation_radius(f0, g0, x, tau).value
    s = step or _default_step(f0, g0)
    v1 = _wtau_midpoint(f0, g0, tau, x, xi, 2.0 * s, Rt)
    v2 = _wtau_midpoint(f0, g0, tau, x, xi, s, Rt)
    return QuadResult(v2, abs(v2 - v1))


# ---------------------------------------------------------------------------
# frequency slices

@dataclass
class WignerSlice:
    """``W_tau(f, g)(x, .)`` on the dual grid ``xi = fftshift(fftfreq(N, dy))`` per axis."""

    tau: float
    x: tuple
    n: int
    dy: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.x)

    @property
    def dxi(self) -> float:
        return 1.0 / (self.n * self.dy)

    def xi_axis(self) -> np.ndarray:
        return np.fft.fftshift(np.fft.fftfreq(self.n, self.dy))

    def xi_points(self) -> np.ndarray:
        ax = self.xi_axis()
        return np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)

    def header(self) -> dict:
        return {"tau": self.tau, "x": list(self.x),
                "grid": {"n": self.n, "dy": self.dy, "dxi": self.dxi}, **self.meta}

    def to_csv(self, path) -> None:
        pts = self.xi_points()
        vals = self.values.reshape(-1)
        cols = [f"xi{k + 1}" for k in range(self.d)] + ["re", "im"]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
            fh.write(",".join(cols) + "\n")
            for p, v in zip(pts, vals):
                fh.write(",".join(repr(float(u)) for u in p) + f",{float(v.real)!r},{float(v.imag)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "WignerSlice":
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline()[1:])
        data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
        d = len(head["x"])
        n = head["grid"]["n"]
        vals = (data[:, d] + 1j * data[:, d + 1]).reshape((n,) * d)
        meta = {k: v for k, v in head.items() if k not in ("tau", "x", "grid")}
        return cls(head["tau"], tuple(head["x"]), n, head["grid"]["dy"], vals, meta)


def aligned_step(h: float, tau: float) -> float:
    """y spacing that keeps both ``tau y`` and ``(1-tau) y`` on the sample lattice.

    When ``tau/m`` and ``(1-tau)/m`` are integers for ``m = min(tau, 1-tau)``
    the step ``h/m`` makes the slice exact on the lattice (no interpolation);
    otherwise ``h`` is returned.
    """
    m = min(tau, 1.0 - tau)
    a, b = tau / m, (1.0 - tau) / m
    if abs(a - round(a)) < 1e-9 and abs(b - round(b)) < 1e-9:
        return h / m
    return h


def _check_grids(f: SampledSignal, g: SampledSignal):
    if not (isinstance(f, SampledSignal) and isinstance(g, SampledSignal)):
        raise TypeError("slices are defined for sampled signals")
    if f.d != g.d or not np.allclose(f.h, g.h, rtol=1e-12, atol=0.0):
        raise ValueError("incompatible grids: dimension or spacing differ")


def slice_size(f, g, tau, x, dy) -> int:
    """Points per axis so that the centred y grid covers every y with a nonzero integrand.

    For sampled signals the range is the per-axis intersection of
    ``x + tau y`` in the box of f with ``x - (1 - tau) y`` in the box of g.
    """
    if isinstance(f, SampledSignal) and isinstance(g, SampledSignal):
        reach = 0.0
        for k in range(f.d):
            flo, fhi = f.origin[k], f.origin[k] + f.h[k] * (f.shape[k] - 1)
            glo, ghi = g.origin[k], g.origin[k] + g.h[k] * (g.shape[k] - 1)
            lo = max((flo - x[k]) / tau, (x[k] - ghi) / (1.0 - tau))
            hi = min((fhi - x[k]) / tau, (x[k] - glo) / (1.0 - tau))
            if lo > hi:
                return 2
            reach = max(reach, abs(lo), abs(hi))
    else:
        reach = truncation_radius(f, g, x, tau).value
    return 2 * int(math.ceil(reach / dy)) + 2


def _on_lattice(s: SampledSignal, x: np.ndarray, step: float, j: np.ndarray):
    """Samples of ``s`` at ``x + step * j`` (tensor grid) when all lie on its lattice, else None."""
    idx = []
    for k in range(s.d):
        i0 = (x[k] - s.origin[k]) / s.h[k]
        m = step / s.h[k]
        if abs(i0 - round(i0)) > 1e-9 or abs(m - round(m)) > 1e-9:
            return None
        idx.append(int(round(i0)) + int(round(m)) * j)
    padded = np.pad(s.samples, 1)
    # out-of-range indices map to the zero border
    sel = [np.where((i >= 0) & (i < n), i + 1, 0) for i, n in zip(idx, s.shape)]
    return padded[np.ix_(*sel)]


def wtau_slice(f: SampledSignal, g: SampledSignal, tau: float, x, *, y_step=None,
               n: int | None = None) -> WignerSlice:
    """Frequency slice of ``W_tau(f, g)`` at ``x`` by one FFT.

    Parameters
    ----------
    y_step : float or "auto", optional
        Sampling step in y; ``"auto"`` (default) uses :func:`aligned_step`.
    n : int, optional
        Points per axis; by default just enough to cover the truncation ball.
    """
    _check_tau(tau)
    _check_grids(f, g)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = f.d
    if x.size != d:
        raise ValueError("x has the wrong dimension")
    h = min(f.h)
    dy = aligned_step(h, tau) if y_step in (None, "auto") else float(y_step)
    if n is None:
        n = slice_size(f, g, tau, x, dy)
    j = np.arange(n) - n // 2
    a = _on_lattice(f, x, tau * dy, j)
    b = _on_lattice(g, x, -(1.0 - tau) * dy, j)
    if a is not None and b is not None:
        hy = a * np.conj(b)
    else:
        Y = np.stack(np.meshgrid(*([dy * j] * d), indexing="ij"), axis=-1)
        hy = f(x + tau * Y) * np.conj(g(x - (1.0 - tau) * Y))
    vals = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(hy))) * dy ** d
    return WignerSlice(float(tau), tuple(float(v) for v in x), int(n), float(dy), vals)


def moyal_sum(f: SampledSignal, g: SampledSignal | None = None, tau: float = 0.5, *,
              y_step=None) -> float:
    """Discrete ``||W_tau(f, g)||_2^2`` over the sample lattice of f.

    Each slice is summed over its own dual grid (``dxi = 1/(n dy)``), then
    the slices are summed over x with weight ``h^d`` in lattice order.
    """
    g = f if g is None else g
    _check_grids(f, g)
    pts = f.points().reshape(-1, f.d)
    total = 0.0
    h = min(f.h)
    dy = aligned_step(h, tau) if y_step in (None, "auto") else float(y_step)
    for p in pts:
        s = wtau_slice(f, g, tau, p, y_step=dy)
        total += float(np.sum(np.abs(s.values) ** 2)) * s.dxi ** f.d
    return total * f.cell_volume
