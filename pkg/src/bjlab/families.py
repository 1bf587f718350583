"""Radial test functions, sampled signals and phase-space points.

A :class:`RadialProfile` stores a function of the form

    u -> sum_k a_k |u|^{beta_k} 1[r_in_k <= |u| < r_out_k]

exactly, so norms, suprema and support radii are available in closed
form.  A :class:`SampledSignal` holds complex values on a uniform grid and
is evaluated between samples by multilinear interpolation.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import gamma


def unit_sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d, ``2 pi^{d/2} / Gamma(d/2)``."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return 2.0 * math.pi ** (d / 2.0) / float(gamma(d / 2.0))


def critical_exponent(d: int) -> float:
    """Return ``inf`` for d in {1, 2} and ``2d/(d-2)`` otherwise."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return math.inf if d <= 2 else 2.0 * d / (d - 2.0)


def vector_norm(v, axis: int = -1) -> np.ndarray:
    """Euclidean norm that does not underflow for components near the float minimum."""
    v = np.asarray(v, dtype=float)
    s = np.max(np.abs(v), axis=axis, keepdims=True)
    safe = np.where(s > 0, s, 1.0)
    return np.squeeze(s, axis=axis) * np.linalg.norm(v / safe, axis=axis)


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point ``z = (x, xi)`` of R^d x R^d."""

    x: tuple
    xi: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        xi = tuple(float(v) for v in np.atleast_1d(self.xi))
        if len(x) != len(xi):
            raise ValueError("x and xi must have the same dimension")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def d(self) -> int:
        return len(self.x)

    @classmethod
    def origin(cls, d: int) -> "PhaseSpacePoint":
        return cls((0.0,) * d, (0.0,) * d)

    @classmethod
    def from_array(cls, z) -> "PhaseSpacePoint":
        z = np.asarray(z, dtype=float).ravel()
        if z.size % 2:
            raise ValueError("phase-space vector must have even length")
        d = z.size // 2
        return cls(z[:d], z[d:])

    def as_array(self) -> np.ndarray:
        return np.array(self.x + self.xi)

    def __sub__(self, other: "PhaseSpacePoint") -> "PhaseSpacePoint":
        return PhaseSpacePoint.from_array(self.as_array() - other.as_array())

    def __add__(self, other: "PhaseSpacePoint") -> "PhaseSpacePoint":
        return PhaseSpacePoint.from_array(self.as_array() + other.as_array())


@dataclass(frozen=True)
class Shell:
    """One term ``coeff * r**exponent`` supported on ``r_in <= r < r_out``."""

    coeff: float
    exponent: float
    r_in: float
    r_out: float

    def __post_init__(self):
        for name in ("coeff", "exponent", "r_in", "r_out"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.coeff):
            raise ValueError("shell coefficient must be finite")
        if not (0.0 <= self.r_in < self.r_out < math.inf):
            raise ValueError(f"need 0 <= r_in < r_out < inf, got [{self.r_in}, {self.r_out}]")

    @property
    def singular(self) -> bool:
        """True when the shell reaches the origin with a negative power."""
        return self.r_in == 0.0 and self.exponent < 0.0

    def radial_moment(self, power: float, d: int) -> float:
        """``int_{r_in}^{r_out} r**(power + d - 1) dr``; ``inf`` when divergent."""
        s = power + d
        if s == 0.0:
            return math.inf if self.r_in == 0.0 else math.log(self.r_out / self.r_in)
        if self.r_in == 0.0 and s < 0.0:
            return math.inf
        if self.r_in == 0.0:
            return self.r_out ** s / s
        # stable for radii near the bottom of the float range
        return self.r_out ** s / s * -math.expm1(s * math.log(self.r_in / self.r_out))


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-power radial function on R^d.

    Parameters
    ----------
    d : int
        Ambient dimension.
    shells : sequence of Shell
        Pairwise disjoint radial shells, stored sorted by inner radius.
    meta : dict, optional
        Free-form construction details (not part of equality).
    """

    d: int
    shells: tuple
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension must be a positive integer")
        shells = tuple(sorted((s if isinstance(s, Shell) else Shell(*s) for s in self.shells),
                              key=lambda s: s.r_in))
        for a, b in zip(shells[:-1], shells[1:]):
            if b.r_in < a.r_out:
                raise ValueError("shells must be pairwise disjoint in radius")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "shells", shells)

    # -- basic queries -------------------------------------------------
    @property
    def support_radius(self) -> float:
        return max((s.r_out for s in self.shells), default=0.0)

    @property
    def is_nonnegative(self) -> bool:
        return all(s.coeff >= 0.0 for s in self.shells)

    def radial(self, r) -> np.ndarray:
        """Evaluate the profile at radii ``r`` (any shape)."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            for s in self.shells:
                m = (r >= s.r_in) & (r < s.r_out)
                if np.any(m):
                    out[m] += s.coeff * r[m] ** s.exponent
        return out

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points whose last axis has length ``d``."""
        pts = np.asarray(points, dtype=float)
        if self.d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        return self.radial(vector_norm(pts))

    def l1_norm(self) -> float:
        w = unit_sphere_area(self.d)
        return sum(abs(s.coeff) * w * s.radial_moment(s.exponent, self.d) for s in self.shells)

    def sup_on_ball(self, center_norm: float, radius: float) -> float:
        """Supremum of ``|f|`` over a ball ``B(c, radius)`` with ``|c| = center_norm``."""
        lo, hi = max(0.0, center_norm - radius), center_norm + radius
        best = 0.0
        for s in self.shells:
            a, b = max(lo, s.r_in), min(hi, s.r_out)
            if a > b or (a == b and not (s.r_in <= a < s.r_out)):
                continue
            if s.exponent < 0.0:
                v = math.inf if a == 0.0 else abs(s.coeff) * a ** s.exponent
            else:
                v = abs(s.coeff) * b ** s.exponent
            best = max(best, v)
        return best

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "dimension": self.d,
            "shells": [
                {"coeff": s.coeff, "exponent": s.exponent, "r_in": s.r_in, "r_out": s.r_out}
                for s in self.shells
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj: dict) -> "RadialProfile":
        shells = [Shell(s["coeff"], s["exponent"], s["r_in"], s["r_out"]) for s in obj["shells"]]
        return cls(int(obj["dimension"]), tuple(shells))

    @classmethod
    def from_json(cls, text: str) -> "RadialProfile":
        return cls.from_dict(json.loads(text))


def l2_norm_squared(f: RadialProfile) -> float:
    """Exact squared L^2 norm of a radial profile.

    Raises
    ------
    ValueError
        If some shell is not square integrable.
    """
    w = unit_sphere_area(f.d)
    total = 0.0
    for s in f.shells:
        m = s.radial_moment(2.0 * s.exponent, f.d)
        if not math.isfinite(m):
            raise ValueError(f"shell {s} is not square integrable in dimension {f.d}")
        total += s.coeff ** 2 * w * m
    return total


def make_f_rR(d: int, r1: float, r2: float) -> RadialProfile:
    """``|u|^{-d/2}`` restricted to the annulus ``r1 <= |u| <= r2``."""
    if not r1 > 0.0:
        raise ValueError("inner radius must be positive")
    if not r2 > r1:
        raise ValueError("outer radius must exceed inner radius")
    return RadialProfile(d, (Shell(1.0, -d / 2.0, r1, r2),), {"family": "f_rR", "r1": r1, "r2": r2})


def make_f_R(d: int, R: float) -> RadialProfile:
    """Shorthand for ``make_f_rR(d, 1, R)``."""
    return make_f_rR(d, 1.0, R)


def make_F_alpha(d: int, alpha: float) -> RadialProfile:
    """``|u|^{-alpha}`` on the unit ball; square integrable for ``0 < alpha < d/2``."""
    if not 0.0 < alpha < d / 2.0:
        raise ValueError(f"alpha must lie in (0, d/2) = (0, {d / 2}), got {alpha}")
    return RadialProfile(d, (Shell(1.0, -alpha, 0.0, 1.0),), {"family": "F_alpha", "alpha": alpha})


def superposition_parameters(n_max: int):
    """Radii and weights ``(a_n, lambda_n, r_n, R_n)`` of the nested annuli.

    Stops early when ``r_n`` would leave the normal floating-point range;
    the returned list then has fewer than ``n_max`` rows.
    """
    rows = []
    R = 0.1
    tiny = np.finfo(float).tiny
    for n in range(1, n_max + 1):
        lam = n ** 3 + 2.0
        log_r = math.log(R) - lam
        if log_r < math.log(tiny):
            break
        r = math.exp(log_r)
        rows.append((n ** -2.5, lam, r, R))
        R = r / 8.0
    return rows


def make_annular_superposition(N: int) -> RadialProfile:
    """Weighted sum of ``f_{r_n, R_n}`` over nested, well separated annuli in d = 2."""
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    rows = superposition_parameters(int(N))
    shells = tuple(Shell(a, -1.0, r, R) for a, lam, r, R in rows)
    meta = {
        "family": "annular_superposition",
        "requested_N": int(N),
        "achieved_N": len(rows),
        "a": [row[0] for row in rows],
        "lambda": [row[1] for row in rows],
        "r": [row[2] for row in rows],
        "R": [row[3] for row in rows],
    }
    if len(rows) < N:
        warnings.warn(f"superposition truncated at N={len(rows)}: inner radius underflows",
                      RuntimeWarning, stacklevel=2)
    return RadialProfile(2, shells, meta)


# ---------------------------------------------------------------------------
# sampled signals

@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples ``samples[i] = f(origin + i * h)`` on a uniform grid."""

    d: int
    origin: tuple
    h: tuple
    samples: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != self.d:
            raise ValueError("samples must have one axis per dimension")
        h = tuple(float(v) for v in np.broadcast_to(np.asarray(self.h, dtype=float), (self.d,)))
        origin = tuple(float(v) for v in np.broadcast_to(np.asarray(self.origin, dtype=float), (self.d,)))
        if any(not v > 0.0 for v in h):
            raise ValueError("grid spacing must be strictly positive")
        if samples.size == 0:
            raise ValueError("empty sample array")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axes(self) -> list:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.h, self.shape)]

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def norm_squared(self) -> float:
        return self.cell_volume * float(np.sum(np.abs(self.samples) ** 2))

    @property
    def support_radius(self) -> float:
        """Radius about the origin of a ball containing the sampled box."""
        corners = np.array([[o, o + h * (n - 1)] for o, h, n in zip(self.origin, self.h, self.shape)])
        return float(np.sqrt(np.sum(np.max(np.abs(corners), axis=1) ** 2)))

    def interpolator(self):
        return RegularGridInterpolator(self.axes(), self.samples, method="linear",
                                       bounds_error=False, fill_value=0.0)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        return self.interpolator()(pts)


def sample(f, shape, h, origin=None) -> SampledSignal:
    """Sample a callable signal on a uniform grid.

    Parameters
    ----------
    f : callable
        Any object evaluating on arrays of points with trailing axis ``d``;
        must expose ``d``.
    shape : int or tuple of int
        Number of samples per axis.
    h : float or tuple of float
        Spacing per axis.
    origin : array_like, optional
        First sample point.  Defaults to a grid centred on 0.

    Notes
    -----
    Shell boundaries are not smoothed.  When the grid box does not contain
    the ball of radius ``f.support_radius`` the returned signal carries
    ``meta["covers_support"] = False``.
    """
    d = f.d
    shape = tuple(int(n) for n in np.broadcast_to(np.asarray(shape), (d,)))
    h = np.broadcast_to(np.asarray(h, dtype=float), (d,))
    if origin is None:
        origin = -0.5 * h * (np.asarray(shape) - 1)
    origin = np.broadcast_to(np.asarray(origin, dtype=float), (d,))
    axes = [o + s * np.arange(n) for o, s, n in zip(origin, h, shape)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = np.asarray(f(pts), dtype=complex).reshape(shape)
    covers = True
    R = getattr(f, "support_radius", None)
    if R is not None and math.isfinite(R):
        lo = origin
        hi = origin + h * (np.asarray(shape) - 1)
        covers = bool(np.all(lo <= -R) and np.all(hi >= R))
    return SampledSignal(d, tuple(origin), tuple(h), vals, {"covers_support": covers})


@dataclass(frozen=True)
class ShiftedSignal:
    """Lazy time-frequency shift ``pi(z) f (y) = exp(2 pi i xi.y) f(y - x)``."""

    base: Any
    z: PhaseSpacePoint

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def support_radius(self) -> float:
        return self.base.support_radius + float(vector_norm(self.z.x))

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        x0 = np.asarray(self.z.x)
        xi0 = np.asarray(self.z.xi)
        return np.exp(2j * np.pi * (pts @ xi0)) * self.base(pts - x0)


def time_frequency_shift(s, z: PhaseSpacePoint):
    """Apply ``pi(z)`` to a signal.

    Sampled signals are shifted exactly on their own lattice: the origin
    moves by ``z.x`` and samples pick up the modulation evaluated at the new
    sample positions.  Other signal types are wrapped lazily.
    """
    if not isinstance(z, PhaseSpacePoint):
        z = PhaseSpacePoint.from_array(z)
    if z.d != s.d:
        raise ValueError("dimension mismatch between signal and shift")
    if isinstance(s, SampledSignal):
        origin = np.asarray(s.origin) + np.asarray(z.x)
        axes = [o + h * np.arange(n) for o, h, n in zip(origin, s.h, s.shape)]
        phase = np.ones(s.shape, dtype=complex)
        for k, ax in enumerate(axes):
            sh = [1] * s.d
            sh[k] = -1
            phase = phase * np.exp(2j * np.pi * z.xi[k] * ax).reshape(sh)
        return SampledSignal(s.d, tuple(origin), s.h, s.samples * phase, dict(s.meta))
    if all(v == 0.0 for v in z.x + z.xi):
        return s
    if isinstance(s, ShiftedSignal):
        # pi(z) pi(z0) = exp(-2 pi i xi . x0) pi(z + z0); keep the phase on the base
        raise TypeError("nested lazy shifts are not supported; shift the base once")
    return ShiftedSignal(s, z)


def signal_norm_squared(f) -> float:
    """Squared L^2 norm of any supported signal type (exact where available)."""
    if isinstance(f, RadialProfile):
        return l2_norm_squared(f)
    if isinstance(f, ShiftedSignal):
        return signal_norm_squared(f.base)
    if hasattr(f, "norm_squared"):
        return float(f.norm_squared())
    raise TypeError(f"cannot compute the norm of {type(f).__name__}")
