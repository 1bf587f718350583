"""L^p norms of Born-Jordan distributions over phase-space sets and blow-up scans.

``Omega`` is a finite union of disjoint axis-aligned boxes in ``R^{2d}``.
Fields are sampled at cell centres of a uniform grid; a cell belongs to
``Omega`` when its centre does.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bornjordan import TauQuadratureSpec, bj_field
from .families import (PhaseSpacePoint, critical_exponent, make_f_R, signal_norm_squared,
                       time_frequency_shift, vector_norm)


# ---------------------------------------------------------------------------
# sets and grids

@dataclass(frozen=True, eq=False)
class OmegaSet:
    """Finite union of pairwise disjoint boxes ``[lo, hi]`` in ``R^{2d}``."""

    dimension: int
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_2d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_2d(np.asarray(self.hi, dtype=float))
        if self.dimension < 2 or self.dimension % 2:
            raise ValueError("Omega lives in R^{2d}: dimension must be even and positive")
        if lo.shape != hi.shape or lo.shape[1] != self.dimension:
            raise ValueError("box corners must have length equal to the dimension")
        if lo.shape[0] == 0:
            raise ValueError("Omega must contain at least one box (measure must be positive)")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box corners must be finite (measure must be finite)")
        if np.any(hi <= lo):
            raise ValueError("every box must be non-degenerate (lo < hi on every axis)")
        for i in range(lo.shape[0]):
            for j in range(i):
                if np.all(np.minimum(hi[i], hi[j]) > np.maximum(lo[i], lo[j])):
                    raise ValueError(f"boxes {j} and {i} overlap; boxes must be pairwise disjoint")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OmegaSet):
            return NotImplemented
        return (self.dimension == other.dimension and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    __hash__ = None

    @property
    def d(self) -> int:
        return self.dimension // 2

    @classmethod
    def box(cls, lo, hi) -> "OmegaSet":
        lo = np.asarray(lo, dtype=float)
        return cls(lo.size, lo[None, :], np.asarray(hi, dtype=float)[None, :])

    @classmethod
    def cube(cls, d: int, half_width: float = 1.0, center=None) -> "OmegaSet":
        c = np.zeros(2 * d) if center is None else np.asarray(center, dtype=float)
        return cls.box(c - half_width, c + half_width)

    def volumes(self) -> np.ndarray:
        return np.prod(self.hi - self.lo, axis=1)

    @property
    def measure(self) -> float:
        return float(np.sum(self.volumes()))

    def bounding_box(self) -> tuple:
        return self.lo.min(axis=0), self.hi.max(axis=0)

    @property
    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(vector_norm(hi - lo))

    def contains(self, points) -> np.ndarray:
        """Membership of points (M, 2d) in the closed boxes."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.all((pts[:, None, :] >= self.lo) & (pts[:, None, :] <= self.hi), axis=-1)
        return np.any(inside, axis=1)

    def translate(self, z) -> "OmegaSet":
        z = np.asarray(z.as_array() if isinstance(z, PhaseSpacePoint) else z, dtype=float)
        return OmegaSet(self.dimension, self.lo + z, self.hi + z)

    def to_dict(self) -> dict:
        return {"dimension": self.dimension,
                "boxes": [{"lo": a.tolist(), "hi": b.tolist()} for a, b in zip(self.lo, self.hi)]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj: dict) -> "OmegaSet":
        boxes = obj.get("boxes", [])
        dim = int(obj["dimension"])
        if not boxes:
            raise ValueError("Omega must contain at least one box (measure must be positive)")
        return cls(dim, [b["lo"] for b in boxes], [b["hi"] for b in boxes])

    @classmethod
    def from_json(cls, text: str) -> "OmegaSet":
        return cls.from_dict(json.loads(text))


def density_point(omega: OmegaSet) -> PhaseSpacePoint:
    """Centre of the largest box; ties go to the box listed first.

    Every interior point of a box has density 1 in ``Omega``.
    """
    k = int(np.argmax(omega.volumes()))
    return PhaseSpacePoint.from_array(0.5 * (omega.lo[k] + omega.hi[k]))


@dataclass(frozen=True)
class PhaseGrid:
    """Cell-centred grid on the box ``[lo, hi]`` in ``R^{2d}`` with ``n`` cells per axis."""

    lo: tuple
    hi: tuple
    n: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.ravel(self.lo))
        hi = tuple(float(v) for v in np.ravel(self.hi))
        n = tuple(int(v) for v in np.broadcast_to(np.asarray(self.n), (len(lo),)))
        if len(lo) != len(hi) or len(lo) % 2:
            raise ValueError("grid box must live in R^{2d}")
        if any(b <= a for a, b in zip(lo, hi)) or any(k < 1 for k in n):
            raise ValueError("grid box must be non-degenerate with at least one cell per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)

    @classmethod
    def covering(cls, omega: OmegaSet, n) -> "PhaseGrid":
        lo, hi = omega.bounding_box()
        return cls(tuple(lo), tuple(hi), n)

    @property
    def d(self) -> int:
        return len(self.lo) // 2

    @property
    def h(self) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / np.asarray(self.n)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def axes(self) -> list:
        return [a + s * (np.arange(k) + 0.5) for a, s, k in zip(self.lo, self.h, self.n)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "n": list(self.n)}


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Complex values at the cell centres of a grid (flattened in C order)."""

    grid: PhaseGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).ravel()
        if v.size != int(np.prod(self.grid.n)):
            raise ValueError("values do not match the grid size")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_csv(self, path) -> None:
        pts = self.grid.points()
        d = self.grid.d
        cols = [f"x{i + 1}" for i in range(d)] + [f"xi{i + 1}" for i in range(d)] + ["re", "im"]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# " + json.dumps({"grid": self.grid.to_dict(), **self.meta}, sort_keys=True) + "\n")
            fh.write(",".join(cols) + "\n")
            for p, v in zip(pts, self.values):
                fh.write(",".join(repr(float(c)) for c in p) + f",{float(v.real)!r},{float(v.imag)!r}\n")


@dataclass(frozen=True)
class ConcentrationReport:
    """``value = ||W_BJ f||_{L^p(Omega)}`` on a grid and ``ratio = value / ||f||^2``."""

    p: float
    value: float
    ratio: float
    resolution: tuple
    error: float
    meta: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"p": format_p(self.p), "value": self.value, "ratio": self.ratio,
                "resolution": list(self.resolution), "error": self.error}


def parse_p(p) -> float:
    """Accept floats and the spellings ``"inf"`` / ``"infinity"``; require p >= 1."""
    val = float(p)
    if not val >= 1.0:
        raise ValueError(f"p must be >= 1, got {p!r}")
    return val


def format_p(p: float):
    return "inf" if math.isinf(p) else p


# ---------------------------------------------------------------------------
# norms

def _lp(values: np.ndarray, cell_volume: float, p: float) -> float:
    a = np.abs(values)
    if a.size == 0:
        return 0.0
    m = float(a.max())
    if math.isinf(p) or m == 0.0:
        return m
    return m * float(cell_volume * np.sum((a / m) ** p)) ** (1.0 / p)


def lp_norm_on_omega(fld: PhaseField, omega: OmegaSet, p: float) -> float:
    """Riemann-sum ``L^p(Omega)`` norm over cells whose centres lie in ``Omega``.

    Raises
    ------
    ValueError
        If no cell centre lies in ``Omega``.
    """
    p = parse_p(p)
    if omega.dimension != 2 * fld.grid.d:
        raise ValueError("dimension mismatch between field and Omega")
    mask = omega.contains(fld.grid.points())
    if not np.any(mask):
        raise ValueError("Omega does not meet the field's grid")
    return _lp(fld.values[mask], fld.grid.cell_volume, p)


def field_on_omega(f, omega: OmegaSet, n, spec: TauQuadratureSpec | None = None, *,
                   g=None, threads: int = 1) -> tuple:
    """``W_BJ(f, g)`` on the cells of ``PhaseGrid.covering(omega, n)``.

    Only cells inside ``Omega`` are evaluated; the others are set to 0.
    Returns ``(PhaseField, error_estimate)``.
    """
    grid = PhaseGrid.covering(omega, n)
    pts = grid.points()
    mask = omega.contains(pts)
    vals = np.zeros(pts.shape[0], dtype=complex)
    vals[mask], err = bj_field(f, f if g is None else g, pts[mask], spec, threads=threads,
                               return_error=True)
    return PhaseField(grid, vals, {"delta": (spec or TauQuadratureSpec()).delta}), err


def concentration_ratio(f, omega: OmegaSet, p, n=8, spec: TauQuadratureSpec | None = None,
                        *, threads: int = 1) -> ConcentrationReport:
    """``||W_BJ f||_{L^p(Omega)} / ||f||^2`` on a grid with ``n`` cells per axis.

    The error estimate propagates the largest pointwise quadrature error
    through the norm; it does not include the grid discretisation error.
    """
    p = parse_p(p)
    nf = signal_norm_squared(f)
    if not nf > 0.0:
        raise ValueError("f must be nonzero")
    fld, err = field_on_omega(f, omega, n, spec, threads=threads)
    value = lp_norm_on_omega(fld, omega, p)
    ncell = int(np.sum(omega.contains(fld.grid.points())))
    scale = 1.0 if math.isinf(p) else (ncell * fld.grid.cell_volume) ** (1.0 / p)
    return ConcentrationReport(p, value, value / nf, fld.grid.n, err * scale,
                               {"norm_squared": nf})


# ---------------------------------------------------------------------------
# scans

@dataclass(frozen=True)
class ScanTable:
    """Rows of a parameter scan plus fit diagnostics."""

    columns: tuple
    rows: tuple
    fit: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)

    def to_csv(self, path) -> None:
        names = list(self.columns) + sorted(self.fit)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(names) + "\n")
            for r in self.rows:
                extra = [self.fit[k] for k in sorted(self.fit)]
                fh.write(",".join(format_value(v) for v in list(r) + extra) + "\n")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "inf" if math.isinf(v) else repr(float(v))
    return str(v)


def shrinking_box_grid(center: PhaseSpacePoint, R: float, n: int) -> PhaseGrid:
    """Grid on the cube circumscribing ``B(x0, 1) x B(xi0, 1/(9R))``; n odd keeps the centre."""
    d = center.d
    c = center.as_array()
    w = np.concatenate([np.ones(d), np.full(d, 1.0 / (9.0 * R))])
    return PhaseGrid(tuple(c - w), tuple(c + w), n)


def _in_shrinking_box(pts: np.ndarray, center: PhaseSpacePoint, R: float) -> np.ndarray:
    d = center.d
    c = center.as_array()
    dx = vector_norm(pts[:, :d] - c[:d], axis=1)
    dk = vector_norm(pts[:, d:] - c[d:], axis=1)
    return (dx <= 1.0 + 1e-12) & (dk <= (1.0 + 1e-12) / (9.0 * R))


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def blowup_scan(d: int, p, omega: OmegaSet, R_list, n: int = 5,
                spec: TauQuadratureSpec | None = None, *, threads: int = 1) -> ScanTable:
    """Concentration of ``pi(z0) f_R`` near a density point ``z0`` of ``Omega``.

    For each R the norm is taken over the cells of a grid with ``n`` (>= 5,
    odd) points per axis on ``B(x0, 1) x B(xi0, 1/(9R))`` that also lie in
    ``Omega``.  For finite p this is a lower estimate of the full
    ``L^p(Omega)`` norm.

    The fit reports the exponent of ``ratio * log R`` against R and the
    slope of ``ratio`` against ``log R``.

    Raises
    ------
    ValueError
        For exponents where the concentration ratio stays bounded.
    """
    p = parse_p(p)
    pc = critical_exponent(d)
    if not (p > pc or (math.isinf(p) and math.isinf(pc))):
        raise ValueError(f"p = {p} is subcritical in dimension {d} (critical exponent {pc}); "
                         "the ratio is bounded, use concentration_ratio")
    if omega.d != d:
        raise ValueError("dimension mismatch between Omega and d")
    n = int(n)
    if n < 5:
        raise ValueError("need at least 5 grid points per shrinking axis")
    z0 = density_point(omega)
    rows = []
    for R in R_list:
        R = float(R)
        f = time_frequency_shift(make_f_R(d, R), z0)
        nf = signal_norm_squared(f)
        grid = shrinking_box_grid(z0, R, n)
        pts = grid.points()
        mask = _in_shrinking_box(pts, z0, R) & omega.contains(pts)
        vals = bj_field(f, f, pts[mask], spec, threads=threads)
        value = _lp(vals, grid.cell_volume, p)
        center = bj_field(f, f, z0.as_array()[None, :], spec)[0]
        rows.append((R, value, value / nf, float(abs(center) / nf), int(mask.sum())))
    table = ScanTable(("R", "value", "ratio", "center_ratio", "cells"), tuple(rows))
    fit = {}
    if len(rows) >= 2:
        R = table.column("R")
        ratio = table.column("ratio")
        fit["exponent"] = _loglog_slope(R, ratio * np.log(R))
        fit["log_slope"] = float(np.polyfit(np.log(R), ratio, 1)[0])
        fit["increasing"] = bool(np.all(np.diff(ratio) > 0))
    return ScanTable(table.columns, table.rows, fit)


def delta_scan(omega: OmegaSet, deltas, spec: TauQuadratureSpec | None = None) -> ScanTable:
    """Incomplete Born-Jordan concentration of ``pi(z0) f_{R_delta}`` with ``R_delta = 1/delta - 2``.

    Evaluated at the density point ``z0`` of ``Omega`` (d = 2).  Columns:
    ``delta, R, value, ratio, normalized = ratio / log(1/delta)``.
    """
    if omega.d != 2:
        raise ValueError("delta scans are defined for d = 2")
    z0 = density_point(omega)
    spec = spec or TauQuadratureSpec()
    rows = []
    for delta in deltas:
        delta = float(delta)
        if not 0.0 < delta <= 1.0 / 3.0:
            raise ValueError(f"delta must lie in (0, 1/3], got {delta}")
        R = 1.0 / delta - 2.0
        if R <= 1.0 + 1e-12:
            # f_{R_delta} degenerates to 0; the ratio log R_delta tends to 0
            rows.append((delta, 1.0, 0.0, 0.0, 0.0))
            continue
        f = time_frequency_shift(make_f_R(2, R), z0)
        v = bj_field(f, f, z0.as_array()[None, :], spec.with_delta(delta))[0]
        ratio = abs(v) / signal_norm_squared(f)
        rows.append((delta, R, abs(v), ratio, ratio / math.log(1.0 / delta)))
    return ScanTable(("delta", "R", "value", "ratio", "normalized"), tuple(rows))


def translation_vanishing(phi, omega: OmegaSet, p, shifts, n=8,
                          spec: TauQuadratureSpec | None = None, direction=None, *,
                          threads: int = 1) -> ScanTable:
    """``||W_BJ(pi(s u) phi)||_{L^p(Omega)}`` for shift magnitudes ``s`` along a unit vector u.

    The fit records whether the values are non-increasing for shifts
    beyond ``diameter(Omega) + 5`` plus the last value.
    """
    p = parse_p(p)
    if not p < critical_exponent(phi.d):
        raise ValueError("translation vanishing is a subcritical statement")
    d = phi.d
    u = np.ones(2 * d) if direction is None else np.asarray(direction, dtype=float)
    u = u / vector_norm(u)
    rows = []
    for s in shifts:
        s = float(s)
        z = PhaseSpacePoint.from_array(s * u)
        f = time_frequency_shift(phi, z)
        fld, _ = field_on_omega(f, omega, n, spec, threads=threads)
        rows.append((s, lp_norm_on_omega(fld, omega, p)))
    table = ScanTable(("shift", "value"), tuple(rows))
    sh, val = table.column("shift"), table.column("value")
    tail = val[sh >= omega.diameter + 5.0]
    fit = {"tail_nonincreasing": bool(np.all(np.diff(tail) <= 0.0)) if tail.size else True,
           "last_value": float(val[-1]) if val.size else math.nan}
    return ScanTable(table.columns, table.rows, fit)
