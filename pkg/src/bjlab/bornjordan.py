"""Born-Jordan distributions as tau-averages of tau-Wigner distributions.

``W_BJ(f, g) = int_0^1 W_tau(f, g) dtau`` and the incomplete version
integrates over ``[delta, 1 - delta]`` only.  Both halves of the interval
are folded onto ``(0, 1/2]`` through ``W_tau(f, g) = conj(W_{1-tau}(g, f))``;
for ``f = g`` that gives ``2 Re int_0^{1/2}``.

For radial profiles the tau panels are placed at the values where the
integrand changes analytic form, panels on which the integrand is known to
vanish are skipped, and the piece next to ``tau = 0`` is bounded by an
explicit envelope instead of being integrated.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _radial
from .families import PhaseSpacePoint, RadialProfile, SampledSignal, ShiftedSignal, vector_norm
from .quadrature import gauss_legendre, geometric_breaks, sine_graded
from .tauwigner import (QuadResult, _as_point, _decompose, radial_wtau, wtau_point)
from .wavepackets import WavepacketSum, wtau_packets


class EndpointDivergenceError(ArithmeticError):
    """The tau integral cannot be certified near an endpoint.

    Raised when the pointwise envelope of ``W_tau`` is not integrable next
    to ``tau = 0`` (or ``1``) for the requested point, so that a full
    Born-Jordan value may be infinite.  Use a positive ``delta``.
    """


@dataclass(frozen=True)
class TauQuadratureSpec:
    """Plan for the tau quadrature.

    Parameters
    ----------
    delta : float
        Integrate over ``[delta, 1 - delta]``; 0 means the full interval.
    nodes : int
        Gauss-Legendre nodes per panel.
    ratio : float
        Geometric grading ratio; a panel ``[a, b]`` away from 0 keeps
        ``a / b >= ratio``.
    tail_rtol : float
        Relative size allowed for the envelope bound of the skipped piece
        next to ``tau = 0``.
    panels : tuple of (lo, hi, nodes), optional
        Explicit panels covering ``[delta, 1 - delta]``; when given they
        are used as they are for every signal type.
    """

    delta: float = 0.0
    nodes: int = 16
    ratio: float = 0.5
    tail_rtol: float = 1e-8
    panels: tuple | None = None
    inner_nodes: int = 16

    def __post_init__(self):
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError("delta must lie in [0, 1/2]")
        if self.nodes < 2 or self.inner_nodes < 2:
            raise ValueError("node counts must be at least 2")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("grading ratio must lie in (0, 1)")
        if self.panels is not None:
            p = tuple((float(a), float(b), int(n)) for a, b, n in self.panels)
            object.__setattr__(self, "panels", p)
            _validate_panels(p, self.delta)

    def with_delta(self, delta: float) -> "TauQuadratureSpec":
        return replace(self, delta=float(delta))

    def default_panels(self) -> tuple:
        """Symmetric layout graded toward both ends of ``[delta, 1 - delta]``."""
        lo = self.delta if self.delta > 0.0 else 2.0 ** -30
        half = list(geometric_breaks(lo, 0.5, 1.0 / self.ratio))
        if self.delta == 0.0:
            half = [0.0] + half
        right = [1.0 - t for t in reversed(half[:-1])]
        br = half + right
        return tuple((a, b, self.nodes) for a, b in zip(br[:-1], br[1:]))

    def to_dict(self) -> dict:
        out = {"delta": self.delta, "nodes": self.nodes, "ratio": self.ratio,
               "tail_rtol": self.tail_rtol, "inner_nodes": self.inner_nodes}
        out["panels"] = None if self.panels is None else [list(p) for p in self.panels]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj: dict) -> "TauQuadratureSpec":
        kw = {k: obj[k] for k in ("delta", "nodes", "ratio", "tail_rtol", "inner_nodes") if k in obj}
        if obj.get("panels") is not None:
            kw["panels"] = tuple(tuple(p) for p in obj["panels"])
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "TauQuadratureSpec":
        return cls.from_dict(json.loads(text))


def _validate_panels(panels, delta):
    if not panels:
        raise ValueError("explicit panel list is empty")
    if abs(panels[0][0] - delta) > 1e-15 or abs(panels[-1][1] - (1.0 - delta)) > 1e-15:
        raise ValueError("panels must cover [delta, 1 - delta] exactly")
    for (a, b, n), (c, _, _) in zip(panels, panels[1:] + ((panels[-1][1], 0, 2),)):
        if not b > a:
            raise ValueError("each panel needs lo < hi")
        if n < 2:
            raise ValueError("node counts must be at least 2")
        if abs(b - c) > 1e-15:
            raise ValueError("panels must be contiguous and non-overlapping")


def annulus_truncation_delta(r1: float, r2: float, rho: float) -> float:
    """Largest delta with ``(r1 + r2) delta + rho <= r1``.

    For an annular profile supported in ``r1 <= |u| <= r2`` the tau-Wigner
    transform vanishes for ``|x| < rho`` whenever ``tau <= delta`` or
    ``tau >= 1 - delta``.
    """
    if not 0.0 < rho < r1 < r2:
        if rho >= r1:
            raise ValueError("rho must be smaller than r1: no positive delta exists")
        raise ValueError("need 0 < rho < r1 < r2")
    return (r1 - rho) / (r1 + r2)


# ---------------------------------------------------------------------------
# radial profiles

def _same(f, g) -> bool:
    return f is g or f == g


def _half_panels(A: RadialProfile, B: RadialProfile, X: float, spec: TauQuadratureSpec,
                 origin_fast: bool):
    """Active panels of ``(delta, 1/2]`` for ``W_tau(A, B)`` and whether one touches 0."""
    lo = spec.delta
    if origin_fast:
        pts = _radial.origin_tau_breaks(A, B)
    else:
        pts = _radial.tau_breaks(A, B, X)
    br = sorted({lo, 0.5, *[t for t in pts if lo < t < 0.5]})
    br = np.asarray(br)
    if br.size < 2:
        return [], False
    mids = 0.5 * (br[:-1] + br[1:])
    act = _radial.tau_active(A, B, X, mids)
    panels = [(a, b) for a, b, m in zip(br[:-1], br[1:], act) if m]
    touches = bool(panels) and panels[0][0] == 0.0
    return panels, touches


def _tau_rule(panels, spec: TauQuadratureSpec, n=None):
    n = n or spec.nodes
    nodes, weights = [], []
    for a, b in panels:
        if a == 0.0:
            continue
        br = geometric_breaks(a, b, 1.0 / spec.ratio)
        t, w = sine_graded(br[:-1], br[1:], n)
        nodes.append(t.ravel())
        weights.append(w.ravel())
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _integrate(A, B, X, par, perp, t, w, spec, method, sign):
    out = np.zeros(par.shape, dtype=complex)
    for tau, wt in zip(t, w):
        out += wt * radial_wtau(A, B, tau, X, par, perp, n=spec.inner_nodes, method=method,
                                x_sign=sign)
    return out


def _orientation(A, B, X, par, perp, spec, method, sign, estimate_error):
    """``int_delta^{1/2} W_tau(A, B) dtau`` with tail control; returns (value, err, tail)."""
    origin_fast = X == 0.0 and method in ("auto", "radial")
    panels, touches = _half_panels(A, B, X, spec, origin_fast)
    if not panels:
        z = np.zeros(par.shape, dtype=complex)
        return z, 0.0, 0.0
    if touches:
        b0 = panels[0][1]
        head_lo = b0 * 2.0 ** -12
        panels = [(head_lo, b0)] + panels[1:]
    t, w = _tau_rule(panels, spec)
    val = _integrate(A, B, X, par, perp, t, w, spec, method, sign)
    err = 0.0
    if estimate_error:
        t2, w2 = _tau_rule(panels, spec, n=max(4, spec.nodes // 2 + 2))
        alt = _integrate(A, B, X, par, perp, t2, w2, spec, method, sign)
        err = float(np.max(np.abs(val - alt)))
    tail = 0.0
    if touches:
        head = panels[0][0]
        scale = float(np.max(np.abs(val))) if val.size else 0.0
        for _ in range(200):
            tail = _radial.tail_envelope(A, B, X, head)
            if not math.isfinite(tail):
                raise EndpointDivergenceError(
                    f"envelope of W_tau is unbounded near tau = 0 at |x| = {X:g}; "
                    "the Born-Jordan integral may diverge, use delta > 0")
            if tail <= spec.tail_rtol * max(scale, np.finfo(float).tiny):
                break
            new = head * 2.0 ** -8
            if new < 1e-300:
                raise EndpointDivergenceError("tail bound does not decay near tau = 0")
            t, w = _tau_rule([(new, head)], spec)
            val = val + _integrate(A, B, X, par, perp, t, w, spec, method, sign)
            scale = float(np.max(np.abs(val)))
            head = new
    return val, err, tail


def bj_radial(F: RadialProfile, G: RadialProfile, X: float, xi_par, xi_perp,
              spec: TauQuadratureSpec, *, method: str = "auto", x_sign: float = 1.0,
              estimate_error: bool = False):
    """``W_BJ^delta(F, G)`` at ``|x| = X`` for arrays of xi components.

    Returns ``(values, error, tail)``.
    """
    par = np.atleast_1d(np.asarray(xi_par, dtype=float))
    perp = np.atleast_1d(np.asarray(xi_perp, dtype=float))
    if spec.delta >= 0.5:
        return np.zeros(par.shape, dtype=complex), 0.0, 0.0
    if spec.panels is not None:
        return _bj_explicit_radial(F, G, X, par, perp, spec, method, x_sign)
    v1, e1, t1 = _orientation(F, G, X, par, perp, spec, method, x_sign, estimate_error)
    if _same(F, G):
        return 2.0 * v1.real + 0j, 2.0 * e1, 2.0 * t1
    v2, e2, t2 = _orientation(G, F, X, par, perp, spec, method, x_sign, estimate_error)
    return v1 + np.conj(v2), e1 + e2, t1 + t2


def _bj_explicit_radial(F, G, X, par, perp, spec, method, sign):
    out = np.zeros(par.shape, dtype=complex)
    for a, b, n in spec.panels:
        t, w = sine_graded(a, b, n)
        for tau, wt in zip(t, w):
            out += wt * radial_wtau(F, G, tau, X, par, perp, n=spec.inner_nodes,
                                    method=method, x_sign=sign)
    return out, 0.0, 0.0


# ---------------------------------------------------------------------------
# wavepackets

def _as_wavepackets(f):
    """Fold lazy shifts into wavepacket centres; returns None for other types."""
    if isinstance(f, WavepacketSum):
        return f
    if isinstance(f, ShiftedSignal) and isinstance(f.base, WavepacketSum):
        b = f.base
        z0 = f.z.as_array()
        d = b.d
        ph = np.exp(-2j * np.pi * (b.centers[:, d:] @ z0[:d]))
        return WavepacketSum(b.centers + z0, b.coeffs * ph, dict(b.meta))
    return None


_PACKET_CHUNK = 2_000_000


def packet_tau_rule(delta: float, panels: int = 4, nodes: int = 16):
    br = np.linspace(delta, 1.0 - delta, panels + 1)
    t, w = gauss_legendre(br[:-1], br[1:], nodes)
    return t.ravel(), w.ravel()


def bj_packets_field(c1, c2, z: np.ndarray, delta: float = 0.0, panels: int = 4,
                     nodes: int = 16) -> np.ndarray:
    """``W_BJ^delta(pi(c1) phi, pi(c2) phi)`` at points z (M, 2d), closed form in tau."""
    z = np.atleast_2d(z)
    d = z.shape[1] // 2
    t, w = packet_tau_rule(delta, panels, nodes)
    c1 = np.asarray(c1)[None, None, :]
    c2 = np.asarray(c2)[None, None, :]
    out = np.empty(z.shape[0], dtype=complex)
    step = max(1, int(_PACKET_CHUNK // max(1, t.size * d)))
    for s in range(0, z.shape[0], step):
        zz = z[s:s + step]
        out[s:s + step] = wtau_packets(t[None, :], zz[:, None, :d], zz[:, None, d:], c1, c2) @ w
    return out


def bj_packets(f: WavepacketSum, g: WavepacketSum, z: np.ndarray, delta: float = 0.0,
               rtol: float = 1e-13):
    """``W_BJ^delta(f, g)`` at points z (M, 2d) by Gauss-Legendre in tau, doubling to ``rtol``."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if delta >= 0.5:
        return np.zeros(z.shape[0], dtype=complex), 0.0
    panels = 2
    prev = None
    while True:
        val = np.zeros(z.shape[0], dtype=complex)
        for j in range(f.K):
            for k in range(g.K):
                cf = f.coeffs[j] * np.conj(g.coeffs[k])
                if cf != 0:
                    val += cf * bj_packets_field(f.centers[j], g.centers[k], z, delta, panels)
        if prev is not None:
            err = float(np.max(np.abs(val - prev)))
            if err <= rtol * max(1.0, float(np.max(np.abs(val)))) or panels >= 256:
                return val, err
        prev = val
        panels *= 2


# ---------------------------------------------------------------------------
# generic signals

def _sup_and_l1(f):
    if isinstance(f, SampledSignal):
        a = np.abs(f.samples)
        return float(a.max()), float(a.sum()) * f.cell_volume
    if isinstance(f, RadialProfile):
        return f.sup_on_ball(0.0, f.support_radius), f.l1_norm()
    if isinstance(f, ShiftedSignal):
        return _sup_and_l1(f.base)
    raise TypeError(f"no envelope available for {type(f).__name__}")


def _bj_generic(f, g, z: PhaseSpacePoint, spec: TauQuadratureSpec):
    panels = spec.panels or spec.default_panels()
    total = 0j
    err = 0.0
    lo_first = panels[0][0]
    for a, b, n in panels:
        if a == 0.0 or b == 1.0:
            continue
        t, w = sine_graded(a, b, n)
        for tau, wt in zip(t, w):
            r = wtau_point(f, g, float(tau), z, n=spec.inner_nodes)
            total += wt * r.value
            err += wt * r.error
    tail = 0.0
    if lo_first == 0.0:
        tmin = panels[1][0]
        supf, _ = _sup_and_l1(f)
        supg, l1g = _sup_and_l1(g)
        _, l1f = _sup_and_l1(f)
        tail = tmin * (1.0 - tmin) ** (-z.d) * (supf * l1g + supg * l1f)
        if not math.isfinite(tail):
            raise EndpointDivergenceError("signal is unbounded; tail cannot be controlled")
    return total, err, tail


# ---------------------------------------------------------------------------
# public entry points

def _radial_pair(f, g):
    """Return (F, G, z0) when both are radial profiles sharing one shift."""
    zf = zg = None
    if isinstance(f, ShiftedSignal):
        zf, f = f.z, f.base
    if isinstance(g, ShiftedSignal):
        zg, g = g.z, g.base
    if isinstance(f, RadialProfile) and isinstance(g, RadialProfile) and zf == zg:
        return f, g, zf
    return None


def bj_point(f, g, z, spec: TauQuadratureSpec | None = None, *, method: str = "auto",
             estimate_error: bool = True) -> QuadResult:
    """Born-Jordan distribution ``W_BJ^delta(f, g)(z)`` with ``delta = spec.delta``.

    Parameters
    ----------
    f, g : signals
        Radial profiles (optionally shifted by the same phase-space point),
        wavepacket sums or sampled signals.
    z : PhaseSpacePoint or array of length 2d
    spec : TauQuadratureSpec, optional
    method : {"auto", "radial", "polar"}
        Passed to the tau-Wigner evaluator for profile pairs.

    Returns
    -------
    QuadResult
        ``tail`` bounds the neglected piece next to ``tau = 0`` (and 1).

    Raises
    ------
    EndpointDivergenceError
        If the full integral is requested but its endpoint behaviour
        cannot be bounded.
    """
    spec = spec or TauQuadratureSpec()
    z = _as_point(z)
    if f.d != z.d or g.d != z.d:
        raise ValueError("dimension mismatch")
    pair = _radial_pair(f, g)
    if pair is not None:
        F, G, z0 = pair
        if z0 is not None:
            z = z - z0
        x = np.asarray(z.x)
        xi = np.asarray(z.xi)
        X, par, perp = _decompose(x, xi[None, :])
        sign = 1.0
        if F.d == 1:
            sign = 1.0 if x[0] >= 0 else -1.0
            par = xi * sign
        v, e, t = bj_radial(F, G, X, par, perp, spec, method=method, x_sign=sign,
                            estimate_error=estimate_error)
        return QuadResult(complex(v[0]), e, t)
    fp, gp = _as_wavepackets(f), _as_wavepackets(g)
    if fp is not None and gp is not None:
        v, e = bj_packets(fp, gp, z.as_array()[None, :], spec.delta)
        return QuadResult(complex(v[0]), e)
    if spec.delta >= 0.5:
        return QuadResult(0j, 0.0)
    v, e, t = _bj_generic(f, g, z, spec)
    return QuadResult(complex(v), float(e), float(t))


def bj_incomplete_point(f, g, z, delta: float, spec: TauQuadratureSpec | None = None,
                        **kw) -> QuadResult:
    """``int_delta^{1-delta} W_tau(f, g)(z) dtau`` for ``0 < delta <= 1/2``."""
    if not 0.0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    spec = (spec or TauQuadratureSpec()).with_delta(delta)
    if spec.panels is not None:
        spec = replace(spec, panels=None)
    return bj_point(f, g, z, spec, **kw)


# ---------------------------------------------------------------------------
# fields

def _group_radial(F, G, pts: np.ndarray, spec, method, threads, estimate_error):
    d = F.d
    x, xi = pts[:, :d], pts[:, d:]
    if d == 1:
        sign = np.where(x[:, 0] >= 0.0, 1.0, -1.0)
        X = np.abs(x[:, 0])
        par = xi[:, 0] * sign
        perp = np.zeros_like(X)
    else:
        X = vector_norm(x, axis=1)
        safe = np.where(X > 0, X, 1.0)
        e = x / safe[:, None]
        par = np.where(X > 0, np.sum(xi * e, axis=1), vector_norm(xi, axis=1))
        perp = np.where(X > 0, vector_norm(xi - par[:, None] * e, axis=1), 0.0)
    keys, inv = np.unique(X, return_inverse=True)

    def work(i):
        sel = np.flatnonzero(inv == i)
        pq = np.stack([par[sel], perp[sel]], axis=1)
        uq, back = np.unique(pq, axis=0, return_inverse=True)
        v, e, t = bj_radial(F, G, float(keys[i]), uq[:, 0], uq[:, 1], spec, method=method,
                            estimate_error=estimate_error)
        return sel, v[back.ravel()], e + t

    out = np.zeros(pts.shape[0], dtype=complex)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, range(keys.size)))
    else:
        results = [work(i) for i in range(keys.size)]
    err = 0.0
    for sel, v, e in results:
        out[sel] = v
        err = max(err, e)
    return out, err


def bj_field(f, g, points, spec: TauQuadratureSpec | None = None, *, threads: int = 1,
             method: str = "auto", return_error: bool = False):
    """Evaluate ``W_BJ^delta(f, g)`` at many phase-space points (M, 2d).

    Radial pairs are reduced to rotation invariants and share tau nodes
    across points with equal ``|x|``; wavepacket sums are vectorised in
    closed form.  Results do not depend on ``threads``.

    With ``return_error`` the largest per-point error estimate (quadrature
    plus endpoint tail) is returned as a second value.
    """
    spec = spec or TauQuadratureSpec()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        out, err = np.zeros(0, dtype=complex), 0.0
    elif (pair := _radial_pair(f, g)) is not None:
        F, G, z0 = pair
        if z0 is not None:
            pts = pts - z0.as_array()[None, :]
        out, err = _group_radial(F, G, pts, spec, method, threads, return_error)
    elif (fp := _as_wavepackets(f)) is not None and (gp := _as_wavepackets(g)) is not None:
        out, err = bj_packets(fp, gp, pts, spec.delta)
    else:
        res = [bj_point(f, g, p, spec, estimate_error=return_error) for p in pts]
        out = np.array([r.value for r in res])
        err = max(r.error + r.tail for r in res)
    return (out, float(err)) if return_error else out
