"""tau-Wigner transforms of pairs of radial piecewise-power profiles.

For ``0 < tau < 1`` the substitution ``v = x - (1 - tau) y`` gives

    W_tau(F, G)(x, xi) = (1-tau)^{-d} exp(-2 pi i xi.x / (1-tau))
                         * int conj(G(v)) F((x - tau v)/(1-tau)) exp(2 pi i xi.v/(1-tau)) dv,

which stays well scaled as ``tau -> 0``.  With ``v`` in polar form around
the axis ``x/|x|`` the support of each shell pair is a region bounded by
explicit curves, so the integral splits into panels on which the
integrand is smooth apart from square-root behaviour at panel ends (taken
care of by the sine-graded rule) and, for profiles singular at the origin,
a point singularity that is resolved by geometric grading.

Everything here works with ``|x|`` and the components of ``xi`` parallel
and perpendicular to ``x``; rotation invariance of radial profiles makes
that sufficient.  ``tau <= 1/2`` is assumed by the polar routines; callers
use ``W_tau(F, G) = conj(W_{1-tau}(G, F))`` for the other half.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import j0

from .families import RadialProfile, Shell, unit_sphere_area
from .quadrature import gauss_legendre, geometric_breaks, sine_graded

_CHUNK = 4_000_000
_SING_LEVELS = 48


def _angular_factor(d: int, s):
    """Average of ``exp(i s e.w)`` over the unit sphere in R^d."""
    if d == 1:
        return np.cos(s)
    if d == 2:
        return j0(s)
    return np.sinc(s / np.pi)


def _pairs(F: RadialProfile, G: RadialProfile):
    for g in G.shells:
        for f in F.shells:
            yield f, g


# ---------------------------------------------------------------------------
# x = 0

def wtau_origin(F: RadialProfile, G: RadialProfile, tau: float, kxi, n: int = 24):
    """``W_tau(F, G)(0, xi)`` for ``|xi|`` values ``kxi`` (array, shape (M,)).

    At ``xi = 0`` every shell pair integrates in closed form.  Otherwise the
    radial integral carries the spherical average of the plane wave and is
    done by Gauss-Legendre panels.
    """
    d = F.d
    kxi = np.atleast_1d(np.asarray(kxi, dtype=float))
    out = np.zeros(kxi.shape, dtype=complex)
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    lam = tau / (1.0 - tau)
    omega = unit_sphere_area(d)
    k = 2.0 * np.pi * kxi / (1.0 - tau)
    zero = k == 0.0
    for f, g in _pairs(F, G):
        lo = max(g.r_in, f.r_in / lam)
        hi = min(g.r_out, f.r_out / lam)
        if not hi > lo:
            continue
        coef = g.coeff * f.coeff * lam ** f.exponent * omega / (1.0 - tau) ** d
        power = g.exponent + f.exponent
        if np.any(zero):
            out[zero] += coef * Shell(1.0, 0.0, lo, hi).radial_moment(power, d)
        if np.all(zero):
            continue
        kk = k[~zero]
        if lo == 0.0:
            breaks = np.concatenate([[0.0], geometric_breaks(hi * 2.0 ** -_SING_LEVELS, hi)])
        else:
            breaks = geometric_breaks(lo, hi)
        width = np.max(np.diff(breaks))
        m = n + int(math.ceil(np.max(kk) * width / 2.0))
        rho, w = gauss_legendre(breaks[:-1], breaks[1:], m)
        rho, w = rho.ravel(), w.ravel()
        wr = w * rho ** (power + d - 1)
        for s in range(0, kk.size, max(1, _CHUNK // rho.size)):
            ks = kk[s:s + _CHUNK // rho.size or 1]
            vals = _angular_factor(d, ks[:, None] * rho[None, :]) @ wr
            idx = np.flatnonzero(~zero)[s:s + ks.size]
            out[idx] += coef * vals
    return out


def origin_tau_breaks(F: RadialProfile, G: RadialProfile) -> list:
    """Values of tau in (0, 1/2] where the x = 0 integrand changes form."""
    pts = set()
    for f, g in _pairs(F, G):
        for q in (f.r_in, f.r_out):
            for r in (g.r_in, g.r_out):
                if q > 0.0 and r + q > 0.0:
                    t = q / (q + r)
                    if 0.0 < t <= 0.5:
                        pts.add(t)
    return sorted(pts)


# ---------------------------------------------------------------------------
# x != 0

def _scaled(X, tr, qq):
    """Return ``(A, B, Q, m)`` with every length divided by ``m = max(X, tr)``."""
    m = np.maximum(X, tr)
    with np.errstate(over="ignore"):
        return X / m, tr / m, qq / m, m


def _s_bound(A, B, Q):
    """``1 - cos`` at which ``|x - tau v| = (1-tau) q`` in scaled units; clipped to [0, 2]."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        s = (Q * Q - (A - B) ** 2) / (2.0 * A * B)
    s = np.where(np.isnan(s), np.where(Q > np.abs(A - B), 2.0, 0.0), s)
    return np.clip(s, 0.0, 2.0)


def rho_breaks(f: Shell, g: Shell, tau: float, X: float):
    """Panel breaks in ``rho = |v|`` and the list of singular points."""
    c = 1.0 - tau
    lo = max(g.r_in, (c * f.r_in - X) / tau, (X - c * f.r_out) / tau, 0.0)
    hi = min(g.r_out, (X + c * f.r_out) / tau)
    if not hi > lo:
        return None, ()
    pts = {lo, hi}
    for q in (f.r_in, f.r_out):
        if q == 0.0:
            continue
        for p in ((X + c * q) / tau, (X - c * q) / tau, (c * q - X) / tau):
            if lo < p < hi:
                pts.add(p)
    sing = []
    if f.singular:
        p0 = X / tau
        if lo <= p0 <= hi:
            pts.add(p0)
            sing.append(p0)
    if g.singular and lo == 0.0:
        sing.append(0.0)
    return np.array(sorted(pts)), tuple(sing)


def _levels(p: float, span: float, levels: int) -> int:
    """Grading depth toward ``p``, stopping well above the rounding scale of ``p``."""
    if p == 0.0 or span <= 0.0:
        return levels
    return int(max(1, min(levels, math.floor(math.log2(span / (1e-10 * abs(p)))))))


def _graded_pieces(a: float, b: float, sing, levels: int) -> list:
    """Breaks on [a, b] refined geometrically toward whichever ends are in ``sing``."""
    at_a = any(a == p for p in sing)
    at_b = any(b == p for p in sing)
    span = b - a
    if at_a and at_b:
        mid = 0.5 * (a + b)
        la, lb = _levels(a, 0.5 * span, levels), _levels(b, 0.5 * span, levels)
        return ([a] + [a + 0.5 * span * 2.0 ** -k for k in range(la, 0, -1)] + [mid]
                + [b - 0.5 * span * 2.0 ** -k for k in range(1, lb + 1)] + [b])
    if at_a:
        la = _levels(a, span, levels)
        return [a] + [a + span * 2.0 ** -k for k in range(la, 0, -1)] + [b]
    if at_b:
        lb = _levels(b, span, levels)
        return [a] + [b - span * 2.0 ** -k for k in range(1, lb + 1)] + [b]
    return [a, b]


def _refine(breaks: np.ndarray, sing: tuple, levels: int = _SING_LEVELS) -> np.ndarray:
    """Split panels so each has end ratio <= 2 and grade toward singular points."""
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        pieces = _graded_pieces(a, b, sing, levels)
        # bound the end ratio of panels away from the origin
        fine = [pieces[0]]
        for p, q in zip(pieces[:-1], pieces[1:]):
            fine.extend(geometric_breaks(p, q)[1:] if p > 0 else [q])
        out.extend(fine[1:])
    return np.unique(np.asarray(out))


def _power_integral(D, c, lo, hi, p):
    """``int_lo^hi (D + c s)^{p-1} ds`` evaluated stably (all arrays)."""
    Elo = D + c * lo
    rel = c * (hi - lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        if p == 0.0:
            val = np.log1p(rel / Elo) / c
        else:
            val = Elo ** p * np.expm1(p * np.log1p(rel / Elo)) / (p * c)
            zero_lo = Elo == 0.0
            if np.any(zero_lo):
                val = np.where(zero_lo, (Elo + rel) ** p / (p * c), val)
    return np.where(hi > lo, val, 0.0)


def wtau_polar(F: RadialProfile, G: RadialProfile, tau: float, X: float,
               xi_par, xi_perp, n: int = 16):
    """``W_tau(F, G)`` at ``|x| = X`` for ``d in {2, 3}`` and ``tau <= 1/2``.

    Parameters
    ----------
    xi_par, xi_perp : array_like, shape (M,)
        Components of xi along ``x/|x|`` and the length of the remainder.
        When ``X = 0`` any splitting of xi may be used.
    n : int
        Base node count per panel in each variable.
    """
    d = F.d
    if d not in (2, 3):
        raise ValueError("polar evaluation is for d = 2 or 3")
    xp = np.atleast_1d(np.asarray(xi_par, dtype=float))
    xq = np.abs(np.atleast_1d(np.asarray(xi_perp, dtype=float)))
    c = 1.0 - tau
    kp = 2.0 * np.pi * xp / c
    kq = 2.0 * np.pi * xq / c
    kmax = float(np.max(np.hypot(kp, kq))) if kp.size else 0.0
    all_zero = kmax == 0.0
    out = np.zeros(xp.shape, dtype=complex)
    for f, g in _pairs(F, G):
        if X == 0.0:
            lo = max(g.r_in, c * f.r_in / tau)
            hi = min(g.r_out, c * f.r_out / tau)
            if not hi > lo:
                continue
            breaks, sing = np.array([lo, hi]), ((0.0,) if (g.singular or f.singular) and lo == 0.0 else ())
        else:
            breaks, sing = rho_breaks(f, g, tau, X)
            if breaks is None:
                continue
        breaks = _refine(breaks, sing)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        active = _active(f, tau, X, mids)
        a, b = breaks[:-1][active], breaks[1:][active]
        if a.size == 0:
            continue
        m_rho = n + int(math.ceil(kmax * float(np.max(b - a)) / 2.0))
        rho, wr = sine_graded(a, b, m_rho)
        rho, wr = rho.ravel(), wr.ravel()
        keep = wr > 0.0
        rho, wr = rho[keep], wr[keep]
        wr = wr * g.coeff * rho ** (g.exponent + d - 1)
        if X == 0.0:
            s_lo = np.zeros_like(rho)
            s_hi = np.full_like(rho, 2.0)
            A = np.zeros_like(rho)
            B = np.ones_like(rho)
            m = tau * rho
        else:
            A, B, Qin, m = _scaled(X, tau * rho, c * f.r_in)
            _, _, Qout, _ = _scaled(X, tau * rho, c * f.r_out)
            s_lo = np.zeros_like(rho) if f.r_in == 0.0 else _s_bound(A, B, Qin)
            s_hi = _s_bound(A, B, Qout)
        D = (A - B) ** 2
        cc = 2.0 * A * B
        fpref = f.coeff * c ** (-f.exponent)
        if all_zero and d == 3 and X > 0.0:
            ang = 2.0 * np.pi * _power_integral(D, cc, s_lo, s_hi, 0.5 * f.exponent + 1.0)
            ang = ang * m ** f.exponent
            out += fpref * np.dot(wr, ang)
            continue
        # numerical angular rule
        span_theta = _theta(s_hi) - _theta(s_lo)
        m_ang = n + int(math.ceil(kmax * float(np.max(rho * span_theta)) / 2.0))
        if f.singular and X > 0.0:
            u, wu = _graded_unit(m_ang, D, cc, s_lo, s_hi, d)
        else:
            u, wu = gauss_legendre(0.0, 1.0, m_ang)
            u = np.broadcast_to(u, (rho.size, m_ang))
            wu = np.broadcast_to(wu, (rho.size, m_ang))
        if d == 2:
            th_lo, th_hi = _theta(s_lo), _theta(s_hi)
            th = th_lo[:, None] + (th_hi - th_lo)[:, None] * u
            wa = (th_hi - th_lo)[:, None] * wu
            s = 2.0 * np.sin(0.5 * th) ** 2
            cos_t, sin_t = np.cos(th), np.sin(th)
        else:
            s = s_lo[:, None] + (s_hi - s_lo)[:, None] * u
            wa = (s_hi - s_lo)[:, None] * wu
            cos_t = 1.0 - s
            sin_t = np.sqrt(np.clip(s * (2.0 - s), 0.0, None))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            dist = np.sqrt(D[:, None] + cc[:, None] * s)
            fval = np.where(wa > 0.0, (dist ** f.exponent) * m[:, None] ** f.exponent, 0.0)
        wa = wa * fval
        if all_zero:
            base = 2.0 if d == 2 else 2.0 * np.pi
            out += fpref * base * np.dot(wr, wa.sum(axis=1))
            continue
        rr = rho[:, None]
        size = rho.size * wa.shape[1]
        step = max(1, _CHUNK // size)
        for i0 in range(0, xp.size, step):
            sl = slice(i0, i0 + step)
            ph = np.exp(1j * kp[sl, None, None] * rr * cos_t)
            if d == 2:
                ker = 2.0 * ph * np.cos(kq[sl, None, None] * rr * sin_t)
            else:
                ker = 2.0 * np.pi * ph * j0(kq[sl, None, None] * rr * sin_t)
            out[sl] += fpref * np.einsum("mpa,pa,p->m", ker, wa, wr)
    return out * c ** (-d) * np.exp(-2j * np.pi * xp * X / c)


def _theta(s):
    return 2.0 * np.arcsin(np.sqrt(np.clip(0.5 * s, 0.0, 1.0)))


def _active(f: Shell, tau: float, X: float, rho):
    c = 1.0 - tau
    tr = tau * rho
    near, far = np.abs(X - tr), X + tr
    return (near < c * f.r_out) & (far > c * f.r_in)


def _graded_unit(m, D, cc, s_lo, s_hi, d):
    """Per-node unit-interval rule graded toward the lower end.

    The lower end corresponds to ``theta = 0`` where a singular shell
    blows up; the grading depth adapts to the smallest relative width of
    the spike among the nodes.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        width = D / np.where(cc > 0, cc, np.inf)
        if d == 2:
            span = np.maximum(_theta(s_hi) - _theta(s_lo), 1e-300)
            rel = np.sqrt(width) / span
        else:
            rel = width / np.maximum(s_hi - s_lo, 1e-300)
    rel = rel[np.isfinite(rel) & (rel > 0)]
    tiny = float(np.min(rel)) if rel.size else 1.0
    levels = int(min(60, max(2, math.ceil(-math.log2(max(tiny, 1e-18))) + 3)))
    br = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1.0)])
    u, w = gauss_legendre(br[:-1], br[1:], max(6, m // 2))
    u, w = u.ravel(), w.ravel()
    shape = (D.size, u.size)
    return np.broadcast_to(u, shape), np.broadcast_to(w, shape)


# ---------------------------------------------------------------------------
# d = 1

def wtau_line(F: RadialProfile, G: RadialProfile, tau: float, x: float, xi, n: int = 16):
    """``W_tau(F, G)(x, xi)`` in d = 1 for ``tau <= 1/2`` and signed ``x``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    c = 1.0 - tau
    pts = set()
    sing = []
    for g in G.shells:
        for r in (g.r_in, g.r_out):
            pts.update((r, -r))
        if g.singular:
            sing.append(0.0)
    for f in F.shells:
        for q in (f.r_in, f.r_out):
            pts.update(((x - c * q) / tau, (x + c * q) / tau))
        if f.singular:
            sing.append(x / tau)
    R = G.support_radius
    pts = np.array(sorted(p for p in pts if -R <= p <= R))
    if pts.size < 2:
        return np.zeros(xi.shape, dtype=complex)
    for p in sing:
        if pts[0] < p < pts[-1]:
            pts = np.unique(np.append(pts, p))
    out_breaks = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        out_breaks.extend(_graded_pieces(a, b, sing, _SING_LEVELS)[1:])
    br = np.unique(np.asarray(out_breaks))
    mids = 0.5 * (br[:-1] + br[1:])
    live = (G.radial(np.abs(mids)) != 0.0) & (F.radial(np.abs((x - tau * mids) / c)) != 0.0)
    a, b = br[:-1][live], br[1:][live]
    out = np.zeros(xi.shape, dtype=complex)
    if a.size == 0:
        return out
    k = 2.0 * np.pi * xi / c
    kmax = float(np.max(np.abs(k)))
    m = n + int(math.ceil(kmax * float(np.max(b - a)) / 2.0))
    v, w = sine_graded(a, b, m)
    v, w = v.ravel(), w.ravel()
    vals = w * np.conj(G.radial(np.abs(v))) * F.radial(np.abs((x - tau * v) / c))
    for s in range(0, xi.size, max(1, _CHUNK // v.size)):
        sl = slice(s, s + max(1, _CHUNK // v.size))
        out[sl] = np.exp(1j * k[sl, None] * v[None, :]) @ vals
    return out / c * np.exp(-2j * np.pi * xi * x / c)


# ---------------------------------------------------------------------------
# tau geometry

def tau_breaks(F: RadialProfile, G: RadialProfile, X: float) -> list:
    """Values of tau in (0, 1/2] where ``tau -> W_tau(F, G)(x, .)`` may be non-smooth.

    These are the tangency events between the spheres ``|v| = r`` bounding
    shells of G and the spheres ``|x - tau v| = (1 - tau) q`` bounding
    shells of F.
    """
    pts = set()
    for f in F.shells:
        for g in G.shells:
            for q in (f.r_in, f.r_out):
                for r in (g.r_in, g.r_out):
                    cand = []
                    if r + q > 0.0:
                        cand += [(q + X) / (r + q), (q - X) / (r + q)]
                    if q != r:
                        cand.append((q - X) / (q - r))
                    for t in cand:
                        if 0.0 < t <= 0.5 and math.isfinite(t):
                            pts.add(t)
    return sorted(pts)


def tau_active(F: RadialProfile, G: RadialProfile, X: float, tau) -> np.ndarray:
    """Whether ``W_tau(F, G)(x, .)`` can be nonzero at ``|x| = X``.

    A shell pair contributes only if ``X`` lies between
    ``max(0, (1-tau) a_F - tau b_G, tau a_G - (1-tau) b_F)`` and
    ``(1-tau) b_F + tau b_G`` for the shells' inner and outer radii.
    """
    tau = np.asarray(tau, dtype=float)
    act = np.zeros(tau.shape, dtype=bool)
    for f in F.shells:
        for g in G.shells:
            c = 1.0 - tau
            lo = np.maximum(0.0, np.maximum(c * f.r_in - tau * g.r_out, tau * g.r_in - c * f.r_out))
            hi = c * f.r_out + tau * g.r_out
            act |= (lo <= X) & (X <= hi)
    return act


def tail_envelope(F: RadialProfile, G: RadialProfile, X: float, tau_min: float) -> float:
    """Upper bound for ``int_0^tau_min |W_tau(F, G)(x, xi)| dtau`` (any xi)."""
    c = 1.0 - tau_min
    radius = tau_min * (X + G.support_radius) / c
    sup = F.sup_on_ball(X, radius)
    return tau_min * c ** (-F.d) * sup * G.l1_norm()
