"""Independent reference computations used only by the test suite.

These routines deliberately avoid the package's polar machinery: the
tau-Wigner integral is done in Cartesian coordinates with nested adaptive
quadrature, splitting each line integral exactly where it crosses a
shell boundary.
"""

import math

import numpy as np
from scipy import integrate
from scipy.special import j0


def _line_breaks(c, a, radii):
    """Parameters t where |c + a t| equals one of ``radii`` (a != 0)."""
    out = []
    A = a * a
    B = 2.0 * c * a
    for r in radii:
        C = c * c - r * r
        disc = B * B - 4 * A * C
        if disc >= 0:
            s = math.sqrt(disc)
            out += [(-B - s) / (2 * A), (-B + s) / (2 * A)]
    return out


def wtau_cartesian_2d(f, g, tau, x, xi, epsabs=1e-11, epsrel=1e-10, d=2):
    """W_tau(f, g)(x, xi) for radial profiles by nested adaptive quadrature.

    ``d = 2`` integrates over the plane.  ``d = 3`` uses cylindrical
    coordinates about the x-axis, assuming ``x = (X, 0)`` and
    ``xi = (xi_par, xi_perp)``; the azimuthal integral gives a Bessel factor.
    """
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    rf = [r for s in f.shells for r in (s.r_in, s.r_out)]
    rg = [r for s in g.shells for r in (s.r_in, s.r_out)]
    L = (f.support_radius + g.support_radius + 2 * np.linalg.norm(x)) + 1e-9

    def inner(y1, part):
        # y2 breakpoints: |x + tau y| = q and |x - (1-tau) y| = r along the vertical line
        pts = []
        for q in rf:
            c1 = x[0] + tau * y1
            rem = q * q - c1 * c1
            if rem >= 0:
                s = math.sqrt(rem)
                pts += [(s - x[1]) / tau, (-s - x[1]) / tau]
        for r in rg:
            c1 = x[0] - (1 - tau) * y1
            rem = r * r - c1 * c1
            if rem >= 0:
                s = math.sqrt(rem)
                pts += [(x[1] - s) / (1 - tau), (x[1] + s) / (1 - tau)]
        pts = sorted(p for p in pts if -L < p < L)

        def h(y2):
            y = np.array([y1, y2])
            if d == 2:
                ph = np.exp(-2j * np.pi * xi @ y)
            else:
                ph = np.exp(-2j * np.pi * xi[0] * y1) * 2 * np.pi * y2 * j0(2 * np.pi * xi[1] * y2)
            fx = f.radial(np.hypot(x[0] + tau * y1, x[1] + tau * y2))
            gx = g.radial(np.hypot(x[0] - (1 - tau) * y1, x[1] - (1 - tau) * y2))
            val = ph * fx * np.conj(gx)
            return float(val.real if part == 0 else val.imag)

        grid = ([-L] if d == 2 else [0.0]) + [p for p in pts if d == 2 or p > 0] + [L]
        tot = 0.0
        for a, b in zip(grid[:-1], grid[1:]):
            if b > a:
                tot += integrate.quad(h, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
        return tot

    out = []
    for part in (0, 1):
        # outer breakpoints: tangencies of vertical lines with the circles
        pts = []
        for q in rf:
            pts += [(q - x[0]) / tau, (-q - x[0]) / tau]
        for r in rg:
            pts += [(x[0] - r) / (1 - tau), (x[0] + r) / (1 - tau)]
        pts = sorted(p for p in pts if -L < p < L)
        grid = [-L] + pts + [L]
        tot = 0.0
        for a, b in zip(grid[:-1], grid[1:]):
            if b > a:
                tot += integrate.quad(inner, a, b, args=(part,), epsabs=epsabs, epsrel=epsrel,
                                      limit=200)[0]
        out.append(tot)
    return complex(out[0], out[1])


def wtau_line_1d(f, g, tau, x, xi):
    """W_tau(f, g)(x, xi) in d = 1 by adaptive quadrature with exact breakpoints."""
    pts = []
    for s in f.shells:
        for q in (s.r_in, s.r_out):
            pts += [(q - x) / tau, (-q - x) / tau]
    for s in g.shells:
        for r in (s.r_in, s.r_out):
            pts += [(x - r) / (1 - tau), (x + r) / (1 - tau)]
    pts = sorted(set(pts))
    out = 0j
    for a, b in zip(pts[:-1], pts[1:]):
        for part in (0, 1):
            def h(y):
                v = np.exp(-2j * np.pi * xi * y) * f(np.array([x + tau * y])) * np.conj(
                    g(np.array([x - (1 - tau) * y])))
                return float(v.real if part == 0 else v.imag)
            r = integrate.quad(h, a, b, epsabs=1e-12, epsrel=1e-11, limit=400)[0]
            out += r if part == 0 else 1j * r
    return out


def bj_fR_origin_d3(R):
    """W_BJ f_R(0, 0) in d = 3 by one-dimensional quadrature in u = tau/(1-tau)."""
    w2 = 4 * math.pi
    val = integrate.quad(lambda u: math.log(R * u) * u ** -1.5 * (1 + u), 1.0 / R, 1.0,
                         epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return 2 * w2 * val
