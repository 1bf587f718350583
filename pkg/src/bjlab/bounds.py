"""Closed-form lower and upper bounds used as oracles for the numerical transforms.

Every bound returns a :class:`BoundReport` carrying a validity flag; the
value is ``None`` whenever the hypotheses of the estimate are not met, so
callers never compare against a bound outside its domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import unit_sphere_area
from .quadrature import gauss_legendre

# Smallest R for which the worst-case evaluation over B(0,1) x B(0,1/(9R))
# satisfies the hypotheses of lb_bj in every dimension.
COROLLARY_THRESHOLD = 9.0


@dataclass(frozen=True)
class BoundReport:
    """Result of a bound evaluation.

    Attributes
    ----------
    value : float or None
        The bound, absent when ``valid`` is False.
    valid : bool
    inputs : dict
        Echo of the arguments that determine the bound.
    """

    value: float | None
    valid: bool
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.valid and self.value is not None:
            raise ValueError("an invalid bound carries no value")


def _report(ok: bool, value, **inputs) -> BoundReport:
    return BoundReport(float(value()) if ok else None, bool(ok), inputs)


def cos_factor(R: float, absx: float, absxi: float) -> BoundReport:
    """Factor ``c = cos(4 pi (R + |x|) |xi|)`` with ``Re W_tau f_R(x, xi) >= c W_tau f_R(x, 0)``.

    Valid for ``R >= 1`` and ``4 (R + |x|) |xi| <= 1``.
    """
    ok = R >= 1.0 and absx >= 0.0 and absxi >= 0.0 and 4.0 * (R + absx) * absxi <= 1.0
    return _report(ok, lambda: math.cos(4.0 * math.pi * (R + absx) * absxi),
                   R=R, absx=absx, absxi=absxi)


def lb_wtau_x0(d: int, R: float, absx: float, tau: float) -> BoundReport:
    """Lower bound for ``W_tau f_R(x, 0)`` with ``tau <= 1/2``.

    ``2^{-d/2} omega_{d-1} tau^{-d/2} log((R - |x|) / (1 + |x|) * tau)``, valid
    when ``(1 + |x|) / tau < R - |x|``.  At equality the bound degenerates
    to 0 and is reported as invalid.
    """
    ok = (R >= 1.0 and absx >= 0.0 and 0.0 < tau <= 0.5
          and (1.0 + absx) / tau < R - absx)
    return _report(
        ok,
        lambda: (2.0 ** (-d / 2.0) * unit_sphere_area(d) * tau ** (-d / 2.0)
                 * math.log((R - absx) / (1.0 + absx) * tau)),
        d=d, R=R, absx=absx, tau=tau)


def lb_bj(d: int, R: float, absx: float, absxi: float) -> BoundReport:
    """Lower bound for ``W_BJ f_R(x, xi)``.

    Requires ``8 (R + |x|) |xi| <= 1`` and ``R >= 2 + 3|x|`` (d = 2) or
    ``R >= 4 + 5|x|`` (d > 2).
    """
    if d < 2:
        raise ValueError("bound defined for d >= 2")
    geom = R >= (2.0 + 3.0 * absx if d == 2 else 4.0 + 5.0 * absx)
    ok = R >= 1.0 and absx >= 0.0 and absxi >= 0.0 and geom and 8.0 * (R + absx) * absxi <= 1.0

    def value():
        c = math.cos(4.0 * math.pi * (R + absx) * absxi)
        q = (R - absx) / (1.0 + absx)
        if d == 2:
            return math.pi * c * math.log(0.5 * q) ** 2
        k = 2.0 ** (3 - d) * unit_sphere_area(d) * math.log(2.0) / (d - 2)
        return k * c * (q ** (d / 2.0 - 1.0) - 2.0 ** (d - 2))

    return _report(ok, value, d=d, R=R, absx=absx, absxi=absxi)


def lb_corollary(d: int, R: float) -> BoundReport:
    """Uniform lower bound for ``W_BJ f_R`` on ``B(0,1) x B(0, 1/(9R))``.

    Evaluates :func:`lb_bj` at the worst corner ``|x| = 1``, ``|xi| = 1/(9R)``;
    valid for ``R >= 9``.
    """
    if R < COROLLARY_THRESHOLD:
        return BoundReport(None, False, {"d": d, "R": R})
    rep = lb_bj(d, R, 1.0, 1.0 / (9.0 * R))
    return BoundReport(rep.value, rep.valid, {"d": d, "R": R})


def lb_F_alpha_bj(d: int, alpha: float, absx: float) -> BoundReport:
    """Lower bound for ``W_BJ F_alpha(x, 0)`` with ``1 < alpha < d/2`` and ``0 < |x| < 1``.

    ``2 omega_{d-1} / ((d - alpha)(alpha - 1)) * (|x|^{1-alpha} - ((1+|x|)/2)^{1-alpha})``.
    """
    if not 1.0 < alpha < d / 2.0:
        raise ValueError("need 1 < alpha < d/2")
    ok = 0.0 < absx < 1.0
    k = 2.0 * unit_sphere_area(d) / ((d - alpha) * (alpha - 1.0))
    return _report(ok, lambda: k * (absx ** (1.0 - alpha) - ((1.0 + absx) / 2.0) ** (1.0 - alpha)),
                   d=d, alpha=alpha, absx=absx)


def subcritical_envelope(d: int, p: float, tau: float, leb: float) -> float:
    """Bound ``H_p(tau)`` on ``||W_tau f||_{L^p(Omega)}`` for unit-norm f.

    ``leb^{1/p - 1/2}`` for ``1 <= p <= 2`` and ``(tau (1 - tau))^{-d/2 (1 - 2/p)}``
    for ``p > 2`` (``p = inf`` included).
    """
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if p <= 2.0:
        return leb ** (1.0 / p - 0.5)
    e = 1.0 if math.isinf(p) else 1.0 - 2.0 / p
    return (tau * (1.0 - tau)) ** (-d / 2.0 * e)


def envelope_integral(d: int, p: float, leb: float = 1.0, levels: int = 40) -> tuple:
    """Integrate ``subcritical_envelope`` over (0, 1) on dyadic panels.

    Returns ``(partial_sums, finite)``.  The integral over the dyadic
    layer ``[2^{-k-1}, 2^{-k}]`` (and its mirror image) shrinks
    geometrically when the envelope is integrable and stays constant or
    grows otherwise, so finiteness is read off the ratio of the last two
    layer contributions.
    """
    def layer(a, b):
        t, w = gauss_legendre(a, b, 16)
        return float(np.dot(w, [subcritical_envelope(d, p, ti, leb) for ti in t]))

    total = layer(0.25, 0.75)
    sums, incs = [], []
    for k in range(2, levels + 2):
        inc = 2.0 * layer(2.0 ** (-k - 1), 2.0 ** (-k))
        total += inc
        incs.append(inc)
        sums.append(total)
    finite = incs[-1] < (1.0 - 1e-9) * incs[-2]
    return sums, bool(finite)
