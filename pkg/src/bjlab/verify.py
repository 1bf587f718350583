"""Randomised dominance checks of the numerical transforms against the closed-form bounds."""

from __future__ import annotations

import math

import numpy as np

from .bornjordan import bj_point
from .bounds import cos_factor, lb_bj, lb_wtau_x0
from .families import PhaseSpacePoint, make_f_R
from .tauwigner import wtau_point

LEMMAS = ("cos", "wtau_x0", "bj")
COLUMNS = ("lemma", "d", "R", "absx", "absxi", "tau", "numeric", "bound", "margin", "pass")


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _point(rng, d, absx, absxi) -> PhaseSpacePoint:
    return PhaseSpacePoint(tuple(absx * _unit(rng, d)), tuple(absxi * _unit(rng, d)))


def _loguniform(rng, a, b):
    return math.exp(rng.uniform(math.log(a), math.log(b)))


def check_tuple(lemma: str, d: int, rng, atol: float = 1e-6) -> dict:
    """Draw one valid tuple for ``lemma`` and compare the numeric value with the bound.

    The comparison passes when ``numeric >= bound - atol * max(1, |bound|)``.
    """
    absx = rng.uniform(0.0, 2.0)
    tau = math.nan
    absxi = 0.0
    if lemma == "cos":
        R = _loguniform(rng, 1.0, 50.0)
        absxi = rng.uniform(0.0, 1.0) / (4.0 * (R + absx))
        tau = rng.uniform(0.02, 0.98)
        F = make_f_R(d, R)
        z = _point(rng, d, absx, absxi)
        z0 = PhaseSpacePoint(z.x, (0.0,) * d)
        numeric = wtau_point(F, F, tau, z).value.real
        bound = cos_factor(R, absx, absxi).value * wtau_point(F, F, tau, z0).value.real
    elif lemma == "wtau_x0":
        tau = rng.uniform(0.05, 0.5)
        R = ((1.0 + absx) / tau + absx) * _loguniform(rng, 1.0 + 1e-3, 5.0)
        F = make_f_R(d, R)
        numeric = wtau_point(F, F, tau, _point(rng, d, absx, 0.0)).value.real
        bound = lb_wtau_x0(d, R, absx, tau).value
    elif lemma == "bj":
        thr = 2.0 + 3.0 * absx if d == 2 else 4.0 + 5.0 * absx
        R = thr * _loguniform(rng, 1.0, 20.0)
        absxi = rng.uniform(0.0, 1.0) / (8.0 * (R + absx))
        F = make_f_R(d, R)
        numeric = bj_point(F, F, _point(rng, d, absx, absxi), estimate_error=False).value.real
        bound = lb_bj(d, R, absx, absxi).value
    else:
        raise ValueError(f"unknown lemma {lemma!r}; expected one of {LEMMAS}")
    margin = numeric - bound
    ok = margin >= -atol * max(1.0, abs(bound))
    return {"lemma": lemma, "d": d, "R": R, "absx": absx, "absxi": absxi, "tau": tau,
            "numeric": numeric, "bound": bound, "margin": margin, "pass": bool(ok)}


def verify_bounds(d: int = 2, trials: int = 200, seed: int = 0, lemmas=LEMMAS) -> list:
    """Run ``trials`` random valid tuples per lemma; rows are in a fixed order for a given seed."""
    rng = np.random.default_rng(seed)
    return [check_tuple(lem, d, rng) for lem in lemmas for _ in range(int(trials))]
