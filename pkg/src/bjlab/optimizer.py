"""Projected ascent for the concentration ratio over a Gaussian wavepacket dictionary.

For ``f_c = sum_k c_k pi(z_k) phi`` the Born-Jordan distribution is the
quadratic form ``sum_{j,k} c_j conj(c_k) W_BJ(pi(z_j) phi, pi(z_k) phi)``.
The cross fields are computed once on the cells of ``Omega``, after which
every objective evaluation is a contraction plus an ``L^p`` sum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bornjordan import bj_packets_field
from .concentration import ConcentrationReport, OmegaSet, PhaseGrid, _lp, parse_p
from .families import critical_exponent
from .wavepackets import WavepacketSum, gram, quadratic_norm

MAX_DICTIONARY = 64


@dataclass(frozen=True, eq=False)
class DictionaryCoefficients:
    """``f = sum_k coeffs[k] pi(centers[k]) phi``."""

    centers: np.ndarray
    coeffs: np.ndarray

    def signal(self) -> WavepacketSum:
        return WavepacketSum(self.centers, self.coeffs)

    def norm_squared(self) -> float:
        return quadratic_norm(gram(self.centers), self.coeffs)

    def to_dict(self) -> dict:
        c = np.asarray(self.coeffs)
        return {"centers": np.asarray(self.centers).tolist(),
                "coefficients": [[float(v.real), float(v.imag)] for v in c]}


def lattice_dictionary(omega: OmegaSet, K: int) -> np.ndarray:
    """K centres on a regular lattice filling the bounding box of ``Omega``.

    ``m = ceil(K^{1/2d})`` points per axis at cell centres; the first K
    lattice points in C order are kept.
    """
    if not 1 <= K <= MAX_DICTIONARY:
        raise ValueError(f"dictionary size must lie in [1, {MAX_DICTIONARY}]")
    dim = omega.dimension
    m = 1
    while m ** dim < K:
        m += 1
    lo, hi = omega.bounding_box()
    axes = [a + (b - a) * (np.arange(m) + 0.5) / m for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    return pts[:K]


class ConcentrationProblem:
    """``J(c) = ||W_BJ f_c||_{L^p(Omega)} / ||f_c||^2`` for a fixed dictionary and grid.

    Parameters
    ----------
    omega : OmegaSet
    p : float
        ``1 <= p < p_*(d)``.
    centers : array (K, 2d)
    n : int
        Grid cells per axis on the bounding box of ``Omega``.
    delta : float
        Optional incomplete-distribution truncation.
    rtol : float
        Panel doubling tolerance for the tau integral of the cross fields.
    """

    def __init__(self, omega: OmegaSet, p, centers, n: int = 8, delta: float = 0.0,
                 rtol: float = 1e-12):
        p = parse_p(p)
        d = omega.d
        pc = critical_exponent(d)
        if not p < pc:
            raise ValueError(f"p = {p} is not below the critical exponent {pc} in dimension {d}: "
                             "the concentration ratio is unbounded, so no maximizer exists")
        self.omega = omega
        self.p = p
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        K = self.centers.shape[0]
        if not 1 <= K <= MAX_DICTIONARY:
            raise ValueError(f"dictionary size must lie in [1, {MAX_DICTIONARY}]")
        if self.centers.shape[1] != omega.dimension:
            raise ValueError("dictionary centres must live in the phase space of Omega")
        self.grid = PhaseGrid.covering(omega, n)
        pts = self.grid.points()
        self.points = pts[omega.contains(pts)]
        self.gram = gram(self.centers)
        self.cross = self._cross_fields(delta, rtol)

    def _cross_fields(self, delta, rtol) -> np.ndarray:
        K = self.centers.shape[0]
        panels = 2
        prev = None
        while True:
            P = np.empty((K, K, self.points.shape[0]), dtype=complex)
            for j in range(K):
                for k in range(j, K):
                    P[j, k] = bj_packets_field(self.centers[j], self.centers[k], self.points,
                                               delta, panels)
                    if k != j:
                        P[k, j] = np.conj(P[j, k])
            if prev is not None:
                diff = float(np.max(np.abs(P - prev)))
                if diff <= rtol * max(1.0, float(np.max(np.abs(P)))) or panels >= 128:
                    self.field_error = diff
                    return P
            prev = P
            panels *= 2

    @property
    def K(self) -> int:
        return self.centers.shape[0]

    def norm_squared(self, c) -> float:
        return quadratic_norm(self.gram, c)

    def normalize(self, c) -> np.ndarray:
        return c / math.sqrt(self.norm_squared(c))

    def field(self, c) -> np.ndarray:
        return np.einsum("j,k,jkm->m", c, np.conj(c), self.cross)

    def value(self, c) -> float:
        """``||W_BJ f_c||_{L^p(Omega)}`` (not normalised)."""
        return _lp(self.field(c), self.grid.cell_volume, self.p)

    def objective(self, c) -> float:
        c = np.asarray(c, dtype=complex)
        val = self.value(c) / self.norm_squared(c)
        if not math.isfinite(val):
            raise FloatingPointError(f"non-finite objective {val} at |c| = {np.linalg.norm(c)}")
        return val

    def objective_real(self, v) -> float:
        return self.objective(to_complex(v))

    def gradient(self, c, step: float = 1e-6, threads: int = 1) -> np.ndarray:
        """Central finite-difference gradient in the 2K real coordinates."""
        v = to_real(c)

        def probe(i):
            e = np.zeros_like(v)
            e[i] = step
            return (self.objective_real(v + e) - self.objective_real(v - e)) / (2.0 * step)

        idx = range(v.size)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                return np.array(list(ex.map(probe, idx)))
        return np.array([probe(i) for i in idx])

    def report(self, c) -> ConcentrationReport:
        value = self.value(c)
        nf = self.norm_squared(c)
        return ConcentrationReport(self.p, value, value / nf, self.grid.n, self.field_error,
                                   {"norm_squared": nf})


def to_real(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    return np.concatenate([c.real, c.imag])


def to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    K = v.size // 2
    return v[:K] + 1j * v[K:]


class GradientCheck(NamedTuple):
    """Central-difference directional slopes at a coarse and a fine step."""

    slope_coarse: float
    slope_fine: float


def objective_gradient_check(problem: ConcentrationProblem, c, direction,
                             steps=(1e-3, 1e-4)) -> GradientCheck:
    """Compare central finite-difference slopes of J along ``direction`` at two steps."""
    u = np.asarray(direction, dtype=complex)
    nrm = float(np.linalg.norm(u))
    if nrm == 0.0:
        raise ValueError("direction must be nonzero")
    u = u / nrm
    c = np.asarray(c, dtype=complex)
    out = [(problem.objective(c + h * u) - problem.objective(c - h * u)) / (2.0 * h)
           for h in steps]
    return GradientCheck(*out)


@dataclass
class AscentOptions:
    step: float = 0.1
    shrink: float = 0.5
    armijo: float = 1e-4
    max_iter: int = 200
    rtol: float = 1e-6
    fd_step: float = 1e-6
    min_step: float = 1e-10


@dataclass
class AscentResult:
    coefficients: DictionaryCoefficients
    report: ConcentrationReport
    trace: list
    restarts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": self.report.ratio, "coefficients": self.coefficients.to_dict()["coefficients"],
                "centers": self.coefficients.to_dict()["centers"], "trace": list(self.trace),
                "restart_values": list(self.restarts), "report": self.report.to_dict()}


def ascend(problem: ConcentrationProblem, c0, options: AscentOptions | None = None,
           threads: int = 1) -> tuple:
    """Normalised gradient ascent with Armijo backtracking from ``c0``.

    Returns ``(c, trace)``; ``trace`` holds the objective of every accepted
    iterate and is non-decreasing.
    """
    opt = options or AscentOptions()
    c = problem.normalize(np.asarray(c0, dtype=complex))
    J = problem.objective(c)
    trace = [J]
    for _ in range(opt.max_iter):
        g = problem.gradient(c, opt.fd_step, threads)
        gn2 = float(g @ g)
        if gn2 == 0.0:
            break
        eta = opt.step
        accepted = False
        while eta >= opt.min_step:
            trial = problem.normalize(c + eta * to_complex(g))
            Jt = problem.objective(trial)
            if Jt >= J + opt.armijo * eta * gn2:
                accepted = True
                break
            eta *= opt.shrink
        if not accepted:
            break
        improvement = (Jt - J) / abs(J) if J != 0 else math.inf
        c, J = trial, Jt
        trace.append(J)
        if improvement < opt.rtol:
            break
    return c, trace


def maximize_concentration(omega: OmegaSet, p, K: int = 16, restarts: int = 1, seed: int = 0,
                           n: int = 8, options: AscentOptions | None = None,
                           centers=None, threads: int = 1) -> AscentResult:
    """Search for a maximizer of the concentration ratio over a wavepacket dictionary.

    Restarts draw complex Gaussian initial coefficients from a generator
    seeded by ``seed``; the best final iterate is returned along with its
    trace and the final values of all restarts.
    """
    if centers is None:
        centers = lattice_dictionary(omega, K)
    problem = ConcentrationProblem(omega, p, centers, n=n)
    rng = np.random.default_rng(seed)
    best = None
    finals = []
    for _ in range(max(1, int(restarts))):
        c0 = rng.standard_normal(problem.K) + 1j * rng.standard_normal(problem.K)
        c, trace = ascend(problem, c0, options, threads)
        finals.append(trace[-1])
        if best is None or trace[-1] > best[1][-1]:
            best = (c, trace)
    c, trace = best
    coeffs = DictionaryCoefficients(problem.centers, c)
    return AscentResult(coeffs, problem.report(c), trace, finals)
