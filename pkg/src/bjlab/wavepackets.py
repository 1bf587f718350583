"""Finite sums of Gaussian wavepackets with closed-form tau-Wigner transforms.

The window is the L^2-normalised Gaussian ``phi(t) = 2^{d/4} exp(-pi |t|^2)``
and a packet at ``z_k = (a_k, eta_k)`` is ``pi(z_k) phi``.  Overlaps and
``W_tau(pi(z_j) phi, pi(z_k) phi)`` are evaluated analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class WavepacketSum:
    """``f = sum_k coeffs[k] * pi(centers[k]) phi``.

    Parameters
    ----------
    centers : array, shape (K, 2d)
        Phase-space centres ``(a_k, eta_k)``.
    coeffs : array, shape (K,)
        Complex weights.
    """

    centers: np.ndarray
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        w = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.shape[1] % 2 or c.shape[0] != w.shape[0]:
            raise ValueError("centers must be (K, 2d) and match coeffs (K,)")
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coeffs", w)

    @property
    def d(self) -> int:
        return self.centers.shape[1] // 2

    @property
    def K(self) -> int:
        return self.centers.shape[0]

    @property
    def support_radius(self) -> float:
        return np.inf

    @classmethod
    def gaussian(cls, d: int, scale: float = 1.0) -> "WavepacketSum":
        """``scale * exp(-pi |t|^2)`` (note: not normalised unless ``scale = 2^{d/4}``)."""
        return cls(np.zeros((1, 2 * d)), np.array([scale * 2.0 ** (-d / 4.0)]))

    def gram(self) -> np.ndarray:
        return gram(self.centers)

    def norm_squared(self) -> float:
        return quadratic_norm(self.gram(), self.coeffs)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        d = self.d
        if d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        a, eta = self.centers[:, :d], self.centers[:, d:]
        diff = pts[..., None, :] - a
        vals = 2.0 ** (d / 4.0) * np.exp(-np.pi * np.sum(diff ** 2, axis=-1)
                                         + 2j * np.pi * (pts @ eta.T))
        return vals @ self.coeffs


def gram(centers) -> np.ndarray:
    """Matrix ``G[j, k] = <pi(z_j) phi, pi(z_k) phi>`` (linear in the first slot)."""
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    d = c.shape[1] // 2
    a, eta = c[:, :d], c[:, d:]
    da = a[:, None, :] - a[None, :, :]
    de = eta[:, None, :] - eta[None, :, :]
    sa = a[:, None, :] + a[None, :, :]
    expo = -0.5 * np.pi * (da ** 2 + de ** 2) + 1j * np.pi * de * sa
    return np.exp(np.sum(expo, axis=-1))


def wtau_packets(tau, x, xi, c1, c2) -> np.ndarray:
    """``W_tau(pi(c1) phi, pi(c2) phi)(x, xi)``, fully broadcast.

    Parameters
    ----------
    tau : array_like
        Values in [0, 1]; broadcast against the leading axes of x and xi.
    x, xi : array_like, shape (..., d)
    c1, c2 : array_like, shape (..., 2d)
        Packet centres; broadcast against x.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    d = x.shape[-1]
    tau = np.asarray(tau, dtype=float)[..., None]
    a1, e1 = c1[..., :d], c1[..., d:]
    a2, e2 = c2[..., :d], c2[..., d:]
    om = tau * e1 + (1.0 - tau) * e2
    xp = x - (1.0 - tau) * a1 - tau * a2
    k = xi - om
    A = tau ** 2 + (1.0 - tau) ** 2
    expo = (-2.0 * np.pi * xp ** 2 + np.pi * (xp * (2.0 * tau - 1.0) + 1j * k) ** 2 / A
            + 2j * np.pi * (e1 - e2) * x - 2j * np.pi * k * (a1 - a2))
    return (2.0 / A[..., 0]) ** (d / 2.0) * np.exp(np.sum(expo, axis=-1))


def quadratic_norm(G: np.ndarray, c) -> float:
    """``||sum_k c_k pi(z_k) phi||^2 = sum_{j,k} c_j conj(c_k) G[j, k]``."""
    c = np.asarray(c, dtype=complex)
    return float(np.real(c @ G @ np.conj(c)))
