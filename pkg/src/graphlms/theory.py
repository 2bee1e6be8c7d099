"""Closed-form mean-square performance of the graph LMS recursion.

With ``M = I - mu U_F^T D U_F`` and ``G = U_F^T D C_v D U_F`` the weighted
variance recursion is driven by ``Q = M ⊗ M``.  Solving ``(I - Q) vec(X) =
vec(W)`` is the Stein equation ``X - M X M = W``; since ``M`` is symmetric it
is diagonalized once (``M = V diag(m) V^T``) and the solve becomes an
elementwise division by ``1 - m_k m_l``.  ``Q`` itself is only materialized on
request.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .exceptions import InstabilityError
from .graph import Spectrum
from .operators import BandLimiter, FrequencySet, SamplingSet, sampled_gram

__all__ = [
    "TheoryModel",
    "Mode",
    "build_theory",
    "steady_state_msd",
    "per_vertex_msd",
    "per_vertex_msd_all",
    "msd_eigen_expansion",
    "msd_with_pinv",
    "stein_solve",
    "STABILITY_MARGIN",
    "PINV_CUTOFF",
]

STABILITY_MARGIN = 1e-9
PINV_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class TheoryModel:
    """Second-order statistics of the LMS error for a fixed ``(D, F, C_v, mu)``.

    Attributes
    ----------
    g_matrix : ndarray, shape (|F|, |F|)
        Noise term ``U_F^T D C_v D U_F``.
    gram : ndarray, shape (|F|, |F|)
        ``U_F^T D U_F``.
    basis : ndarray, shape (N, |F|)
        ``U_F``, used for per-vertex quantities.
    """

    g_matrix: np.ndarray
    gram: np.ndarray
    basis: np.ndarray
    step_size: float
    band: FrequencySet
    sampling: SamplingSet

    @property
    def bandwidth(self) -> int:
        return self.gram.shape[0]

    @cached_property
    def m_matrix(self) -> np.ndarray:
        return np.eye(self.bandwidth) - self.step_size * self.gram

    @cached_property
    def _m_eig(self):
        return np.linalg.eigh(self.m_matrix)

    @property
    def q_matrix(self) -> np.ndarray:
        """``Q = M ⊗ M`` as a dense |F|^2 x |F|^2 matrix."""
        return np.kron(self.m_matrix, self.m_matrix)

    def q_apply(self, phi: np.ndarray) -> np.ndarray:
        """``Q vec(Phi)`` computed as ``vec(M Phi M)`` (column-major vec)."""
        f = self.bandwidth
        big = np.reshape(phi, (f, f), order="F")
        return (self.m_matrix @ big @ self.m_matrix).ravel(order="F")

    @property
    def spectral_radius(self) -> float:
        """``rho(Q) = rho(M)^2``."""
        if self.bandwidth == 0:
            return 0.0
        return float(np.max(np.abs(self._m_eig[0])) ** 2)

    @property
    def is_stable(self) -> bool:
        return self.spectral_radius < 1.0 - STABILITY_MARGIN

    def require_stable(self):
        rho = self.spectral_radius
        if not rho < 1.0 - STABILITY_MARGIN:
            raise InstabilityError(f"spectral radius of Q is {rho:.12g}; no steady state exists")


def build_theory(spec: Spectrum, freq_set: FrequencySet, s_set: SamplingSet, noise_var, step_size: float) -> TheoryModel:
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    band = BandLimiter(spec, freq_set)
    noise_var = np.asarray(noise_var, dtype=float)
    if noise_var.shape != (spec.n_nodes,):
        raise ValueError(f"noise_var must have length {spec.n_nodes}")
    rows = band.reduced_basis[s_set.array]
    g = rows.T @ (noise_var[s_set.array][:, None] * rows)
    return TheoryModel(
        g_matrix=g,
        gram=sampled_gram(s_set, band),
        basis=band.reduced_basis,
        step_size=float(step_size),
        band=freq_set,
        sampling=s_set,
    )


def stein_solve(t: TheoryModel, w: np.ndarray) -> np.ndarray:
    """Solve ``X - M X M = W`` for symmetric ``W``; equivalently ``(I - Q) vec(X) = vec(W)``."""
    m, v = t._m_eig
    denom = 1.0 - np.outer(m, m)
    return v @ ((v.T @ w @ v) / denom) @ v.T


def steady_state_msd(t: TheoryModel) -> float:
    """``mu^2 vec(G)^T (I - Q)^{-1} vec(I)``, the limit of ``E||x[n] - x0||^2``."""
    t.require_stable()
    if t.bandwidth == 0:
        return 0.0
    m, v = t._m_eig
    gm = np.einsum("ik,ij,jk->k", v, t.g_matrix, v)
    return float(t.step_size**2 * np.sum(gm / (1.0 - m * m)))


def per_vertex_msd_all(t: TheoryModel) -> np.ndarray:
    """Steady-state MSD at every vertex; sums to :func:`steady_state_msd`."""
    t.require_stable()
    if t.bandwidth == 0:
        return np.zeros(t.basis.shape[0])
    # (I - Q)^{-1} is symmetric, so <G, X(E_k)> = <X(G), E_k> = u_k^T X(G) u_k
    y = stein_solve(t, t.g_matrix)
    return t.step_size**2 * np.einsum("kf,fg,kg->k", t.basis, y, t.basis)


def per_vertex_msd(t: TheoryModel, k: int) -> float:
    """``mu^2 vec(G)^T (I - Q)^{-1} vec(U_F^T E_k U_F)`` for vertex ``k``."""
    n = t.basis.shape[0]
    if not 0 <= k < n:
        raise IndexError(f"vertex {k} out of range [0, {n})")
    t.require_stable()
    u = t.basis[k]
    x = stein_solve(t, np.outer(u, u))
    return float(t.step_size**2 * np.sum(t.g_matrix * x))


class Mode(NamedTuple):
    value: float
    term: float


def msd_eigen_expansion(t: TheoryModel) -> list[Mode]:
    """Modal split of the steady-state MSD over the |F|^2 eigenvalues of ``Q``.

    The eigenvectors of ``Q`` are ``v_l ⊗ v_k`` with eigenvalues ``m_k m_l``
    (``m`` the eigenvalues of ``M``).  Mode ``(k, l)`` contributes
    ``mu^2 p q / (1 - m_k m_l)`` with ``p = v_k^T G v_l`` and ``q = v_k^T v_l``.
    Modes are returned in column-major ``(k, l)`` order.
    """
    t.require_stable()
    m, v = t._m_eig
    p = v.T @ t.g_matrix @ v
    q = v.T @ v
    lam = np.outer(m, m)
    terms = t.step_size**2 * p * q / (1.0 - lam)
    return [Mode(float(a), float(b)) for a, b in zip(lam.ravel(order="F"), terms.ravel(order="F"))]


def msd_with_pinv(g_matrix, q_matrix, step_size: float, cutoff: float = PINV_CUTOFF) -> float:
    """``mu^2 vec(G)^T (I - Q)^† vec(I)`` for an explicit ``Q``.

    The pseudo-inverse drops eigenvalues of ``I - Q`` whose magnitude is below
    ``cutoff`` times the largest one, which keeps the criterion finite while the
    sampling set is still too small to identify the band.
    """
    g = np.asarray(g_matrix, dtype=float)
    q = np.asarray(q_matrix, dtype=float)
    f = g.shape[0]
    if f == 0:
        return 0.0
    a = np.eye(f * f) - q
    lam, w = np.linalg.eigh(0.5 * (a + a.T))
    keep = np.abs(lam) > cutoff * np.abs(lam).max()
    if not keep.any():
        return 0.0
    rhs = w.T @ np.eye(f).ravel(order="F")
    lhs = w.T @ g.ravel(order="F")
    return float(step_size**2 * np.sum(lhs[keep] * rhs[keep] / lam[keep]))


def msd_pinv_compact(gram: np.ndarray, g_matrix: np.ndarray, step_size: float, cutoff: float = PINV_CUTOFF) -> float:
    """Same criterion as :func:`msd_with_pinv` without forming ``Q``.

    ``vec(I)`` only has weight on the diagonal modes ``k = l``, so only the
    ``1 - m_k^2`` denominators matter; the cutoff is still relative to the
    largest ``|1 - m_k m_l|`` over all pairs.
    """
    f = gram.shape[0]
    if f == 0:
        return 0.0
    lam, v = np.linalg.eigh(gram)
    m = 1.0 - step_size * lam
    denom = 1.0 - m * m
    scale = max(abs(1.0 - m.max() * m.max()), abs(1.0 - m.min() * m.min()), abs(1.0 - m.max() * m.min()))
    keep = np.abs(denom) > cutoff * scale
    gm = np.einsum("ik,ij,jk->k", v, g_matrix, v)
    return float(step_size**2 * np.sum(gm[keep] / denom[keep]))
