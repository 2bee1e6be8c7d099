"""Undirected weighted graphs, the combinatorial Laplacian and the graph Fourier basis."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DimensionError, EigensolverError

__all__ = [
    "Graph",
    "Spectrum",
    "laplacian",
    "decompose",
    "gft",
    "inverse_gft",
    "load_graph",
    "save_graph",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph stored as a dense symmetric weight matrix.

    Parameters
    ----------
    weights : array_like, shape (N, N)
        Symmetric, nonnegative, zero-diagonal adjacency weights.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weights must be a nonempty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed (nonzero diagonal)")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric (undirected graph)")
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list ``(i, j, w)`` with ``i < j``."""
        i, j = np.nonzero(np.triu(self.weights))
        return [(int(a), int(b), float(self.weights[a, b])) for a, b in zip(i, j)]

    def is_connected(self) -> bool:
        n = self.n_nodes
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            k = stack.pop()
            for nb in np.flatnonzero(self.weights[k]):
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        return bool(seen.all())

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        """Build a graph from ``(i, j, w)`` triples with 0-based vertex indices.

        Self-loops, duplicate edges (in either orientation), out-of-range
        indices and negative weights are rejected.
        """
        if int(n) != n or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        n = int(n)
        w = np.zeros((n, n))
        seen = set()
        for edge in edges:
            if len(edge) != 3:
                raise ValueError(f"edge must be [i, j, w], got {edge!r}")
            i, j, weight = edge
            if int(i) != i or int(j) != j:
                raise ValueError(f"vertex indices must be integers, got {edge!r}")
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"vertex index out of range in edge {edge!r} (n={n})")
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            w[i, j] = w[j, i] = float(weight)
        return cls(w)

    def to_dict(self) -> dict:
        return {"n": self.n_nodes, "edges": [[i, j, w] for i, j, w in self.edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> Graph:
        try:
            return cls.from_edges(data["n"], data["edges"])
        except KeyError as exc:
            raise ValueError(f"graph document is missing field {exc}") from None


def load_graph(path) -> Graph:
    """Read a graph from the ``{"n": int, "edges": [[i, j, w], ...]}`` JSON format."""
    with open(path) as fh:
        return Graph.from_dict(json.load(fh))


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()))


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``K - A`` with ``K`` the diagonal degree matrix."""
    return np.diag(g.degrees) - g.weights


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition of a graph Laplacian.

    Attributes
    ----------
    eigenvalues : ndarray, shape (N,)
        Ascending, nonnegative graph frequencies.
    basis : ndarray, shape (N, N)
        Orthonormal eigenvectors stored as columns (the GFT basis ``U``).
    """

    eigenvalues: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "basis", _frozen(self.basis))

    @property
    def n_nodes(self) -> int:
        return self.basis.shape[0]

    def columns(self, indices) -> np.ndarray:
        """Columns of the basis at the given frequency indices, shape (N, len(indices))."""
        return self.basis[:, np.asarray(indices, dtype=int)]


def _canonical_signs(u):
    # largest-magnitude entry of every column made positive; argmax picks the lowest index on ties
    pivot = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivot, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def decompose(g: Graph, tol: float = 1e-12) -> Spectrum:
    """Full eigendecomposition of the Laplacian of ``g``.

    Eigenvalues are returned in ascending order and every eigenvector has its
    largest-magnitude entry positive, so repeated calls are bit-identical.

    Raises
    ------
    EigensolverError
        If LAPACK fails, or the eigen-residual ``max|L U - U diag(lam)|``
        exceeds ``tol`` scaled by the norm of the Laplacian.
    """
    lap = laplacian(g)
    try:
        lam, u = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc
    scale = max(1.0, float(np.abs(lap).max()))
    residual = np.abs(lap @ u - u * lam).max()
    if not np.isfinite(residual) or residual > tol * scale * g.n_nodes:
        raise EigensolverError(f"eigen-residual {residual:.3e} exceeds tolerance")
    order = np.argsort(lam, kind="stable")
    lam, u = lam[order], u[:, order]
    # PSD: round-off can leave the zero eigenvalue slightly negative
    lam = np.where(np.abs(lam) <= 1e-10 * max(1.0, lam[-1]), 0.0, lam)
    if lam[0] < 0:
        raise EigensolverError(f"Laplacian has a negative eigenvalue {lam[0]:.3e}")
    return Spectrum(lam, _canonical_signs(u))


def _check_length(spec: Spectrum, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.n_nodes,):
        raise DimensionError(f"expected a vector of length {spec.n_nodes}, got shape {v.shape}")
    return v


def gft(spec: Spectrum, x) -> np.ndarray:
    """Graph Fourier transform ``U^T x``."""
    return spec.basis.T @ _check_length(spec, x)


def inverse_gft(spec: Spectrum, s) -> np.ndarray:
    """Inverse graph Fourier transform ``U s``."""
    return spec.basis @ _check_length(spec, s)
