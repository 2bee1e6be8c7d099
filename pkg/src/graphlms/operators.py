"""Vertex- and band-limiting projectors and the localization tests built on them.

Operators are never formed as N x N matrices.  A band limiter keeps the
reduced basis ``U_F`` and every product goes through the |F|-dimensional
coordinates; a vertex limiter is just an index set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError
from .graph import Spectrum

__all__ = [
    "IndexSet",
    "FrequencySet",
    "SamplingSet",
    "BandLimiter",
    "Localization",
    "vertex_project",
    "band_project",
    "sampled_gram",
    "dbar_b_norm",
    "perfect_localization_exists",
]

LOCALIZATION_TOL = 1e-8


@dataclass(frozen=True)
class IndexSet:
    """Sorted set of distinct indices drawn from ``range(n)``."""

    indices: tuple
    n: int

    def __post_init__(self):
        n = int(self.n)
        if n < 0 or n != self.n:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        raw = [int(i) for i in np.asarray(list(self.indices)).ravel()]
        idx = sorted(raw)
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate indices in {raw}")
        if idx and (idx[0] < 0 or idx[-1] >= n):
            raise ValueError(f"indices must lie in [0, {n}), got {raw}")
        object.__setattr__(self, "indices", tuple(idx))
        object.__setattr__(self, "n", n)

    @classmethod
    def all(cls, n):
        return cls(range(n), n)

    @classmethod
    def empty(cls, n):
        return cls((), n)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(np.flatnonzero(mask), mask.size)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices

    @property
    def array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.indices)] = True
        return m

    def complement(self):
        return type(self).from_mask(~self.mask)

    def to_json(self) -> str:
        return json.dumps(list(self.indices))

    @classmethod
    def from_json(cls, text: str, n: int):
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(i, int) for i in data):
            raise ValueError("index set must be a JSON array of integers")
        return cls(data, n)


class FrequencySet(IndexSet):
    """Support ``F`` of a band-limited signal in the graph frequency domain."""

    @classmethod
    def lowpass(cls, k, n):
        """The ``k`` lowest graph frequencies."""
        return cls(range(k), n)


class SamplingSet(IndexSet):
    """Vertex set ``S`` on which the signal is observed."""


@dataclass(frozen=True, eq=False)
class BandLimiter:
    """Orthogonal projector ``B = U_F U_F^T`` onto the signals supported on ``freq_set``."""

    spectrum: Spectrum
    freq_set: FrequencySet

    def __post_init__(self):
        if self.freq_set.n != self.spectrum.n_nodes:
            raise DimensionError(
                f"frequency set is over {self.freq_set.n} indices, graph has {self.spectrum.n_nodes} nodes"
            )

    @cached_property
    def reduced_basis(self) -> np.ndarray:
        u = self.spectrum.columns(self.freq_set.array)
        u.setflags(write=False)
        return u

    @property
    def n_nodes(self) -> int:
        return self.spectrum.n_nodes

    @property
    def bandwidth(self) -> int:
        return len(self.freq_set)

    def analysis(self, x) -> np.ndarray:
        """Compact coordinates ``U_F^T x``."""
        return self.reduced_basis.T @ _check_signal(x, self.n_nodes)

    def synthesis(self, s) -> np.ndarray:
        """Vertex-domain signal ``U_F s`` from compact coordinates."""
        s = np.asarray(s, dtype=float)
        if s.shape != (self.bandwidth,):
            raise DimensionError(f"expected {self.bandwidth} coefficients, got shape {s.shape}")
        return self.reduced_basis @ s

    def apply(self, x) -> np.ndarray:
        return self.reduced_basis @ self.analysis(x)


def _check_signal(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionError(f"expected a graph signal of length {n}, got shape {x.shape}")
    return x


def vertex_project(s_set: SamplingSet, x) -> np.ndarray:
    """``D x``: keep the samples on ``s_set`` and zero the rest."""
    x = _check_signal(x, s_set.n)
    return np.where(s_set.mask, x, 0.0)


def band_project(b: BandLimiter, x) -> np.ndarray:
    """``B x``: orthogonal projection onto the Paley-Wiener space of ``b.freq_set``."""
    return b.apply(x)


def sampled_gram(s_set: SamplingSet, b: BandLimiter) -> np.ndarray:
    """``U_F^T D U_F``, the |F| x |F| Gram matrix of the sampled rows of ``U_F``."""
    if s_set.n != b.n_nodes:
        raise DimensionError(f"sampling set is over {s_set.n} vertices, graph has {b.n_nodes}")
    rows = b.reduced_basis[s_set.array]
    return rows.T @ rows


def dbar_b_norm(s_set: SamplingSet, b: BandLimiter) -> float:
    """Spectral norm of ``D̄ B`` where ``D̄`` keeps the vertices outside ``s_set``.

    Any band-limited signal can be recovered from its samples on ``s_set``
    exactly when this is strictly below one.
    """
    if b.bandwidth == 0:
        return 0.0
    gram = sampled_gram(s_set.complement(), b)
    top = np.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(np.clip(top, 0.0, 1.0)))


class Localization(NamedTuple):
    exists: bool
    witness: np.ndarray | None


def perfect_localization_exists(s_set: SamplingSet, b: BandLimiter, tol: float = LOCALIZATION_TOL) -> Localization:
    """Look for a signal that is both band-limited to ``F`` and supported on ``S``.

    Such a signal exists iff ``B D B`` has a unit eigenvalue.  ``B D B`` and
    ``U_F^T D U_F`` share their nonzero spectrum, so the check runs on the
    small matrix and the witness is lifted back with ``U_F``.
    """
    if b.bandwidth == 0:
        return Localization(False, None)
    lam, v = np.linalg.eigh(sampled_gram(s_set, b))
    if abs(lam[-1] - 1.0) > tol:
        return Localization(False, None)
    return Localization(True, b.reduced_basis @ v[:, -1])
