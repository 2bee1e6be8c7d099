"""Greedy selection of the sampling set.

Every greedy strategy starts from the empty set and adds one vertex at a
time.  Ties are resolved towards the lowest vertex index: candidates whose
score is within ``TIE_TOL`` of the best are considered equal.

While ``|S| < |F|`` the sampled Gram matrix ``U_F^T D U_F`` is rank deficient.
All three greedy rules rank candidates first by the rank they reach and only
then by their criterion (pseudo-determinant, smallest nonzero eigenvalue or
pseudo-inverse MSD).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import Spectrum
from .operators import FrequencySet, SamplingSet
from .theory import PINV_CUTOFF

__all__ = [
    "Strategy",
    "SamplerKind",
    "select",
    "select_min_msd",
    "select_max_det",
    "select_max_lambda_min",
    "select_random",
    "pseudo_log_det",
    "lambda_min_plus",
    "min_msd_objective",
]

EIG_CUTOFF = 1e-12
TIE_TOL = 1e-12


class Strategy(str, Enum):
    MIN_MSD = "min_msd"
    MAX_DET = "max_det"
    MAX_LAMBDA_MIN = "max_lambda_min"
    RANDOM = "random"


@dataclass(frozen=True)
class SamplerKind:
    variant: Strategy
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Strategy(self.variant))


def _check_budget(m, n):
    if int(m) != m or not 1 <= m <= n:
        raise ValueError(f"number of samples must be an integer in [1, {n}], got {m!r}")
    return int(m)


def _first_best(scores, mask):
    """Index of the first entry of ``scores`` (restricted to ``mask``) within TIE_TOL of the maximum."""
    s = np.where(mask, scores, -np.inf)
    best = s.max()
    tol = TIE_TOL * max(1.0, abs(best)) if np.isfinite(best) else 0.0
    return int(np.flatnonzero(s >= best - tol)[0])


def _rank_then(rank, score, mask):
    top = rank[mask].max()
    return _first_best(score, mask & (rank == top))


def pseudo_log_det(gram: np.ndarray) -> tuple[int, float]:
    """``(rank, log pdet)`` of a PSD matrix; eigenvalues below ``1e-12 * lambda_max`` count as zero."""
    lam = np.linalg.eigvalsh(gram)
    if lam.size == 0 or lam[-1] <= 0:
        return 0, 0.0
    nz = lam[lam > EIG_CUTOFF * lam[-1]]
    return int(nz.size), float(np.sum(np.log(nz)))


def lambda_min_plus(gram: np.ndarray) -> tuple[int, float]:
    """``(rank, smallest nonzero eigenvalue)`` of a PSD matrix."""
    lam = np.linalg.eigvalsh(gram)
    if lam.size == 0 or lam[-1] <= 0:
        return 0, 0.0
    nz = lam[lam > EIG_CUTOFF * lam[-1]]
    return int(nz.size), float(nz[0])


def select_max_det(spec: Spectrum, freq_set: FrequencySet, m: int) -> SamplingSet:
    """Greedy maximization of the pseudo-determinant of ``U_F^T D U_F``.

    Uses the rank-one identities ``pdet(A + u u^T) = pdet(A) ||u_perp||^2``
    when ``u`` leaves the range of ``A`` and ``pdet(A) (1 + u^T A^+ u)``
    otherwise, so each step costs one |F| x |F| eigendecomposition.
    """
    n = spec.n_nodes
    m = _check_budget(m, n)
    u = spec.columns(freq_set.array)
    f = u.shape[1]
    norms2 = np.einsum("ij,ij->i", u, u)
    avail = np.ones(n, dtype=bool)
    gram = np.zeros((f, f))
    chosen = []
    for _ in range(m):
        lam, v = np.linalg.eigh(gram)
        top = lam[-1] if f else 0.0
        rng_mask = lam > EIG_CUTOFF * top if top > 0 else np.zeros(f, dtype=bool)
        proj = u @ v[:, rng_mask]
        perp2 = norms2 - np.einsum("ij,ij->i", proj, proj)
        grows = perp2 > EIG_CUTOFF * max(1.0, top)
        if np.any(grows & avail):
            j = _first_best(np.log(np.maximum(perp2, 1e-300)), grows & avail)
        else:
            quad = np.einsum("ij,ij->i", proj / lam[rng_mask], proj)
            j = _first_best(np.log1p(quad), avail)
        chosen.append(j)
        avail[j] = False
        gram += np.outer(u[j], u[j])
    return SamplingSet(chosen, n)


def _candidate_grams(u, gram, avail):
    cand = np.flatnonzero(avail)
    return cand, gram[None] + u[cand][:, :, None] * u[cand][:, None, :]


def select_max_lambda_min(spec: Spectrum, freq_set: FrequencySet, m: int) -> SamplingSet:
    """Greedy maximization of the smallest nonzero eigenvalue of ``U_F^T D U_F``."""
    n = spec.n_nodes
    m = _check_budget(m, n)
    u = spec.columns(freq_set.array)
    f = u.shape[1]
    avail = np.ones(n, dtype=bool)
    gram = np.zeros((f, f))
    chosen = []
    for _ in range(m):
        cand, grams = _candidate_grams(u, gram, avail)
        lam = np.linalg.eigvalsh(grams) if f else np.zeros((cand.size, 0))
        top = lam[:, -1:] if f else np.zeros((cand.size, 1))
        nz = (lam > EIG_CUTOFF * top) & (top > 0)
        rank = np.zeros(n, dtype=int)
        score = np.zeros(n)
        rank[cand] = nz.sum(axis=1)
        score[cand] = np.where(nz, lam, np.inf).min(axis=1, initial=np.inf)
        score[cand] = np.where(np.isfinite(score[cand]), score[cand], 0.0)
        j = _rank_then(rank, score, avail)
        chosen.append(j)
        avail[j] = False
        gram += np.outer(u[j], u[j])
    return SamplingSet(chosen, n)


def min_msd_objective(grams: np.ndarray, gs: np.ndarray, step_size: float, cutoff: float = PINV_CUTOFF,
                      with_rank: bool = False):
    """``vec(G)^T (I - Q)^† vec(I)`` for a stack of ``(U_F^T D U_F, G)`` pairs.

    The constant ``mu^2`` factor is left out; it does not change the argmin.
    With ``with_rank`` the number of modes kept by the pseudo-inverse is
    returned as well.
    """
    lam, v = np.linalg.eigh(grams)
    mm = 1.0 - step_size * lam
    denom = 1.0 - mm * mm
    hi, lo = mm.max(axis=-1, keepdims=True), mm.min(axis=-1, keepdims=True)
    scale = np.maximum.reduce([np.abs(1 - hi * hi), np.abs(1 - lo * lo), np.abs(1 - hi * lo)])
    keep = np.abs(denom) > cutoff * scale
    gm = np.einsum("cik,cij,cjk->ck", v, gs, v)
    value = np.sum(np.where(keep, gm / np.where(keep, denom, 1.0), 0.0), axis=-1)
    if with_rank:
        return value, keep.sum(axis=-1)
    return value


def select_min_msd(spec: Spectrum, freq_set: FrequencySet, noise_var, step_size: float, m: int) -> SamplingSet:
    """Greedy minimization of the (pseudo-inverse) steady-state MSD.

    Candidates that raise the number of modes kept by the pseudo-inverse are
    preferred, as in the other greedy rules.  The pseudo-inverse drops
    unidentified modes from the criterion, so without this ordering the greedy
    happily stays rank deficient and returns sets whose true MSD is unbounded.

    This is the expensive strategy: every step evaluates the criterion for
    all remaining vertices, each needing an |F| x |F| eigendecomposition.
    """
    n = spec.n_nodes
    m = _check_budget(m, n)
    noise_var = np.asarray(noise_var, dtype=float)
    u = spec.columns(freq_set.array)
    f = u.shape[1]
    avail = np.ones(n, dtype=bool)
    gram = np.zeros((f, f))
    g = np.zeros((f, f))
    chosen = []
    for _ in range(m):
        cand, grams = _candidate_grams(u, gram, avail)
        gs = g[None] + noise_var[cand][:, None, None] * u[cand][:, :, None] * u[cand][:, None, :]
        score = np.full(n, -np.inf)
        rank = np.zeros(n, dtype=int)
        if f:
            value, kept = min_msd_objective(grams, gs, step_size, with_rank=True)
            score[cand] = -value
            rank[cand] = kept
        else:
            score[cand] = 0.0
        j = _rank_then(rank, score, avail)
        chosen.append(j)
        avail[j] = False
        gram += np.outer(u[j], u[j])
        g += noise_var[j] * np.outer(u[j], u[j])
    return SamplingSet(chosen, n)


def select_random(n: int, m: int, seed: int) -> SamplingSet:
    """``m`` vertices drawn uniformly without replacement."""
    m = _check_budget(m, n)
    rng = np.random.default_rng(seed)
    return SamplingSet(rng.choice(n, size=m, replace=False), n)


def select(kind: SamplerKind | str, spec: Spectrum, freq_set: FrequencySet, m: int,
           noise_var=None, step_size: float | None = None) -> SamplingSet:
    """Dispatch to one of the strategies; Min-MSD additionally needs ``noise_var`` and ``step_size``."""
    if not isinstance(kind, SamplerKind):
        kind = SamplerKind(kind)
    if kind.variant is Strategy.MAX_DET:
        return select_max_det(spec, freq_set, m)
    if kind.variant is Strategy.MAX_LAMBDA_MIN:
        return select_max_lambda_min(spec, freq_set, m)
    if kind.variant is Strategy.RANDOM:
        return select_random(spec.n_nodes, m, kind.rng_seed)
    if noise_var is None or step_size is None:
        raise ValueError("min_msd needs noise_var and step_size")
    return select_min_msd(spec, freq_set, noise_var, step_size, m)
