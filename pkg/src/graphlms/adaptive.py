"""LMS with adaptive graph sampling: joint tracking of the GFT coefficients,
their support, and the sampling set.

Each iteration takes one online ISTA step on the full GFT vector,
``s <- T_{lambda mu}(s + mu U^T D (y - U s))``, reads the support off the
nonzero entries, and re-selects ``|support|`` samples for that support.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .exceptions import DimensionError
from .graph import Spectrum
from .lms import noise_sample
from .operators import FrequencySet, SamplingSet
from .sampling import SamplerKind, Strategy, select

__all__ = [
    "Rule",
    "ThresholdKind",
    "threshold",
    "AdaptiveState",
    "initial_adaptive_state",
    "adaptive_step",
    "nmsd",
    "AdaptiveTrace",
    "run_adaptive",
]


class Rule(str, Enum):
    LASSO = "lasso"
    GAROTTE = "garotte"
    HARD = "hard"


@dataclass(frozen=True)
class ThresholdKind:
    variant: Rule
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "variant", Rule(self.variant))
        if not self.gamma > 0:
            raise ValueError("threshold must be positive")


def threshold(kind: ThresholdKind, s) -> np.ndarray:
    """Componentwise shrinkage; every rule maps ``|s| <= gamma`` to exactly zero.

    ``lasso`` soft-shrinks by ``gamma``, ``garotte`` scales by
    ``1 - gamma^2 / s^2`` and ``hard`` keeps the surviving entries untouched.
    """
    s = np.asarray(s, dtype=float)
    g = kind.gamma
    big = np.abs(s) > g
    if kind.variant is Rule.LASSO:
        out = np.sign(s) * (np.abs(s) - g)
    elif kind.variant is Rule.GAROTTE:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = s - g * g / s
    else:
        out = s
    return np.where(big, out, 0.0)


@dataclass(frozen=True)
class AdaptiveState:
    """Iterate of the adaptive-sampling recursion.

    ``empty_support`` is set when the last thresholding zeroed every
    coefficient; the previous support and sampling set are then kept.
    """

    s_estimate: np.ndarray
    support: FrequencySet
    sampling: SamplingSet
    step_size: float
    sparsity: float
    iteration: int = 0
    empty_support: bool = False

    @property
    def gamma(self) -> float:
        return self.sparsity * self.step_size


def initial_adaptive_state(n: int, step_size: float, sparsity: float, seed: int) -> AdaptiveState:
    """Random ``s[0]`` uniform in ``[-1, 1]``, full support and full sampling."""
    s0 = np.random.default_rng([seed, 1]).uniform(-1.0, 1.0, n)
    return AdaptiveState(s0, FrequencySet.all(n), SamplingSet.all(n), float(step_size), float(sparsity))


def adaptive_step(state: AdaptiveState, spec: Spectrum, y, rule: Rule | str = Rule.HARD,
                  sampler: SamplerKind | str = Strategy.MAX_DET, noise_var=None) -> AdaptiveState:
    """One iteration: shrinkage step, support update, sampling-set update.

    ``y`` must be the observation taken on ``state.sampling``.  The sampling
    set is only recomputed when the support changes; the selection is a
    deterministic function of the support, so this gives the same sets as
    re-selecting every iteration.
    """
    n = spec.n_nodes
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise DimensionError(f"observation must have length {n}, got shape {y.shape}")
    u = spec.basis
    idx = state.sampling.array
    rows = u[idx]
    s = state.s_estimate
    grad = rows.T @ (y[idx] - rows @ s)
    s_new = threshold(ThresholdKind(rule, state.gamma), s + state.step_size * grad)

    support = FrequencySet(np.flatnonzero(s_new != 0.0), n)
    if len(support) == 0:
        return replace(state, s_estimate=s_new, iteration=state.iteration + 1, empty_support=True)
    if support == state.support:
        sampling = state.sampling
    else:
        sampling = select(sampler, spec, support, len(support), noise_var=noise_var, step_size=state.step_size)
    return replace(state, s_estimate=s_new, support=support, sampling=sampling,
                   iteration=state.iteration + 1, empty_support=False)


def nmsd(s_est, s_true) -> float:
    """``||s_est - s_true||^2 / ||s_true||^2``."""
    s_est = np.asarray(s_est, dtype=float)
    s_true = np.asarray(s_true, dtype=float)
    ref = float(s_true @ s_true)
    if ref == 0:
        raise ZeroDivisionError("normalized deviation is undefined for a zero reference")
    d = s_est - s_true
    return float(d @ d) / ref


@dataclass
class AdaptiveTrace:
    nmsd: np.ndarray
    support_size: np.ndarray
    sampling_sets: list = field(repr=False)
    final_state: AdaptiveState | None = field(default=None, repr=False)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "nmsd", "support_cardinality", "sampling_set"])
            for k in range(len(self.nmsd)):
                w.writerow([k + 1, repr(float(self.nmsd[k])), int(self.support_size[k]),
                            ";".join(str(i) for i in self.sampling_sets[k])])


def run_adaptive(spec: Spectrum, truth, noise_var, step_size: float, sparsity: float, rule: Rule | str,
                 seed: int, n_iters: int | None = None, sampler: SamplerKind | str = Strategy.MAX_DET) -> AdaptiveTrace:
    """Track a (possibly switching) GFT vector with adaptive sampling.

    Parameters
    ----------
    truth : ndarray, shape (N,) or (n_iters, N)
        True GFT vector ``s_0``, either fixed or one row per iteration.
    noise_var : float or array_like
        Per-vertex noise variance.
    seed : int
        Keys both the initialization and the noise stream (separate streams).
    """
    n = spec.n_nodes
    truth = np.asarray(truth, dtype=float)
    if truth.ndim == 1:
        if n_iters is None:
            raise ValueError("n_iters is required for a fixed truth")
        truth = np.broadcast_to(truth, (n_iters, n))
    n_iters = truth.shape[0]
    noise_var = np.broadcast_to(np.asarray(noise_var, dtype=float), (n,))
    state = initial_adaptive_state(n, step_size, sparsity, seed)
    signals = truth @ spec.basis.T
    err = np.empty(n_iters)
    size = np.empty(n_iters, dtype=int)
    sets = []
    for k in range(n_iters):
        v = noise_sample(seed, k, noise_var)
        y = np.where(state.sampling.mask, signals[k] + v, 0.0)
        state = adaptive_step(state, spec, y, rule, sampler, noise_var)
        err[k] = nmsd(state.s_estimate, truth[k])
        size[k] = len(state.support)
        sets.append(state.sampling.indices)
    return AdaptiveTrace(err, size, sets, state)
