"""Observation model and LMS recursion for band-limited graph signals.

The recursion ``x[n+1] = x[n] + mu B D (y[n] - x[n])`` is run in the compact
coordinates ``x[n] = U_F s[n]``, i.e. ``s <- s + mu U_F^T D (y - U_F s)``, so
every iterate is band-limited by construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DimensionError, ReconstructionError
from .operators import BandLimiter, SamplingSet, sampled_gram

__all__ = [
    "ObservationModel",
    "LmsState",
    "Trajectory",
    "noise_sample",
    "observe",
    "lms_step",
    "max_stable_step",
    "initial_state",
    "run",
    "write_trajectory_csv",
    "track",
    "DIVERGENCE_THRESHOLD",
]

DIVERGENCE_THRESHOLD = 1e12


def noise_sample(seed: int, n: int, noise_var) -> np.ndarray:
    """Zero-mean Gaussian noise vector ``v[n]`` with per-vertex variances ``noise_var``.

    The draw is keyed on ``(seed, n)`` through a counter-based Philox
    generator: entry ``i`` of the result depends only on ``(seed, n, i)``, so
    any two consumers of the same stream see identical noise regardless of
    the order in which they request iterations.
    """
    noise_var = np.asarray(noise_var, dtype=float)
    z = np.random.Generator(np.random.Philox(key=int(seed), counter=int(n))).standard_normal(noise_var.size)
    return z * np.sqrt(noise_var)


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """Noisy, partial observations ``y[n] = D (x0 + v[n])``.

    Parameters
    ----------
    true_signal : array_like, shape (N,)
        The signal ``x0``.  Must be band-limited on ``band`` unless
        ``require_bandlimited`` is False (used for approximately band-limited
        fields such as the cartography maps).
    noise_var : array_like, shape (N,)
        Diagonal of the noise covariance.
    sampling : SamplingSet
    band : BandLimiter
    seed : int
        Key of the noise stream.
    """

    true_signal: np.ndarray
    noise_var: np.ndarray
    sampling: SamplingSet
    band: BandLimiter
    seed: int = 0
    require_bandlimited: bool = True

    def __post_init__(self):
        n = self.band.n_nodes
        x0 = np.array(self.true_signal, dtype=float)
        var = np.array(self.noise_var, dtype=float)
        if x0.shape != (n,) or var.shape != (n,):
            raise DimensionError(f"signal and noise variances must have length {n}")
        if self.sampling.n != n:
            raise DimensionError(f"sampling set is over {self.sampling.n} vertices, graph has {n}")
        if np.any(var < 0) or not np.all(np.isfinite(var)):
            raise ValueError("noise variances must be finite and nonnegative")
        if self.require_bandlimited:
            gap = np.abs(self.band.apply(x0) - x0).max()
            if gap > 1e-10 * max(1.0, np.abs(x0).max()):
                raise ValueError(f"true signal is not band-limited on F (residual {gap:.2e})")
        x0.setflags(write=False)
        var.setflags(write=False)
        object.__setattr__(self, "true_signal", x0)
        object.__setattr__(self, "noise_var", var)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_nodes(self) -> int:
        return self.band.n_nodes

    @property
    def true_coefficients(self) -> np.ndarray:
        """``U_F^T x0``."""
        return self.band.analysis(self.true_signal)

    def gram(self) -> np.ndarray:
        return sampled_gram(self.sampling, self.band)


@dataclass(frozen=True)
class LmsState:
    estimate_spectral: np.ndarray
    step_size: float
    iteration: int = 0

    def estimate(self, band: BandLimiter) -> np.ndarray:
        """Vertex-domain estimate ``U_F s``."""
        return band.synthesis(self.estimate_spectral)


def observe(m: ObservationModel, n: int) -> np.ndarray:
    """Observation ``y[n] = D (x0 + v[n])``; exactly zero off the sampling set."""
    v = noise_sample(m.seed, n, m.noise_var)
    return np.where(m.sampling.mask, m.true_signal + v, 0.0)


def lms_step(state: LmsState, m: ObservationModel, y) -> LmsState:
    y = np.asarray(y, dtype=float)
    if y.shape != (m.n_nodes,):
        raise DimensionError(f"observation must have length {m.n_nodes}, got shape {y.shape}")
    s = np.asarray(state.estimate_spectral, dtype=float)
    if s.shape != (m.band.bandwidth,):
        raise DimensionError(f"estimate must have {m.band.bandwidth} coefficients, got shape {s.shape}")
    rows = m.band.reduced_basis[m.sampling.array]
    innovation = y[m.sampling.array] - rows @ s
    return replace(state, estimate_spectral=s + state.step_size * (rows.T @ innovation),
                   iteration=state.iteration + 1)


def max_stable_step(m: ObservationModel) -> float:
    """Upper limit ``2 / lambda_max(U_F^T D U_F)`` on the step-size for mean-square stability."""
    lam_max = np.linalg.eigvalsh(m.gram())[-1] if m.band.bandwidth else 0.0
    if lam_max <= 1e-14:
        raise ReconstructionError("sampling set captures no energy of the band (lambda_max = 0)")
    return 2.0 / lam_max


def initial_state(m: ObservationModel, step_size: float, scale: float = 1.0) -> LmsState:
    """Random band-limited starting point drawn from a stream independent of the noise."""
    rng = np.random.default_rng([m.seed, 1])
    return LmsState(scale * rng.standard_normal(m.band.bandwidth), float(step_size), 0)


@dataclass
class Trajectory:
    """Output of :func:`run`.

    ``squared_deviation[k]`` is ``||x[k+1] - x0||^2``, the error after the
    ``k+1``-th update.  When the run diverges the trace stops at the first
    iteration above the divergence threshold.
    """

    squared_deviation: np.ndarray
    final_state: LmsState
    diverged: bool = False
    diverged_at: int | None = None
    estimates: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, path) -> None:
        write_trajectory_csv(path, self.squared_deviation)


def run(m: ObservationModel, step_size: float, n_iters: int, initial: LmsState | np.ndarray | None = None,
        recorder=None, keep_estimates: bool = False) -> Trajectory:
    """Run the LMS recursion for ``n_iters`` iterations.

    Parameters
    ----------
    m : ObservationModel
    step_size : float
    n_iters : int
    initial : LmsState or array_like, optional
        Starting compact coordinates; a random band-limited start by default.
    recorder : callable, optional
        Called as ``recorder(iteration, squared_deviation)`` after every update.
    keep_estimates : bool
        Keep the compact estimate of every iteration in ``Trajectory.estimates``.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if initial is None:
        state = initial_state(m, step_size)
    elif isinstance(initial, LmsState):
        state = replace(initial, step_size=float(step_size))
    else:
        state = LmsState(np.array(initial, dtype=float), float(step_size), 0)

    band = m.band
    idx = m.sampling.array
    rows = band.reduced_basis[idx]
    s_true = m.true_coefficients
    # energy of x0 outside span(U_F); the error splits orthogonally into this and ||s - s_true||^2
    out_of_band = max(float(m.true_signal @ m.true_signal - s_true @ s_true), 0.0)
    x0_s = m.true_signal[idx]
    var_s = m.noise_var
    noisy = bool(np.any(var_s > 0))
    mu = float(step_size)

    s = np.array(state.estimate_spectral, dtype=float)
    if s.shape != (band.bandwidth,):
        raise DimensionError(f"initial estimate must have {band.bandwidth} coefficients")
    trace = np.empty(n_iters)
    kept = np.empty((n_iters, band.bandwidth)) if keep_estimates else None
    diverged_at = None
    start = state.iteration
    for k in range(n_iters):
        y = x0_s + noise_sample(m.seed, start + k, var_s)[idx] if noisy else x0_s
        s = s + mu * (rows.T @ (y - rows @ s))
        d = s - s_true
        err = float(d @ d) + out_of_band
        trace[k] = err
        if kept is not None:
            kept[k] = s
        if recorder is not None:
            recorder(start + k + 1, err)
        if not np.isfinite(err) or err > DIVERGENCE_THRESHOLD:
            diverged_at = start + k + 1
            trace = trace[: k + 1]
            if kept is not None:
                kept = kept[: k + 1]
            break
    final = LmsState(s, mu, start + len(trace))
    return Trajectory(trace, final, diverged_at is not None, diverged_at, kept)


def write_trajectory_csv(path, squared_deviation, start: int = 1) -> None:
    """Write ``iteration,squared_deviation`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "squared_deviation"])
        for k, e in enumerate(squared_deviation, start=start):
            w.writerow([k, repr(float(e))])


def track(band: BandLimiter, sampling: SamplingSet, signals, noise_var, step_size: float, seed: int,
          initial=None) -> np.ndarray:
    """LMS against a time-varying truth ``signals[n]`` (one row per iteration).

    Returns the normalized squared deviation ``||x[n+1] - x0[n]||^2 / ||x0[n]||^2``
    for every iteration.  The truth need not be band-limited.
    """
    signals = np.asarray(signals, dtype=float)
    idx = sampling.array
    rows = band.reduced_basis[idx]
    noise_var = np.broadcast_to(np.asarray(noise_var, dtype=float), (band.n_nodes,))
    if initial is None:
        s = np.random.default_rng([seed, 1]).standard_normal(band.bandwidth)
    else:
        s = np.array(initial, dtype=float)
    out = np.empty(signals.shape[0])
    for k, x0 in enumerate(signals):
        v = noise_sample(seed, k, noise_var)[idx]
        s = s + step_size * (rows.T @ (x0[idx] + v - rows @ s))
        d = band.reduced_basis @ s - x0
        out[k] = float(d @ d) / float(x0 @ x0)
    return out
