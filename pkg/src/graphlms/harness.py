"""Monte Carlo experiment harness.

An experiment is described by a :class:`ScenarioConfig` (one JSON document)
and run by :func:`run_experiment`, which writes CSV tables plus a
``manifest.json`` holding the resolved configuration and a summary.  Every
random quantity is derived from the master seed:

* per-trial noise and initialization streams come from
  ``SeedSequence([seed, trial, stream])``;
* quantities shared by all trials (noise-variance profile, removed links)
  come from ``SeedSequence([seed, SETUP])``.

Trials are mapped over an optional process pool and gathered in trial order,
so the output does not depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .adaptive import Rule, run_adaptive
from .exceptions import ConfigError, InstabilityError, UnachievableTargetError
from .graph import Graph, decompose, load_graph
from .lms import ObservationModel, run, track
from .operators import BandLimiter, FrequencySet
from .sampling import SamplerKind, Strategy, select
from .scenarios import (BENCHMARK_SEED, CartographyScenario, bandlimited_test_signal, default_cartography_scenario,
                        pathloss_field, random_geometric_graph, remove_link)
from .theory import build_theory, per_vertex_msd_all, steady_state_msd

__all__ = [
    "EXPERIMENTS",
    "ScenarioConfig",
    "ExperimentResult",
    "run_experiment",
    "steady_state_average",
    "tune_step_for_target_msd",
    "trial_seed",
    "default_iterations",
]

NOISE, INIT, SETUP = 0, 1, 2

EXPERIMENTS = {
    "fig2": "per-vertex steady-state MSD: closed form vs simulation",
    "fig3": "transient MSD for several |S| at step-sizes tuned to a common steady state",
    "fig4": "steady-state MSD per sampling strategy and number of samples",
    "fig5": "transient MSD when the band is computed on a graph missing one link",
    "adaptive": "NMSD and estimated bandwidth of adaptive sampling under a switching support",
    "carto_nmsd_vs_samples": "cartography: steady NMSD vs number of samples for several bandwidths",
    "carto_tracking": "cartography: NMSD while primary users switch on and off",
}

# per-experiment defaults layered under the user document
_DEFAULTS = {
    "fig2": {"n_trials": 200},
    "fig3": {"n_trials": 100, "n_iters": 300, "params": {"m_values": [10, 15, 20, 30]}},
    "fig4": {"n_trials": 200, "params": {"m_values": list(range(10, 31, 2)),
                                         "strategies": [s.value for s in Strategy]}},
    "fig5": {"n_trials": 100, "n_iters": 300, "params": {"n_links": 4}},
    "adaptive": {"n_trials": 100, "step_size": 0.5, "noise": {"kind": "constant", "var": 4e-4},
                 "params": {"segments": [[100, 5], [100, 15], [100, 10]], "sparsity": 0.1,
                            "rules": ["hard", "garotte", "lasso"], "tail": 30}},
    "carto_nmsd_vs_samples": {"n_trials": 20, "n_iters": 800,
                              "params": {"bandwidths": [10, 20], "m_values": list(range(5, 41, 5))}},
    "carto_tracking": {"n_trials": 20, "params": {"pairs": [[10, 15], [20, 25], [30, 40]]}},
}


def trial_seed(master: int, trial: int, stream: int) -> int:
    """64-bit seed of the ``stream`` substream for trial ``trial``."""
    return int(np.random.SeedSequence([int(master), int(trial), int(stream)]).generate_state(1, np.uint64)[0])


def _setup_rng(master: int, tag: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master), SETUP, int(tag)]))


@dataclass
class ScenarioConfig:
    """Full description of one experiment.

    Attributes
    ----------
    experiment : str
        One of :data:`EXPERIMENTS`.
    graph : dict
        ``{"file": path}`` or ``{"generator": "geometric", "n": int, "seed": int[, "radius": float]}``.
    band : int or list of int
        Low-pass bandwidth, or explicit frequency indices.
    sampler : str
    m : int
        Number of samples (sweeps live in ``params``).
    step_size : float
    noise : dict
        ``{"kind": "uniform", "low", "high"}`` (one draw per vertex) or ``{"kind": "constant", "var"}``.
    n_iters, burn_in : int or None
        ``None`` picks ``n_iters`` from the slowest mode of the recursion and
        ``burn_in = n_iters - steady_window``.
    params : dict
        Experiment-specific knobs (sweep lists, links, segments, scenario file...).
    """

    experiment: str
    graph: dict = field(default_factory=lambda: {"generator": "geometric", "n": 50, "seed": BENCHMARK_SEED})
    band: int | list = 10
    sampler: str = "max_det"
    m: int = 10
    step_size: float = 0.5
    noise: dict = field(default_factory=lambda: {"kind": "uniform", "low": 0.0, "high": 0.01})
    n_trials: int = 200
    n_iters: int | None = None
    burn_in: int | None = None
    steady_window: int = 100
    seed: int = 0
    output: str = "results"
    workers: int = 1
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        if "experiment" not in d:
            raise ConfigError("config needs an 'experiment' field")
        exp = d["experiment"]
        if exp not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {exp!r}; choose from {sorted(EXPERIMENTS)}")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        merged = dict(_DEFAULTS.get(exp, {}))
        merged["params"] = {**merged.get("params", {}), **d.get("params", {})}
        merged.update({k: v for k, v in d.items() if k != "params"})
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if int(self.n_trials) < 1:
            raise ConfigError("n_trials must be >= 1")
        if int(self.steady_window) < 1:
            raise ConfigError("steady_window must be >= 1")
        if self.n_iters is not None:
            burn = self.n_iters - self.steady_window if self.burn_in is None else self.burn_in
            if burn < 0 or burn + self.steady_window > self.n_iters:
                raise ConfigError("burn_in + steady_window must not exceed n_iters")
        if not self.step_size > 0:
            raise ConfigError("step_size must be positive")
        try:
            Strategy(self.sampler)
        except ValueError:
            raise ConfigError(f"unknown sampler {self.sampler!r}") from None
        kind = self.noise.get("kind")
        if kind not in ("uniform", "constant"):
            raise ConfigError(f"noise kind must be 'uniform' or 'constant', got {kind!r}")
        if int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class ExperimentResult:
    outputs: list
    summary: dict
    manifest: Path


def steady_state_average(trace, burn_in: int | None = None, window: int = 100) -> float:
    """Mean of ``trace[burn_in : burn_in + window]``.

    ``burn_in`` defaults to ``len(trace) - window``, i.e. the final ``window`` samples.
    """
    trace = np.asarray(trace, dtype=float)
    n = trace.size
    if window < 1 or window > n:
        raise ValueError(f"window {window} does not fit a trace of length {n}")
    if burn_in is None:
        burn_in = n - window
    if burn_in < 0 or burn_in + window > n:
        raise ValueError(f"burn_in {burn_in} + window {window} exceeds trace length {n}")
    return float(np.mean(trace[burn_in:burn_in + window]))


def tune_step_for_target_msd(spec, freq_set, sampling, noise_var, target: float, rtol: float = 1e-6) -> float:
    """Step-size whose closed-form steady-state MSD equals ``target``.

    The MSD is increasing in ``mu`` on ``(0, 2 / lambda_max)``, so plain
    bisection is used until the MSD is within ``rtol`` of the target.
    """
    if not target > 0:
        raise UnachievableTargetError("target MSD must be positive")
    base = build_theory(spec, freq_set, sampling, noise_var, 1.0)
    lam = np.linalg.eigvalsh(base.gram)
    if lam[0] <= 1e-12 * max(lam[-1], 1e-300):
        raise UnachievableTargetError("sampling set does not identify the band; the MSD is unbounded")
    bound = 2.0 / lam[-1]

    def msd(mu):
        try:
            return steady_state_msd(build_theory(spec, freq_set, sampling, noise_var, mu))
        except InstabilityError:
            return math.inf

    lo, hi = 0.0, bound
    top = msd(bound * (1 - 1e-9))
    if top < target:
        raise UnachievableTargetError(f"target {target:.3g} exceeds the largest stable MSD {top:.3g}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = msd(mid)
        if abs(val - target) <= rtol * target:
            return mid
        if val > target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def default_iterations(theory, window: int = 100, tol: float = 1e-3) -> int:
    """Ten times the iterations the slowest mean-square mode needs to decay by ``tol``."""
    rho = theory.spectral_radius
    if not 0 < rho < 1:
        return 10 * window
    transient = math.ceil(math.log(tol) / math.log(rho))
    return max(10 * transient, 2 * window)


# ---------------------------------------------------------------- plumbing

def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(j) for j in jobs]


def _graph_from(src: dict) -> Graph:
    if "file" in src:
        return load_graph(src["file"])
    gen = src.get("generator", "geometric")
    if gen != "geometric":
        raise ConfigError(f"unknown graph generator {gen!r}")
    g, _, _ = random_geometric_graph(int(src.get("n", 50)), int(src.get("seed", BENCHMARK_SEED)), src.get("radius"))
    return g


def _freq_set(band, n) -> FrequencySet:
    if isinstance(band, int):
        if not 1 <= band <= n:
            raise ConfigError(f"bandwidth must be in [1, {n}]")
        return FrequencySet.lowpass(band, n)
    return FrequencySet(band, n)


def _noise_profile(spec: dict, n: int, rng) -> np.ndarray:
    if spec["kind"] == "constant":
        return np.full(n, float(spec["var"]))
    return rng.uniform(float(spec.get("low", 0.0)), float(spec.get("high", 0.01)), n)


def _window(cfg, n_iters):
    burn = n_iters - cfg.steady_window if cfg.burn_in is None else cfg.burn_in
    if burn < 0 or burn + cfg.steady_window > n_iters:
        raise ConfigError("burn_in + steady_window must not exceed n_iters")
    return burn, cfg.steady_window


def _scenario(cfg) -> CartographyScenario:
    path = cfg.params.get("scenario")
    if path is None:
        return default_cartography_scenario()
    try:
        return CartographyScenario.from_json(Path(path).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad scenario file {path}: {exc}") from exc


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _initial(master, trial, bandwidth):
    return np.random.default_rng(trial_seed(master, trial, INIT)).standard_normal(bandwidth)


# ---------------------------------------------------------------- trials (module level so they pickle)

def _lms_trial(job):
    x0, var, sampling, band, mu, n_iters, nseed, s0, keep = job
    model = ObservationModel(x0, var, sampling, band, seed=nseed, require_bandlimited=False)
    return run(model, mu, n_iters, initial=s0, keep_estimates=keep)


def _fig2_trial(job):
    *rest, (burn, window) = job
    traj = _lms_trial(tuple(rest))
    if traj.diverged:
        return None
    band, x0 = rest[3], rest[0]
    est = traj.estimates[burn:burn + window] @ band.reduced_basis.T
    return np.mean((est - x0) ** 2, axis=0)


def _adaptive_trial(job):
    spec, truth, var, mu, lam, rule, nseed, sampler = job
    tr = run_adaptive(spec, truth, var, mu, lam, rule, nseed, sampler=sampler)
    return tr.nmsd, tr.support_size


def _track_trial(job):
    band, sampling, signals, var, mu, nseed, s0 = job
    return track(band, sampling, signals, var, mu, nseed, initial=s0)


# ---------------------------------------------------------------- experiments

def _fig2(cfg, out):
    g = _graph_from(cfg.graph)
    spec = decompose(g)
    f = _freq_set(cfg.band, g.n_nodes)
    band = BandLimiter(spec, f)
    var = _noise_profile(cfg.noise, g.n_nodes, _setup_rng(cfg.seed))
    s = select(SamplerKind(cfg.sampler, trial_seed(cfg.seed, 0, SETUP)), spec, f, cfg.m, var, cfg.step_size)
    theory = build_theory(spec, f, s, var, cfg.step_size)
    th_k = per_vertex_msd_all(theory)
    n_iters = cfg.n_iters or default_iterations(theory, cfg.steady_window)
    win = _window(cfg, n_iters)
    x0 = bandlimited_test_signal(spec, f, cfg.params.get("signal", "unit"))
    jobs = [(x0, var, s, band, cfg.step_size, n_iters, trial_seed(cfg.seed, t, NOISE),
             _initial(cfg.seed, t, len(f)), True, win) for t in range(cfg.n_trials)]
    res = _map(_fig2_trial, jobs, cfg.workers)
    ok = [r for r in res if r is not None]
    sim_k = np.mean(ok, axis=0) if ok else np.full(g.n_nodes, np.nan)
    path = out / "fig2.csv"
    _write_csv(path, ["vertex", "theory_msd", "sim_msd"], [(k, th_k[k], sim_k[k]) for k in range(g.n_nodes)])
    rel = np.abs(sim_k - th_k) / th_k
    summary = {
        "sampling_set": s.indices, "n_iters": n_iters, "diverged_trials": len(res) - len(ok),
        "theory_msd": float(th_k.sum()), "sim_msd": float(sim_k.sum()),
        "mean_relative_gap": float(rel.mean()),
        "global_relative_gap": float(abs(sim_k.sum() - th_k.sum()) / th_k.sum()),
    }
    return [path], summary


def _fig3(cfg, out):
    g = _graph_from(cfg.graph)
    spec = decompose(g)
    f = _freq_set(cfg.band, g.n_nodes)
    band = BandLimiter(spec, f)
    var = _noise_profile(cfg.noise, g.n_nodes, _setup_rng(cfg.seed))
    m_values = [int(m) for m in cfg.params["m_values"]]
    sets = {m: select(SamplerKind(cfg.sampler, trial_seed(cfg.seed, m, SETUP)), spec, f, m, var, cfg.step_size)
            for m in m_values}
    target = cfg.params.get("target_msd")
    if target is None:
        target = steady_state_msd(build_theory(spec, f, sets[m_values[0]], var, cfg.step_size))
    steps = {m: tune_step_for_target_msd(spec, f, sets[m], var, target) for m in m_values}
    n_iters = cfg.n_iters
    x0 = bandlimited_test_signal(spec, f, cfg.params.get("signal", "unit"))
    curves = {}
    for m in m_values:
        jobs = [(x0, var, sets[m], band, steps[m], n_iters, trial_seed(cfg.seed, t, NOISE),
                 _initial(cfg.seed, t, len(f)), False) for t in range(cfg.n_trials)]
        curves[m] = np.mean([r.squared_deviation for r in _map(_lms_trial, jobs, cfg.workers)], axis=0)
    level = float(cfg.params.get("level_factor", 2.0)) * target
    reach = {}
    for m in m_values:
        hit = np.flatnonzero(curves[m] <= level)
        reach[str(m)] = int(hit[0]) + 1 if hit.size else None
    path = out / "fig3.csv"
    _write_csv(path, ["iteration"] + [f"msd_S{m}" for m in m_values],
               [[k + 1] + [curves[m][k] for m in m_values] for k in range(n_iters)])
    summary = {"target_msd": target, "step_sizes": {str(m): steps[m] for m in m_values},
               "level": level, "iterations_to_level": reach}
    return [path], summary


def _fig4_trial(job):
    spec, f, var, mu, strategies, m_values, rseed, cached = job
    out = {}
    for strat in strategies:
        for m in m_values:
            if (strat, m) in cached:
                s = cached[(strat, m)]
            else:
                s = select(SamplerKind(strat, rseed + m), spec, f, m, var, mu)
            try:
                out[(strat, m)] = steady_state_msd(build_theory(spec, f, s, var, mu))
            except InstabilityError:
                out[(strat, m)] = math.inf
    return out


def _fig4(cfg, out):
    g = _graph_from(cfg.graph)
    spec = decompose(g)
    f = _freq_set(cfg.band, g.n_nodes)
    strategies = [Strategy(s).value for s in cfg.params["strategies"]]
    m_values = [int(m) for m in cfg.params["m_values"]]
    # noise-independent selections are computed once
    cached = {(st, m): select(st, spec, f, m) for st in strategies if st in ("max_det", "max_lambda_min")
              for m in m_values}
    jobs = []
    for t in range(cfg.n_trials):
        var = _noise_profile(cfg.noise, g.n_nodes, np.random.default_rng(trial_seed(cfg.seed, t, SETUP)))
        jobs.append((spec, f, var, cfg.step_size, strategies, m_values, trial_seed(cfg.seed, t, INIT) % 2**62, cached))
    res = _map(_fig4_trial, jobs, cfg.workers)
    rows, table = [], {}
    for st in strategies:
        for m in m_values:
            vals = np.array([r[(st, m)] for r in res])
            med = float(np.median(vals))
            rows.append((st, m, med, float(np.mean(vals)), int(np.sum(~np.isfinite(vals)))))
            table[f"{st}@{m}"] = med
    path = out / "fig4.csv"
    _write_csv(path, ["strategy", "m", "median_msd", "mean_msd", "unstable_trials"], rows)
    return [path], {"step_size": cfg.step_size, "median_msd": table}


def _fig5(cfg, out):
    g = _graph_from(cfg.graph)
    spec = decompose(g)
    f = _freq_set(cfg.band, g.n_nodes)
    band = BandLimiter(spec, f)
    var = _noise_profile(cfg.noise, g.n_nodes, _setup_rng(cfg.seed))
    s = select(SamplerKind(cfg.sampler, trial_seed(cfg.seed, 0, SETUP)), spec, f, cfg.m, var, cfg.step_size)
    links = cfg.params.get("links")
    if links is None:
        edges = [(i, j) for i, j, _ in g.edges()]
        pick = _setup_rng(cfg.seed, 5).choice(len(edges), size=int(cfg.params["n_links"]), replace=False)
        links = sorted(edges[p] for p in pick)
    links = [tuple(int(v) for v in ln) for ln in links]
    x0 = bandlimited_test_signal(spec, f, cfg.params.get("signal", "unit"))
    ideal = steady_state_msd(build_theory(spec, f, s, var, cfg.step_size))
    bands = {"matched": band}
    for i, j in links:
        try:
            bands[f"link_{i}_{j}"] = BandLimiter(decompose(remove_link(g, i, j)), f)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    curves = {}
    for name, b in bands.items():
        jobs = [(x0, var, s, b, cfg.step_size, cfg.n_iters, trial_seed(cfg.seed, t, NOISE),
                 _initial(cfg.seed, t, len(f)), False) for t in range(cfg.n_trials)]
        curves[name] = np.mean([r.squared_deviation for r in _map(_lms_trial, jobs, cfg.workers)], axis=0)
    names = list(bands)
    path = out / "fig5.csv"
    _write_csv(path, ["iteration", "theory_ideal"] + names,
               [[k + 1, ideal] + [curves[n][k] for n in names] for k in range(cfg.n_iters)])
    burn, win = _window(cfg, cfg.n_iters)
    steady = {n: steady_state_average(curves[n], burn, win) for n in names}
    return [path], {"links": [list(ln) for ln in links], "theory_ideal": ideal, "steady_msd": steady,
                    "sampling_set": s.indices}


def _adaptive(cfg, out):
    g = _graph_from(cfg.graph)
    spec = decompose(g)
    n = g.n_nodes
    p = cfg.params
    segments = [(int(a), int(b)) for a, b in p["segments"]]
    truth = np.concatenate([np.tile(np.r_[np.ones(k), np.zeros(n - k)], (length, 1)) for length, k in segments])
    true_bw = np.concatenate([np.full(length, k) for length, k in segments])
    var = _noise_profile(cfg.noise, n, _setup_rng(cfg.seed))
    rules = [Rule(r) for r in p["rules"]]
    tail = int(p["tail"])
    ends = np.cumsum([length for length, _ in segments])
    tail_idx = np.concatenate([np.arange(e - tail, e) for e in ends])
    cols, header, summary_rows, medians, exact = [], [], [], {}, {}
    for rule in rules:
        jobs = [(spec, truth, var, cfg.step_size, float(p["sparsity"]), rule, trial_seed(cfg.seed, t, NOISE),
                 cfg.sampler) for t in range(cfg.n_trials)]
        res = _map(_adaptive_trial, jobs, cfg.workers)
        err = np.array([r[0] for r in res])
        size = np.array([r[1] for r in res])
        hits = np.all(size[:, tail_idx] == true_bw[tail_idx], axis=1)
        steady = err[:, tail_idx].mean(axis=1)
        medians[rule.value] = float(np.median(steady))
        exact[rule.value] = float(hits.mean())
        cols += [err.mean(axis=0), size.mean(axis=0)]
        header += [f"nmsd_{rule.value}", f"support_{rule.value}"]
        summary_rows.append((rule.value, exact[rule.value], medians[rule.value]))
    path = out / "adaptive.csv"
    _write_csv(path, ["iteration", "true_bandwidth"] + header,
               [[k + 1, int(true_bw[k])] + [c[k] for c in cols] for k in range(truth.shape[0])])
    spath = out / "adaptive_summary.csv"
    _write_csv(spath, ["rule", "exact_support_fraction", "median_steady_nmsd"], summary_rows)
    return [path, spath], {"exact_support_fraction": exact, "median_steady_nmsd": medians}


def _carto_nmsd(cfg, out):
    sc = _scenario(cfg)
    spec = decompose(sc.graph())
    n = sc.n_raps
    active = cfg.params.get("active", list(range(len(sc.pus))))
    x0 = pathloss_field(sc, active)
    var = np.full(n, sc.noise_var)
    burn, win = _window(cfg, cfg.n_iters)
    rows, table = [], {}
    for bw in (int(b) for b in cfg.params["bandwidths"]):
        f = FrequencySet.lowpass(bw, n)
        band = BandLimiter(spec, f)
        for m in (int(v) for v in cfg.params["m_values"]):
            s = select(SamplerKind(cfg.sampler, trial_seed(cfg.seed, m, SETUP)), spec, f, m, var, cfg.step_size)
            jobs = [(x0, var, s, band, cfg.step_size, cfg.n_iters, trial_seed(cfg.seed, t, NOISE),
                     _initial(cfg.seed, t, bw), False) for t in range(cfg.n_trials)]
            res = _map(_lms_trial, jobs, cfg.workers)
            vals = [math.inf if r.diverged else steady_state_average(r.squared_deviation, burn, win) for r in res]
            nm = float(np.mean(vals)) / float(x0 @ x0)
            rows.append((bw, m, nm))
            table[f"F{bw}_S{m}"] = nm
    path = out / "carto_nmsd_vs_samples.csv"
    _write_csv(path, ["bandwidth", "m", "steady_nmsd"], rows)
    return [path], {"active_pus": list(active), "steady_nmsd": table}


def _carto_tracking(cfg, out):
    sc = _scenario(cfg)
    spec = decompose(sc.graph())
    n = sc.n_raps
    horizon = cfg.n_iters or sc.horizon
    fields_ = {}
    signals = np.empty((horizon, n))
    for k in range(horizon):
        act = sc.active_at(k)
        if act not in fields_:
            fields_[act] = pathloss_field(sc, act)
        signals[k] = fields_[act]
    var = np.full(n, sc.noise_var)
    curves, names = [], []
    for bw, m in ((int(a), int(b)) for a, b in cfg.params["pairs"]):
        f = FrequencySet.lowpass(bw, n)
        band = BandLimiter(spec, f)
        s = select(SamplerKind(cfg.sampler, trial_seed(cfg.seed, m, SETUP)), spec, f, m, var, cfg.step_size)
        jobs = [(band, s, signals, var, cfg.step_size, trial_seed(cfg.seed, t, NOISE), _initial(cfg.seed, t, bw))
                for t in range(cfg.n_trials)]
        curves.append(np.mean(_map(_track_trial, jobs, cfg.workers), axis=0))
        names.append(f"nmsd_F{bw}_S{m}")
    path = out / "carto_tracking.csv"
    _write_csv(path, ["iteration", "active"] + names,
               [[k + 1, ";".join(map(str, sc.active_at(k)))] + [c[k] for c in curves] for k in range(horizon)])
    return [path], {"final_nmsd": {nm: float(c[-1]) for nm, c in zip(names, curves)}}


_RUNNERS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "adaptive": _adaptive,
    "carto_nmsd_vs_samples": _carto_nmsd,
    "carto_tracking": _carto_tracking,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def run_experiment(cfg: ScenarioConfig | dict) -> ExperimentResult:
    """Run one experiment and write its tables and ``manifest.json`` under ``cfg.output``."""
    if isinstance(cfg, dict):
        cfg = ScenarioConfig.from_dict(cfg)
    cfg.validate()
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    outputs, summary = _RUNNERS[cfg.experiment](cfg, out)
    manifest = out / "manifest.json"
    doc = {"experiment": cfg.experiment, "description": EXPERIMENTS[cfg.experiment],
           "config": cfg.to_dict(), "outputs": [p.name for p in outputs], "summary": summary}
    manifest.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return ExperimentResult(outputs, summary, manifest)
