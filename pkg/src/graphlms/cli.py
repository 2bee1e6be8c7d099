"""Command-line entry point.

Exit status is 0 on success, 2 on a configuration or input error and 3 on a
numerical failure (unstable recursion, empty band energy, eigensolver trouble).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .adaptive import Rule, run_adaptive
from .exceptions import ConfigError, UnachievableTargetError
from .graph import decompose, load_graph, save_graph
from .harness import EXPERIMENTS, ScenarioConfig, run_experiment
from .lms import ObservationModel, run, write_trajectory_csv
from .operators import BandLimiter, FrequencySet, SamplingSet, dbar_b_norm
from .sampling import SamplerKind, Strategy, select
from .scenarios import BENCHMARK_SEED, bandlimited_test_signal, random_geometric_graph
from .theory import build_theory, per_vertex_msd, per_vertex_msd_all, steady_state_msd

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parse_set(text):
    try:
        return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad index list {text!r}") from None


def _graph(args):
    if args.graph:
        return load_graph(args.graph)
    g, _, _ = random_geometric_graph(args.nodes, args.graph_seed)
    return g


def _noise(args, n):
    if args.noise_uniform is not None:
        lo, hi = args.noise_uniform
        return np.random.default_rng(args.noise_seed).uniform(lo, hi, n)
    return np.full(n, args.noise_var)


def _band(args, n):
    if args.band_indices:
        return FrequencySet(_parse_set(args.band_indices), n)
    return FrequencySet.lowpass(args.band, n)


def _sampling(args, spec, f, var):
    if args.sampling:
        return SamplingSet(_parse_set(args.sampling), spec.n_nodes)
    return select(SamplerKind(args.strategy, args.sampler_seed), spec, f, args.m, var, args.step_size)


def _emit(obj):
    print(json.dumps(obj, indent=2))


# ---------------------------------------------------------------- handlers

def cmd_graph_gen(args):
    g, _, r = random_geometric_graph(args.nodes, args.graph_seed, args.radius)
    save_graph(g, args.out)
    _emit({"n": g.n_nodes, "edges": len(g.edges()), "radius": r, "path": args.out})


def cmd_graph_info(args):
    g = load_graph(args.path)
    spec = decompose(g)
    _emit({"n": g.n_nodes, "edges": len(g.edges()), "connected": g.is_connected(),
           "mean_degree": float(g.degrees.mean()), "eigenvalues": spec.eigenvalues.tolist()})


def cmd_sample(args):
    g = _graph(args)
    spec = decompose(g)
    f = _band(args, g.n_nodes)
    var = _noise(args, g.n_nodes)
    s = select(SamplerKind(args.strategy, args.sampler_seed), spec, f, args.m, var, args.step_size)
    _emit({"strategy": args.strategy, "m": args.m, "sampling_set": list(s.indices),
           "dbar_b_norm": dbar_b_norm(s, BandLimiter(spec, f))})


def _theory(args):
    g = _graph(args)
    spec = decompose(g)
    f = _band(args, g.n_nodes)
    var = _noise(args, g.n_nodes)
    s = _sampling(args, spec, f, var)
    return build_theory(spec, f, s, var, args.step_size)


def cmd_theory_msd(args):
    t = _theory(args)
    _emit({"sampling_set": list(t.sampling.indices), "step_size": t.step_size, "msd": steady_state_msd(t)})


def cmd_theory_msd_k(args):
    t = _theory(args)
    if args.vertex is not None:
        _emit({"vertex": args.vertex, "msd": per_vertex_msd(t, args.vertex)})
        return
    print("vertex,msd")
    for k, v in enumerate(per_vertex_msd_all(t)):
        print(f"{k},{float(v)!r}")


def cmd_theory_check(args):
    t = _theory(args)
    lam = np.linalg.eigvalsh(t.gram)
    bound = 2.0 / lam[-1] if lam[-1] > 0 else 0.0
    _emit({"spectral_radius": t.spectral_radius, "max_stable_step": bound, "stable": t.is_stable})
    return 0 if t.is_stable else EXIT_NUMERIC


def cmd_lms_run(args):
    g = _graph(args)
    spec = decompose(g)
    f = _band(args, g.n_nodes)
    var = _noise(args, g.n_nodes)
    s = _sampling(args, spec, f, var)
    band = BandLimiter(spec, f)
    x0 = bandlimited_test_signal(spec, f, args.signal, args.seed)
    traj = run(ObservationModel(x0, var, s, band, seed=args.seed), args.step_size, args.n_iters)
    if args.out:
        write_trajectory_csv(args.out, traj.squared_deviation)
    _emit({"sampling_set": list(s.indices), "final_squared_deviation": float(traj.squared_deviation[-1]),
           "diverged": traj.diverged, "diverged_at": traj.diverged_at})
    return EXIT_NUMERIC if traj.diverged else 0


def cmd_adaptive_run(args):
    g = _graph(args)
    spec = decompose(g)
    n = g.n_nodes
    support = _parse_set(args.support) if args.support else list(range(args.band))
    truth = np.zeros(n)
    truth[support] = 1.0
    tr = run_adaptive(spec, truth, _noise(args, n), args.step_size, args.sparsity, args.rule, args.seed,
                      n_iters=args.n_iters, sampler=args.strategy)
    if args.out:
        tr.to_csv(args.out)
    _emit({"final_nmsd": float(tr.nmsd[-1]), "final_support_size": int(tr.support_size[-1]),
           "final_sampling_set": list(tr.sampling_sets[-1])})


def cmd_experiment_run(args):
    if args.list_experiments:
        return _list()
    if not args.config:
        raise ConfigError("experiment run needs --config (or --list-experiments)")
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for key in ("seed", "output", "n_trials", "workers", "n_iters"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        target = doc
        *parents, leaf = key.split(".")
        for p in parents:
            target = target.setdefault(p, {})
        target[leaf] = val
    res = run_experiment(ScenarioConfig.from_dict(doc))
    _emit({"outputs": [str(p) for p in res.outputs], "manifest": str(res.manifest)})


def _list():
    for name, desc in EXPERIMENTS.items():
        print(f"{name:24s} {desc}")
    return 0


# ---------------------------------------------------------------- parser

def _graph_opts(p):
    p.add_argument("--graph", help="graph JSON file (default: seeded geometric graph)")
    p.add_argument("--nodes", type=int, default=50)
    p.add_argument("--graph-seed", type=int, default=BENCHMARK_SEED)


def _model_opts(p, sampling=True):
    _graph_opts(p)
    p.add_argument("--band", type=int, default=10, help="low-pass bandwidth |F|")
    p.add_argument("--band-indices", help="explicit frequency indices, comma separated")
    p.add_argument("--noise-var", type=float, default=0.0)
    p.add_argument("--noise-uniform", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--step-size", type=float, default=0.5)
    if sampling:
        p.add_argument("--sampling", help="explicit sampling set, comma separated")
        p.add_argument("--strategy", default="max_det", choices=[s.value for s in Strategy])
        p.add_argument("--m", type=int, default=10)
        p.add_argument("--sampler-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphlms", description="LMS estimation of band-limited graph signals")
    ap.add_argument("--list-experiments", action="store_true", help="list built-in experiments and exit")
    sub = ap.add_subparsers(dest="command")

    gp = sub.add_parser("graph", help="generate or inspect graphs").add_subparsers(dest="action", required=True)
    p = gp.add_parser("gen")
    p.add_argument("--nodes", type=int, default=50)
    p.add_argument("--graph-seed", type=int, default=BENCHMARK_SEED)
    p.add_argument("--radius", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph_gen)
    p = gp.add_parser("info")
    p.add_argument("path")
    p.set_defaults(func=cmd_graph_info)

    p = sub.add_parser("sample", help="select a sampling set")
    _model_opts(p, sampling=False)
    p.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sampler-seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    tp = sub.add_parser("theory", help="closed-form mean-square analysis").add_subparsers(dest="action", required=True)
    for name, fn in (("msd", cmd_theory_msd), ("msd-k", cmd_theory_msd_k), ("check-stability", cmd_theory_check)):
        p = tp.add_parser(name)
        _model_opts(p)
        if name == "msd-k":
            p.add_argument("--vertex", type=int)
        p.set_defaults(func=fn)

    lp = sub.add_parser("lms", help="run the LMS recursion").add_subparsers(dest="action", required=True)
    p = lp.add_parser("run")
    _model_opts(p)
    p.add_argument("--n-iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--signal", default="unit", choices=["unit", "random"])
    p.add_argument("--out", help="write iteration,squared_deviation CSV")
    p.set_defaults(func=cmd_lms_run)

    adp = sub.add_parser("adaptive", help="LMS with adaptive sampling").add_subparsers(dest="action", required=True)
    p = adp.add_parser("run")
    _graph_opts(p)
    p.add_argument("--band", type=int, default=10, help="true support is the first BAND frequencies")
    p.add_argument("--support", help="explicit true support, comma separated")
    p.add_argument("--rule", default="hard", choices=[r.value for r in Rule])
    p.add_argument("--sparsity", type=float, default=0.1)
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--noise-var", type=float, default=4e-4)
    p.add_argument("--noise-uniform", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--strategy", default="max_det", choices=[s.value for s in Strategy])
    p.add_argument("--n-iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write iteration,nmsd,support_cardinality,sampling_set CSV")
    p.set_defaults(func=cmd_adaptive_run)

    ep = sub.add_parser("experiment", help="run a configured experiment").add_subparsers(dest="action", required=True)
    p = ep.add_parser("run")
    p.add_argument("--config")
    p.add_argument("--list-experiments", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--n-trials", type=int)
    p.add_argument("--n-iters", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field (dotted keys for params)")
    p.set_defaults(func=cmd_experiment_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    if args.list_experiments:
        return _list()
    if args.command is None:
        ap.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args) or 0
    except (ArithmeticError, np.linalg.LinAlgError, UnachievableTargetError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
