"""Generators for the experimental worlds: geometric graphs, test signals, link
removal and the radio power-map (cartography) scenario."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .graph import Graph, Spectrum
from .operators import FrequencySet

__all__ = [
    "geometric_graph",
    "random_geometric_graph",
    "benchmark_graph",
    "bandlimited_test_signal",
    "remove_link",
    "with_link",
    "PrimaryUser",
    "ScheduleEntry",
    "CartographyScenario",
    "default_cartography_scenario",
    "pathloss_field",
    "BENCHMARK_SEED",
]

BENCHMARK_SEED = 2016
MEAN_DEGREE_RANGE = (4.0, 8.0)


def geometric_graph(positions, radius: float) -> Graph:
    """Unit-weight graph joining every pair of points at Euclidean distance ``<= radius``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    pos = np.asarray(positions, dtype=float)
    if pos.shape[0] < 2:
        return Graph(np.zeros((pos.shape[0], pos.shape[0])))
    d = squareform(pdist(pos))
    w = (d <= radius).astype(float)
    np.fill_diagonal(w, 0.0)
    return Graph(w)


def _pick_radius(pos, degree_range=MEAN_DEGREE_RANGE):
    """Smallest pairwise distance giving a connected graph with mean degree >= the lower bound."""
    cand = np.unique(pdist(pos))

    def ok(r):
        g = geometric_graph(pos, r)
        return g.degrees.mean() >= degree_range[0] and g.is_connected()

    # both conditions are monotone in the radius
    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo]), geometric_graph(pos, cand[lo])


def random_geometric_graph(n: int, seed: int, radius: float | None = None, side: float = 1.0,
                           max_attempts: int = 100):
    """Points uniform in a ``side x side`` square joined by a distance rule.

    With ``radius=None`` the radius is the smallest one giving a connected
    graph with mean degree at least 4; point sets that would need a mean
    degree above 8 for that are redrawn from the same seed sequence.

    Returns
    -------
    graph : Graph
    positions : ndarray, shape (n, 2)
    radius : float
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        pos = rng.uniform(0.0, side, size=(n, 2))
        if radius is not None:
            return geometric_graph(pos, radius), pos, float(radius)
        r, g = _pick_radius(pos)
        if g.is_connected() and MEAN_DEGREE_RANGE[0] <= g.degrees.mean() <= MEAN_DEGREE_RANGE[1]:
            return g, pos, r
    raise RuntimeError(f"no connected geometric graph with mean degree in {MEAN_DEGREE_RANGE} after {max_attempts} draws")


def benchmark_graph(seed: int = BENCHMARK_SEED, n: int = 50):
    """Seeded 50-node random geometric graph used by the reference experiments."""
    return random_geometric_graph(n, seed)


def bandlimited_test_signal(spec: Spectrum, freq_set: FrequencySet, rule: str = "unit", seed: int = 0) -> np.ndarray:
    """``U_F s_F`` with unit coefficients (``rule="unit"``) or standard normal ones (``rule="random"``)."""
    if len(freq_set) == 0:
        raise ValueError("frequency set must be nonempty")
    if rule == "unit":
        s = np.ones(len(freq_set))
    elif rule == "random":
        s = np.random.default_rng(seed).standard_normal(len(freq_set))
    else:
        raise ValueError(f"unknown coefficient rule {rule!r}")
    return spec.columns(freq_set.array) @ s


def remove_link(g: Graph, i: int, j: int) -> Graph:
    if i == j or g.weights[i, j] == 0:
        raise KeyError(f"no edge between {i} and {j}")
    w = g.weights.copy()
    w[i, j] = w[j, i] = 0.0
    return Graph(w)


def with_link(g: Graph, i: int, j: int, weight: float = 1.0) -> Graph:
    """Copy of ``g`` with edge ``(i, j)`` set to ``weight``."""
    w = g.weights.copy()
    w[i, j] = w[j, i] = float(weight)
    return Graph(w)


@dataclass(frozen=True)
class PrimaryUser:
    pos: tuple[float, float]
    power: float

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError("transmit power must be positive")
        object.__setattr__(self, "pos", tuple(float(c) for c in self.pos))


@dataclass(frozen=True)
class ScheduleEntry:
    start: int
    stop: int
    active: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "active", tuple(int(a) for a in self.active))


@dataclass(frozen=True, eq=False)
class CartographyScenario:
    """Radio access points sensing the power radiated by primary users.

    The region is the square ``[0, side]^2``.  Received power at distance
    ``d`` follows a free-space ``power / d^2`` law with the distance clamped
    at ``0.01 * side``.
    """

    seed: int
    rap_positions: np.ndarray
    pus: tuple[PrimaryUser, ...]
    radius: float
    noise_var: float
    schedule: tuple[ScheduleEntry, ...]
    side: float = 1.0

    def __post_init__(self):
        pos = np.array(self.rap_positions, dtype=float)
        pos.setflags(write=False)
        object.__setattr__(self, "rap_positions", pos)
        object.__setattr__(self, "pus", tuple(self.pus))
        object.__setattr__(self, "schedule", tuple(self.schedule))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        for a, b in zip(self.schedule, self.schedule[1:]):
            if a.stop != b.start:
                raise ValueError("schedule intervals must be contiguous")
        for e in self.schedule:
            if e.stop <= e.start:
                raise ValueError("empty schedule interval")
            if any(not 0 <= p < len(self.pus) for p in e.active):
                raise ValueError(f"unknown primary user in {e.active}")

    @property
    def n_raps(self) -> int:
        return self.rap_positions.shape[0]

    @property
    def horizon(self) -> int:
        return self.schedule[-1].stop if self.schedule else 0

    @property
    def d_min(self) -> float:
        return 0.01 * self.side

    def graph(self) -> Graph:
        return geometric_graph(self.rap_positions, self.radius)

    def active_at(self, n: int) -> tuple[int, ...]:
        for e in self.schedule:
            if e.start <= n < e.stop:
                return e.active
        raise IndexError(f"iteration {n} outside the schedule [0, {self.horizon})")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_raps": self.n_raps,
            "side": self.side,
            "rap_positions": self.rap_positions.tolist(),
            "pu": [{"pos": list(p.pos), "power": p.power} for p in self.pus],
            "radius": self.radius,
            "noise_var": self.noise_var,
            "schedule": [{"from": e.start, "to": e.stop, "active": list(e.active)} for e in self.schedule],
        }

    @classmethod
    def from_dict(cls, d: dict) -> CartographyScenario:
        pos = d.get("rap_positions")
        if pos is None:
            pos = np.random.default_rng(d["seed"]).uniform(0.0, d.get("side", 1.0), size=(d["n_raps"], 2))
        elif len(pos) != d["n_raps"]:
            raise ValueError("n_raps does not match rap_positions")
        return cls(
            seed=d["seed"],
            rap_positions=pos,
            pus=tuple(PrimaryUser(tuple(p["pos"]), p["power"]) for p in d["pu"]),
            radius=d["radius"],
            noise_var=d["noise_var"],
            schedule=tuple(ScheduleEntry(e["from"], e["to"], e["active"]) for e in d["schedule"]),
            side=d.get("side", 1.0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> CartographyScenario:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def default_cartography_scenario(seed: int = 7, n_raps: int = 100) -> CartographyScenario:
    """100 RAPs in the unit square, two 1 W primary users, three-phase activity schedule.

    PU positions and the region size are artifact choices.  The two PUs sit
    outside the sensed square, on opposite sides, so the received-power map is
    smooth over the RAPs (a transmitter among the RAPs puts a near-field spike
    on the map that no low-pass band represents).  The schedule is PU 0 alone
    on ``[0, 133)``, both on ``[133, 266)``, PU 1 alone on ``[266, 400)``.
    """
    g, pos, radius = random_geometric_graph(n_raps, seed)
    pus = (PrimaryUser((-0.5, 0.7), 1.0), PrimaryUser((1.5, 0.3), 1.0))
    schedule = (ScheduleEntry(0, 133, (0,)), ScheduleEntry(133, 266, (0, 1)), ScheduleEntry(266, 400, (1,)))
    return CartographyScenario(seed, pos, pus, radius, 1e-4, schedule)


def pathloss_field(scenario: CartographyScenario, active) -> np.ndarray:
    """Received power at every RAP: ``sum_p power_p / max(d(i, p), d_min)^2`` over active PUs."""
    x = np.zeros(scenario.n_raps)
    for p in active:
        pu = scenario.pus[p]
        d = np.linalg.norm(scenario.rap_positions - np.asarray(pu.pos), axis=1)
        x += pu.power / np.maximum(d, scenario.d_min) ** 2
    return x
