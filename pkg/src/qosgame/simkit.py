"""Time-slotted simulation of the distributed channel-update protocol.

Every slot, users that can improve contend for a single update
opportunity.  With i.i.d. uniform backoff timers the earliest timer is
uniform over the contenders, so the race is modelled by drawing the winner
uniformly; the winner then jumps to a uniformly drawn best response.  An
optional guard interval turns near-simultaneous timers into a collision
that wastes the slot.
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional, Sequence

import numpy as np

from .dynamics import _current_utility, best_response_set, is_pure_nash, update_bound
from .game import RateSpec, build_game
from .spatial import SpatialGame, as_spatial, random_geometric_graph

LOW_DEMAND = 0.125
HIGH_DEMAND = 3.5


class SimulationError(RuntimeError):
    """Run exceeded its slot budget without converging."""


@dataclass(frozen=True)
class ScenarioConfig:
    n_users: int = 50
    width_m: float = 100.0
    height_m: float = 100.0
    range_m: float = 50.0
    channel_rates: tuple[float, ...] = (6.0, 9.0, 12.0, 18.0)
    high_fraction: float = 0.5
    low_demand: float = LOW_DEMAND
    high_demand: float = HIGH_DEMAND
    mac: str = "tdma"
    availability: Optional[tuple[tuple[int, ...], ...]] = None
    max_slots: Optional[int] = None
    topology_seed: int = 0
    dynamics_seed: int = 0
    collision_guard: float = 0.0

    def __post_init__(self):
        errors = []
        if self.n_users < 1:
            errors.append("n_users: must be >= 1")
        if min(self.width_m, self.height_m) <= 0:
            errors.append("width_m/height_m: must be positive")
        if self.range_m < 0:
            errors.append("range_m: must be non-negative")
        if not self.channel_rates or min(self.channel_rates) <= 0:
            errors.append("channel_rates: need at least one positive rate")
        if not 0.0 <= self.high_fraction <= 1.0:
            errors.append("high_fraction: must lie in [0, 1]")
        if self.low_demand < 0 or self.high_demand < 0:
            errors.append("low_demand/high_demand: must be non-negative")
        if self.mac not in ("tdma", "constant"):
            errors.append("mac: must be 'tdma' or 'constant'")
        if self.max_slots is not None and self.max_slots < 1:
            errors.append("max_slots: must be >= 1")
        if not 0.0 <= self.collision_guard < 1.0:
            errors.append("collision_guard: must lie in [0, 1)")
        if self.availability is not None:
            rows = self.availability
            if len(rows) != self.n_users or any(len(r) != len(self.channel_rates) for r in rows):
                errors.append("availability: must be an n_users x n_channels 0/1 matrix")
        if errors:
            raise ValueError("; ".join(errors))

    @property
    def n_channels(self) -> int:
        return len(self.channel_rates)

    @property
    def n_high(self) -> int:
        """High-demand user count, ``fraction * N`` rounded half up."""
        exact = Decimal(repr(self.high_fraction)) * self.n_users
        return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        d = dict(d)
        if "channel_rates" in d:
            d["channel_rates"] = tuple(float(r) for r in d["channel_rates"])
        if d.get("availability") is not None:
            d["availability"] = tuple(tuple(int(v) for v in r) for r in d["availability"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel_rates"] = list(self.channel_rates)
        if self.availability is not None:
            d["availability"] = [list(r) for r in self.availability]
        return d


@dataclass(frozen=True)
class Scenario:
    sgame: SpatialGame
    rates: Optional[RateSpec] = None
    demands: Optional[tuple[float, ...]] = None


def build_scenario(config: ScenarioConfig, rep: int = 0) -> Scenario:
    """Geometric topology, demand mix and thresholds for replication ``rep``."""
    N, C = config.n_users, config.n_channels
    graph = random_geometric_graph(N, config.width_m, config.height_m, config.range_m,
                                   seed=[config.topology_seed, rep, 0])
    # permutation prefix -> high-demand sets are nested as the fraction grows
    perm = np.random.default_rng([config.topology_seed, rep, 1]).permutation(N)
    high = set(perm[: config.n_high].tolist())
    demands = tuple(config.high_demand if n in high else config.low_demand for n in range(N))
    theta = (np.ones((N, C), dtype=int) if config.availability is None
             else np.array(config.availability, dtype=int))
    rates = RateSpec.uniform(N, config.channel_rates, g=config.mac, theta=theta)
    return Scenario(SpatialGame(build_game(rates, demands), graph), rates, demands)


@dataclass(frozen=True)
class SlotRecord:
    """State seen during one slot and who won the update opportunity.

    ``throughput`` and ``satisfied`` describe the profile in force during
    the slot; the winner's move takes effect from the next slot.
    """

    slot: int
    updater: Optional[int]
    new_channel: Optional[int]
    satisfied: int
    throughput: Optional[tuple[float, ...]]
    converged: bool
    collision: bool = False


@dataclass
class SimResult:
    slots: list[SlotRecord] = field(default_factory=list)
    final_profile: tuple[int, ...] = ()
    converged: bool = False
    welfare: int = 0

    @property
    def update_count(self) -> int:
        return sum(1 for s in self.slots if s.updater is not None)

    @property
    def convergence_slots(self) -> int:
        """Slots until convergence, counting the final slot with no contenders."""
        return len(self.slots)

    @property
    def satisfied_count(self) -> int:
        return self.slots[-1].satisfied if self.slots else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n_users = len(self.final_profile)
        has_tp = bool(self.slots) and self.slots[0].throughput is not None
        header = ["slot", "updater", "satisfied_count"]
        if has_tp:
            header += [f"throughput_{n}" for n in range(n_users)]
        w.writerow(header)
        for s in self.slots:
            row = [s.slot, "" if s.updater is None else s.updater, s.satisfied]
            if has_tp:
                row += [repr(float(t)) for t in s.throughput]
            w.writerow(row)
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "slots": self.convergence_slots,
            "update_count": self.update_count,
            "satisfied_count": self.satisfied_count,
            "welfare": self.welfare,
        }


def throughputs(scenario: Scenario, profile: Sequence[int]) -> Optional[tuple[float, ...]]:
    if scenario.rates is None:
        return None
    sg = scenario.sgame
    out = []
    for n, c in enumerate(profile):
        if c == 0:
            out.append(0.0)
            continue
        I = sum(1 for m in sg.graph.neighbors[n] if profile[m] == c)
        spec = scenario.rates
        out.append(float(spec.theta[n, c - 1] * spec.B[n, c - 1] * spec.contention(I)))
    return tuple(out)


def simulate(scenario, seed=None, max_slots: Optional[int] = None,
             collision_guard: float = 0.0, initial: Optional[Sequence[int]] = None) -> SimResult:
    """Run the protocol from the all-dormant profile until no user can improve.

    ``scenario`` may be a :class:`Scenario`, a spatial game or a plain game.
    ``collision_guard`` is the guard interval as a fraction of the backoff
    window; zero disables collisions.
    """
    if not isinstance(scenario, Scenario):
        scenario = Scenario(as_spatial(scenario))
    sg = scenario.sgame
    N = sg.n_players
    bound = update_bound(N)
    if max_slots is not None:
        limit = max_slots
    else:
        # collisions waste slots without updates, so allow headroom for them
        limit = (bound + 1) * (20 if collision_guard > 0 else 1)
    rng = np.random.default_rng(seed)
    x = [0] * N if initial is None else list(initial)
    result = SimResult()
    for t in range(limit):
        utils = [_current_utility(sg, x, n) for n in range(N)]
        satisfied = utils.count(1)
        tp = throughputs(scenario, x)
        options = {n: best_response_set(sg, x, n) for n in range(N)}
        contenders = [n for n in range(N) if options[n]]
        if not contenders:
            result.slots.append(SlotRecord(t, None, None, satisfied, tp, True))
            result.converged = True
            result.welfare = sum(utils)
            break
        if collision_guard > 0 and len(contenders) > 1:
            timers = np.sort(rng.uniform(0.0, 1.0, size=len(contenders)))
            if timers[1] - timers[0] < collision_guard:
                result.slots.append(SlotRecord(t, None, None, satisfied, tp, False, collision=True))
                continue
        n = contenders[int(rng.integers(len(contenders)))]
        opts = options[n]
        c = opts[int(rng.integers(len(opts)))]
        result.slots.append(SlotRecord(t, n, c, satisfied, tp, False))
        x[n] = c
        if result.update_count > bound:
            raise SimulationError(f"more than {bound} updates for N={N}")
    result.final_profile = tuple(x)
    if not result.converged:
        raise SimulationError(f"no convergence within {limit} slots for N={N}")
    return result


@dataclass(frozen=True)
class ReplicationSummary:
    n_reps: int
    mean_satisfied: float
    min_satisfied: int
    max_satisfied: int
    mean_convergence_slots: float
    mean_updates: float
    all_converged: bool
    all_natural_pne: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _run_and_check(config: ScenarioConfig, rep: int):
    scenario = build_scenario(config, rep)
    res = simulate(scenario, seed=[config.dynamics_seed, rep], max_slots=config.max_slots,
                   collision_guard=config.collision_guard)
    ok = is_pure_nash(scenario.sgame, res.final_profile) and res.welfare == res.satisfied_count
    return res, ok


def replicate(config: ScenarioConfig, n_reps: int, workers: int = 1):
    """Independent replications (topology and dynamics reseeded per rep).

    Returns ``(summary, results)``.  Output does not depend on ``workers``.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            pairs = list(pool.map(_run_and_check, [config] * n_reps, range(n_reps)))
    else:
        pairs = [_run_and_check(config, r) for r in range(n_reps)]
    results = [p[0] for p in pairs]
    sat = [r.satisfied_count for r in results]
    summary = ReplicationSummary(
        n_reps=n_reps,
        mean_satisfied=float(np.mean(sat)),
        min_satisfied=min(sat),
        max_satisfied=max(sat),
        mean_convergence_slots=float(np.mean([r.convergence_slots for r in results])),
        mean_updates=float(np.mean([r.update_count for r in results])),
        all_converged=all(r.converged for r in results),
        all_natural_pne=all(p[1] for p in pairs),
    )
    return summary, results


def sweep(config: ScenarioConfig, field_name: str, values: Sequence, n_reps: int,
          workers: int = 1) -> list[tuple[object, ReplicationSummary]]:
    """Replicate ``config`` once per value of one field (common seeds across values)."""
    return [(v, replicate(replace(config, **{field_name: v}), n_reps, workers)[0])
            for v in values]

