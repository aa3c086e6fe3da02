"""
Passenger wait time under a capacity-limited bus schedule, and a genetic
algorithm that searches bus headways to minimise it.

Time is in minutes. Demand ``rates[m]`` is the number of passengers
arriving during minute ``m`` of the window ``[t_start, t_start + len)``;
all of minute ``m``'s passengers are treated as arriving at its midpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError


@dataclass
class DemandProfile:
    rates: np.ndarray
    t_start: float = 0.0

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float)
        if np.any(self.rates < 0):
            raise ValueError("arrival rates must be non-negative")

    @property
    def t_end(self) -> float:
        return self.t_start + len(self.rates)

    @property
    def total(self) -> float:
        return float(self.rates.sum())

    @property
    def midpoints(self) -> np.ndarray:
        return self.t_start + np.arange(len(self.rates)) + 0.5


@dataclass
class BusSchedule:
    dispatch: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        self.dispatch = np.asarray(self.dispatch, dtype=float)
        self.capacities = np.asarray(self.capacities, dtype=float)
        if self.dispatch.shape != self.capacities.shape:
            raise ValueError("one capacity per bus required")
        if len(self.dispatch) == 0:
            raise ValueError("schedule needs at least one bus")
        if np.any(np.diff(self.dispatch) < 0):
            raise ValueError("dispatch times must be non-decreasing")
        if np.any(self.capacities <= 0):
            raise ValueError("capacities must be positive")

    def headways(self, t_start: float) -> np.ndarray:
        return np.diff(np.r_[t_start, self.dispatch])


@dataclass(frozen=True)
class GaConfig:
    population: int = 50
    max_generations: int = 1000
    stall_halt: int = 100
    crossover_prob: float = 0.8
    mutation_prob: float = 0.2
    h_min: float = 1.0
    h_max: float = 60.0
    elitism: int | None = None
    penalty_weight: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.crossover_prob <= 1 and 0 <= self.mutation_prob <= 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.h_min > self.h_max:
            raise ValueError("h_min must not exceed h_max")
        if self.population < 2:
            raise ValueError("population must hold at least two individuals")

    @property
    def n_elite(self) -> int:
        return self.elitism if self.elitism is not None else max(1, int(round(0.05 * self.population)))


@dataclass
class GaResult:
    schedule: BusSchedule
    fitness: float
    penalty: float
    trace: list[float] = field(default_factory=list)
    generations: int = 0

    @property
    def feasible(self) -> bool:
        return self.penalty == 0.0


def smooth_arrivals(counts, window: int = 15) -> np.ndarray:
    """Centred moving average; the window shrinks symmetrically-truncated at the edges."""
    x = np.asarray(counts, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd number of minutes")
    if x.size == 0:
        return x.copy()
    h = window // 2
    c = np.r_[0.0, np.cumsum(x)]
    idx = np.arange(len(x))
    lo = np.maximum(idx - h, 0)
    hi = np.minimum(idx + h + 1, len(x))
    return (c[hi] - c[lo]) / (hi - lo)


class _Integrals:
    """Prefix sums over the demand at minute midpoints."""

    def __init__(self, demand: DemandProfile):
        self.mid = demand.midpoints
        self.count = np.r_[0.0, np.cumsum(demand.rates)]
        self.moment = np.r_[0.0, np.cumsum(demand.rates * self.mid)]

    def upto(self, t):
        k = np.searchsorted(self.mid, t, side="left")
        return self.count[k], self.moment[k]


def _components(dispatch, capacities, demand, integ=None):
    integ = integ or _Integrals(demand)
    d = np.asarray(dispatch, dtype=float)
    edges = np.r_[demand.t_start, d]
    cnt, mom = integ.upto(edges)
    arrivals = np.diff(cnt)  # passengers arriving in [d_{i-1}, d_i)
    w_first = float(np.sum(d * arrivals - np.diff(mom)))
    left = np.zeros(len(d))
    for i in range(1, len(d)):
        left[i] = max(0.0, left[i - 1] + arrivals[i - 1] - capacities[i - 1])
    w_left = float(np.sum(left * np.diff(edges)))
    return w_first, left, w_left


def w_first(schedule: BusSchedule, demand: DemandProfile) -> float:
    """Wait of every passenger until the first bus after their arrival."""
    return _components(schedule.dispatch, schedule.capacities, demand)[0]


def leftover_counts(schedule: BusSchedule, demand: DemandProfile) -> np.ndarray:
    """Passengers left behind by bus ``i-1`` and still waiting for bus ``i``.

    The first bus has none; negative values (spare seats) clamp to zero.
    """
    return _components(schedule.dispatch, schedule.capacities, demand)[1]


def w_left(schedule: BusSchedule, demand: DemandProfile) -> float:
    return _components(schedule.dispatch, schedule.capacities, demand)[2]


def total_wait(schedule: BusSchedule, demand: DemandProfile) -> float:
    wf, _, wl = _components(schedule.dispatch, schedule.capacities, demand)
    return wf + wl


def avg_wait_per_passenger(schedule: BusSchedule, demand: DemandProfile) -> float:
    n = demand.total
    return total_wait(schedule, demand) / n if n > 0 else 0.0


def headway_violation(headways, h_min: float, h_max: float) -> float:
    h = np.asarray(headways, dtype=float)
    return float(np.sum(np.maximum(h_min - h, 0.0) + np.maximum(h - h_max, 0.0)))


def check_geometry(n_buses: int, window: float, h_min: float, h_max: float):
    if n_buses * h_min > window or n_buses * h_max < window:
        raise InfeasibleError(
            f"{n_buses} bus(es) cannot cover a {window:g}-minute window with headways "
            f"in [{h_min:g}, {h_max:g}]"
        )


def schedule_from_headways(genes, demand: DemandProfile, capacities) -> BusSchedule:
    """Dispatch times built forward from the window start; the last bus is pinned
    to the window end. Times past the end are clipped to it."""
    d = demand.t_start + np.cumsum(np.asarray(genes, dtype=float))
    d = np.minimum(d, demand.t_end)
    return BusSchedule(np.r_[d, demand.t_end], capacities)


class _Fitness:
    def __init__(self, demand, capacities, cfg: GaConfig):
        self.demand = demand
        self.capacities = np.asarray(capacities, dtype=float)
        self.cfg = cfg
        self.integ = _Integrals(demand)
        self.scale = max(demand.total, 1.0)

    def __call__(self, genes):
        d = self.demand.t_start + np.cumsum(genes)
        final = self.demand.t_end - (d[-1] if len(d) else self.demand.t_start)
        viol = headway_violation([final], self.cfg.h_min, self.cfg.h_max)
        d = np.r_[np.minimum(d, self.demand.t_end), self.demand.t_end]
        wf, _, wl = _components(d, self.capacities, self.demand, self.integ)
        penalty = self.cfg.penalty_weight * viol * self.scale
        return wf + wl + penalty, penalty


def _initial_population(rng, n_genes, window, cfg: GaConfig):
    pop = np.empty((cfg.population, n_genes))
    even = window / (n_genes + 1)
    pop[0] = np.clip(even, cfg.h_min, cfg.h_max)
    for p in range(1, cfg.population):
        h = rng.uniform(cfg.h_min, cfg.h_max, n_genes + 1)
        h *= window / h.sum()
        pop[p] = np.clip(h[:-1], cfg.h_min, cfg.h_max)
    return pop


def _rank_select(rng, fitness, k):
    # linear rank selection, best rank gets the largest weight
    n = len(fitness)
    order = np.argsort(fitness, kind="stable")
    weights = np.empty(n)
    weights[order] = np.arange(n, 0, -1, dtype=float)
    return rng.choice(n, size=k, p=weights / weights.sum())


def ga_optimize(demand: DemandProfile, capacities, cfg: GaConfig = GaConfig()) -> GaResult:
    """Search headways ``[H_1 .. H_{B-1}]`` with a real-coded genetic algorithm.

    Linear-rank selection, local arithmetic crossover (a fresh uniform weight
    per gene), uniform random mutation of one gene within
    ``[h_min, h_max]``, and elitism. The implied last headway is penalised
    by ``penalty_weight * violation * total demand`` when out of bounds. The
    run stops after ``max_generations`` or when the best fitness has not
    improved for ``stall_halt`` generations.
    """
    capacities = np.asarray(capacities, dtype=float)
    B = len(capacities)
    if B < 1:
        raise ValueError("need at least one bus")
    window = demand.t_end - demand.t_start
    if B == 1:
        sched = BusSchedule([demand.t_end], capacities)
        pen = headway_violation([window], cfg.h_min, cfg.h_max)
        return GaResult(sched, total_wait(sched, demand), cfg.penalty_weight * pen * max(demand.total, 1.0), [], 0)
    check_geometry(B, window, cfg.h_min, cfg.h_max)

    rng = np.random.default_rng(cfg.seed)
    fit = _Fitness(demand, capacities, cfg)
    n_genes = B - 1
    pop = _initial_population(rng, n_genes, window, cfg)
    scores = np.array([fit(ind)[0] for ind in pop])
    best_i = int(np.argmin(scores))
    best, best_score = pop[best_i].copy(), float(scores[best_i])
    trace = [best_score]
    stall = 0
    gen = 0
    n_elite = min(cfg.n_elite, cfg.population)

    for gen in range(1, cfg.max_generations + 1):
        elite = pop[np.argsort(scores, kind="stable")[:n_elite]].copy()
        parents = pop[_rank_select(rng, scores, cfg.population)]
        children = parents.copy()
        for a in range(0, cfg.population - 1, 2):
            if rng.random() < cfg.crossover_prob:
                w = rng.random(n_genes)
                pa, pb = parents[a], parents[a + 1]
                children[a] = w * pa + (1 - w) * pb
                children[a + 1] = w * pb + (1 - w) * pa
        for c in range(cfg.population):
            if rng.random() < cfg.mutation_prob:
                children[c, rng.integers(n_genes)] = rng.uniform(cfg.h_min, cfg.h_max)
        child_scores = np.array([fit(ind)[0] for ind in children])
        # elites replace the worst offspring
        worst = np.argsort(child_scores, kind="stable")[::-1][:n_elite]
        children[worst] = elite
        child_scores[worst] = np.array([fit(e)[0] for e in elite])
        pop, scores = children, child_scores

        i = int(np.argmin(scores))
        if scores[i] < best_score:
            best, best_score = pop[i].copy(), float(scores[i])
            stall = 0
        else:
            stall += 1
        trace.append(best_score)
        if stall >= cfg.stall_halt:
            break

    score, penalty = fit(best)
    return GaResult(schedule_from_headways(best, demand, capacities), float(score), float(penalty),
                    trace, gen)


def grid_search(demand: DemandProfile, capacities, h_min: float = 1.0, h_max: float = 60.0,
                step: float = 1.0):
    """Exhaustive search over headways on a regular grid (small fleets only).

    Only schedules whose every headway, including the last, respects the
    bounds are considered. Returns ``(best_wait, best_schedule)``.
    """
    capacities = np.asarray(capacities, dtype=float)
    B = len(capacities)
    window = demand.t_end - demand.t_start
    grid = np.arange(h_min, h_max + 1e-9, step)
    best, best_sched = np.inf, None

    def rec(prefix, used):
        nonlocal best, best_sched
        if len(prefix) == B - 1:
            last = window - used
            if h_min - 1e-9 <= last <= h_max + 1e-9:
                sched = BusSchedule(demand.t_start + np.cumsum(prefix + [last]), capacities)
                w = total_wait(sched, demand)
                if w < best:
                    best, best_sched = w, sched
            return
        for h in grid:
            if used + h + (B - 1 - len(prefix)) * h_min > window + 1e-9:
                break
            rec(prefix + [float(h)], used + h)

    rec([], 0.0)
    return best, best_sched
