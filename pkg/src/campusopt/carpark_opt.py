"""
Day-by-day selection of car park partitioning schemes: minimise the cost of
rejected private and shared users subject to a strict minimum revenue from
spaces leased to car sharing.

Scheme and day indices are 0-based in this API.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .markov_carpark import PartitionScheme, scheme_rejections

DEFAULT_TOTAL_CAPACITY = 895
DEFAULT_RHOS = tuple(round(0.05 * k, 2) for k in range(1, 21))


@dataclass(frozen=True)
class PartitionOptConfig:
    W_SV: float = 15.8
    W_PV: float = 26.0
    M: float = 15.8
    R: float = 36468.75
    D: int = 5

    def __post_init__(self):
        if min(self.W_SV, self.W_PV, self.M, self.R) < 0 or self.D < 0:
            raise ValueError("optimisation constants must be non-negative")


@dataclass
class SchemeCostTable:
    r_sv: np.ndarray
    r_pv: np.ndarray
    spaces: np.ndarray
    rhos: np.ndarray | None = None

    def __post_init__(self):
        self.r_sv = np.atleast_2d(np.asarray(self.r_sv, dtype=float))
        self.r_pv = np.atleast_2d(np.asarray(self.r_pv, dtype=float))
        self.spaces = np.asarray(self.spaces, dtype=int)
        if self.r_sv.shape != self.r_pv.shape:
            raise ValueError("r_sv and r_pv shapes differ")
        if self.r_sv.shape[1] != len(self.spaces):
            raise ValueError("one spaces entry per scheme required")
        if np.any(self.r_sv < 0) or np.any(self.r_pv < 0) or np.any(self.spaces < 0):
            raise ValueError("table entries must be non-negative")

    @property
    def days(self) -> int:
        return self.r_sv.shape[0]

    @property
    def schemes(self) -> int:
        return self.r_sv.shape[1]

    def day_costs(self, cfg: PartitionOptConfig) -> np.ndarray:
        return cfg.W_SV * self.r_sv + cfg.W_PV * self.r_pv


@dataclass
class PartitionDecision:
    x: list[int]
    total_cost: float
    revenue: float

    def to_dict(self, table: SchemeCostTable | None = None) -> dict:
        out = {"schemes": [j + 1 for j in self.x], "total_cost": self.total_cost,
               "revenue": self.revenue}
        if table is not None and table.rhos is not None:
            out["rhos"] = [float(table.rhos[j]) for j in self.x]
        return out


def _check(x, table):
    if len(x) != table.days:
        raise ValueError(f"decision covers {len(x)} day(s), table has {table.days}")
    for j in x:
        if not 0 <= j < table.schemes:
            raise IndexError(f"scheme index {j} outside 0..{table.schemes - 1}")


def decision_cost(x, table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig()) -> float:
    _check(x, table)
    return float(sum(cfg.W_SV * table.r_sv[i, j] + cfg.W_PV * table.r_pv[i, j]
                     for i, j in enumerate(x)))


def decision_revenue(x, table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig()) -> float:
    _check(x, table)
    return float(cfg.M * sum(int(table.spaces[j]) for j in x))


def _feasible(spaces_total: int, cfg) -> bool:
    return cfg.M * spaces_total > cfg.R


def optimize_partition(table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig()) -> PartitionDecision:
    """Exact minimum-cost scheme per day under the strict revenue constraint.

    Depth-first branch and bound over days. Within a day, schemes that are
    no cheaper and lease no more spaces than another scheme are dominated
    and skipped. A branch is cut when its cost plus the per-day minimum
    cost of the remaining days cannot beat the incumbent, or when even the
    largest remaining leases cannot lift revenue above ``R``.
    """
    D, P = table.days, table.schemes
    if D < 1 or P < 1:
        raise ValueError("need at least one day and one scheme")
    cost = table.day_costs(cfg)
    spaces = table.spaces.astype(int)
    max_spaces = int(spaces.max())
    if not _feasible(D * max_spaces, cfg):
        gap = cfg.R - cfg.M * D * max_spaces
        raise InfeasibleError(
            f"revenue constraint unattainable: maximum revenue {cfg.M * D * max_spaces:.2f} "
            f"does not exceed R={cfg.R:.2f} (gap {gap:.2f})"
        )

    options = []
    for i in range(D):
        order = sorted(range(P), key=lambda j: (cost[i, j], -spaces[j], j))
        kept, best_space = [], -1
        for j in order:
            # cost-sorted: anything after must lease strictly more to be useful
            if spaces[j] > best_space:
                kept.append(j)
                best_space = spaces[j]
        options.append(kept)
    min_rest = np.r_[np.cumsum(cost.min(axis=1)[::-1])[::-1], 0.0]

    best_cost = math.inf
    best_x: list[int] | None = None
    x = [0] * D

    def search(i, acc, sp_sum):
        nonlocal best_cost, best_x
        if i == D:
            if _feasible(sp_sum, cfg) and acc < best_cost:
                best_cost, best_x = acc, list(x)
            return
        for j in options[i]:
            c = acc + cost[i, j]
            if c + min_rest[i + 1] >= best_cost:
                break
            if not _feasible(sp_sum + spaces[j] + (D - i - 1) * max_spaces, cfg):
                continue
            x[i] = j
            search(i + 1, c, sp_sum + spaces[j])

    search(0, 0.0, 0)
    assert best_x is not None
    return PartitionDecision(best_x, decision_cost(best_x, table, cfg), decision_revenue(best_x, table, cfg))


def enumerate_partition(table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig()):
    """Brute force over all ``P**D`` decisions; ``None`` when infeasible."""
    best = None
    for x in itertools.product(range(table.schemes), repeat=table.days):
        if not _feasible(sum(int(table.spaces[j]) for j in x), cfg):
            continue
        c = decision_cost(x, table, cfg)
        if best is None or c < best.total_cost:
            best = PartitionDecision(list(x), c, decision_revenue(x, table, cfg))
    return best


def best_static(table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig()):
    """Cheapest single scheme used on every day, or ``None`` if none is feasible."""
    best = None
    for j in range(table.schemes):
        x = [j] * table.days
        if not _feasible(table.days * int(table.spaces[j]), cfg):
            continue
        c = decision_cost(x, table, cfg)
        if best is None or c < best.total_cost:
            best = PartitionDecision(x, c, decision_revenue(x, table, cfg))
    return best


def compare_static_dynamic(table: SchemeCostTable, cfg: PartitionOptConfig = PartitionOptConfig(),
                           static_table: SchemeCostTable | None = None,
                           actual_table: SchemeCostTable | None = None) -> dict:
    """Dynamic (per-day) optimum against the best static scheme.

    ``static_table`` lets the static scheme be chosen from a different
    demand forecast (e.g. the hour-slot mean baseline). When
    ``actual_table`` is given, both decisions are also costed against it.
    """
    dynamic = optimize_partition(table, cfg)
    static = best_static(static_table if static_table is not None else table, cfg)
    report = {"dynamic": dynamic.to_dict(table), "dynamic_cost": dynamic.total_cost}
    if static is None:
        report.update(static=None, static_cost=None, ratio=None)
    else:
        static_cost = decision_cost(static.x, table, cfg)
        report.update(static=static.to_dict(table), static_cost=static_cost,
                      ratio=dynamic.total_cost / static_cost if static_cost > 0 else 1.0)
    if actual_table is not None:
        report["dynamic_actual_cost"] = decision_cost(dynamic.x, actual_table, cfg)
        if static is not None:
            report["static_actual_cost"] = decision_cost(static.x, actual_table, cfg)
    return report


def build_scheme_table(pv_arrivals, pv_departures, sv_arrivals, sv_departures,
                       total_capacity: int = DEFAULT_TOTAL_CAPACITY, rhos=DEFAULT_RHOS,
                       epoch: float = 1.0 / 12.0) -> SchemeCostTable:
    """Run the rejection model for every (day, scheme) pair."""
    r_pv_cols, r_sv_cols, spaces = [], [], []
    for rho in rhos:
        scheme = PartitionScheme(float(rho), total_capacity)
        r_pv, r_sv = scheme_rejections(total_capacity, scheme, pv_arrivals, pv_departures,
                                       sv_arrivals, sv_departures, epoch)
        r_pv_cols.append(r_pv)
        r_sv_cols.append(r_sv)
        spaces.append(scheme.sv_capacity)
    return SchemeCostTable(np.column_stack(r_sv_cols), np.column_stack(r_pv_cols),
                           np.array(spaces), np.asarray(rhos, dtype=float))
