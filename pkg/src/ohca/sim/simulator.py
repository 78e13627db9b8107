"""Hybrid channel allocation simulator: fixed channels per cell plus a shared pool.

Calls arrive as independent Poisson streams per cell and hold a channel for an
exponentially distributed time. An arriving call takes a free fixed channel
of its own cell, otherwise a channel from the dynamic pool, otherwise it is
blocked. A dynamic channel goes back to the pool when its call ends.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..core import AllocationPlan, average_allocation
from ..errors import DimensionMismatch, SeriesExceedsBudget
from ..traffic import (
    BaseStationStats,
    ChannelBounds,
    estimate_channel_bounds,
    inverse_packet_count_probabilities,
)
from . import kernel


@dataclass(frozen=True)
class ScenarioConfig:
    M: int
    total_channels: int
    arrival_rate_per_cell: tuple[float, ...]
    mean_holding_time: float
    sim_duration: float
    fixed_fraction: Fraction = Fraction(3, 4)
    seed: int = 0
    l_min: Optional[int] = None
    l_max: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(
            self, "arrival_rate_per_cell", tuple(float(r) for r in self.arrival_rate_per_cell)
        )
        object.__setattr__(self, "fixed_fraction", Fraction(self.fixed_fraction))
        if self.M < 1 or self.total_channels < 1:
            raise ValueError("M and total_channels must be positive")
        if len(self.arrival_rate_per_cell) != self.M:
            raise DimensionMismatch(
                f"{len(self.arrival_rate_per_cell)} arrival rates for M={self.M}"
            )
        if any(r < 0 or not math.isfinite(r) for r in self.arrival_rate_per_cell):
            raise ValueError("arrival rates must be finite and nonnegative")
        if not 0 <= self.fixed_fraction <= 1:
            raise ValueError("fixed_fraction must lie in [0, 1]")
        if self.mean_holding_time <= 0 or self.sim_duration <= 0:
            raise ValueError("mean_holding_time and sim_duration must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def offered_erlangs(self) -> tuple[float, ...]:
        return tuple(r * self.mean_holding_time for r in self.arrival_rate_per_cell)

    @property
    def bounds(self) -> Optional[ChannelBounds]:
        if self.l_min is None or self.l_max is None:
            return None
        return ChannelBounds(self.l_min, self.l_max)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        doc = dict(doc)
        if "fixed_fraction" in doc:
            doc["fixed_fraction"] = Fraction(str(doc["fixed_fraction"]))
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        doc = {
            "M": self.M,
            "total_channels": self.total_channels,
            "fixed_fraction": str(self.fixed_fraction),
            "arrival_rate_per_cell": list(self.arrival_rate_per_cell),
            "mean_holding_time": self.mean_holding_time,
            "sim_duration": self.sim_duration,
            "seed": self.seed,
        }
        if self.l_min is not None:
            doc["l_min"] = self.l_min
        if self.l_max is not None:
            doc["l_max"] = self.l_max
        return doc


@dataclass(frozen=True)
class SimMetrics:
    offered: tuple[int, ...]
    blocked: tuple[int, ...]
    completed: tuple[int, ...]
    in_progress: tuple[int, ...]
    dynamic_grants: tuple[int, ...]
    peak_pool_occupancy: int
    mean_pool_occupancy: float

    @property
    def blocking_prob(self) -> tuple[float, ...]:
        return tuple(b / o if o else 0.0 for b, o in zip(self.blocked, self.offered))

    @property
    def total_offered(self) -> int:
        return sum(self.offered)

    @property
    def total_blocked(self) -> int:
        return sum(self.blocked)

    @property
    def overall_blocking(self) -> float:
        return self.total_blocked / self.total_offered if self.total_offered else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell", "offered", "blocked", "completed", "blocking_prob"])
        for i, p in enumerate(self.blocking_prob):
            w.writerow([i, self.offered[i], self.blocked[i], self.completed[i], repr(p)])
        return buf.getvalue()

    def summary_line(self) -> str:
        return (
            f"offered={self.total_offered} blocked={self.total_blocked} "
            f"blocking={self.overall_blocking!r} peak_pool={self.peak_pool_occupancy} "
            f"mean_pool={self.mean_pool_occupancy!r}"
        )


def split_channels(total: int, fixed_fraction=Fraction(3, 4)) -> tuple[int, int]:
    """Split ``total`` into fixed and dynamic channels, rounding half up."""
    if total < 1:
        raise ValueError("total must be positive")
    frac = Fraction(fixed_fraction)
    if not 0 <= frac <= 1:
        raise ValueError("fixed_fraction must lie in [0, 1]")
    fixed = math.floor(total * frac + Fraction(1, 2))
    return fixed, total - fixed


def erlang_b(offered_erlangs: float, channels: int) -> float:
    """Erlang-B blocking probability by the standard recursion."""
    if offered_erlangs < 0:
        raise ValueError("offered load must be nonnegative")
    if channels < 0:
        raise ValueError("channels must be nonnegative")
    b = 1.0
    for c in range(1, channels + 1):
        b = offered_erlangs * b / (c + offered_erlangs * b)
    return b


def _cell_rng(seed: int, cell: int, stream: int) -> np.random.Generator:
    # keyed by (cell, stream) so adding cells leaves existing streams unchanged
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell, stream)))
    )


def _cell_arrivals(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return np.empty(0)
    chunk = int(rate * horizon + 10 * math.sqrt(rate * horizon) + 16)
    parts = []
    last = 0.0
    while True:
        t = last + np.cumsum(rng.exponential(1.0 / rate, size=chunk))
        parts.append(t)
        last = float(t[-1])
        if last >= horizon:
            break
    times = np.concatenate(parts)
    return times[times < horizon]


def generate_calls(scenario: ScenarioConfig, seed: Optional[int] = None):
    """Draw every call of the scenario.

    Returns ``(arrival_time, cell, holding)`` arrays sorted by time, then cell.
    """
    seed = scenario.seed if seed is None else seed
    times, cells, holds = [], [], []
    for c, rate in enumerate(scenario.arrival_rate_per_cell):
        t = _cell_arrivals(rate, scenario.sim_duration, _cell_rng(seed, c, 0))
        h = _cell_rng(seed, c, 1).exponential(scenario.mean_holding_time, size=len(t))
        times.append(t)
        cells.append(np.full(len(t), c, dtype=np.int64))
        holds.append(h)
    t = np.concatenate(times) if times else np.empty(0)
    c = np.concatenate(cells) if cells else np.empty(0, dtype=np.int64)
    h = np.concatenate(holds) if holds else np.empty(0)
    order = np.lexsort((c, t))
    return t[order], c[order], h[order]


def run_hca_simulation(
    scenario: ScenarioConfig,
    plan: AllocationPlan,
    dynamic_pool: int,
    seed: Optional[int] = None,
    record: Optional[list] = None,
) -> SimMetrics:
    """Simulate one run of the scenario with ``plan`` as the fixed channels.

    ``seed`` overrides ``scenario.seed``. Identical inputs give identical
    metrics on either kernel backend.
    """
    if plan.num_cells != scenario.M:
        raise DimensionMismatch(f"plan has {plan.num_cells} cells, scenario has {scenario.M}")
    if dynamic_pool < 0:
        raise ValueError("dynamic_pool must be nonnegative")
    fixed_L, _ = split_channels(scenario.total_channels, scenario.fixed_fraction)
    if sum(plan.counts) > fixed_L:
        raise SeriesExceedsBudget(
            f"plan uses {sum(plan.counts)} fixed channels, scenario allows {fixed_L}"
        )
    t, c, h = generate_calls(scenario, seed)
    offered, blocked, completed, in_progress, grants, peak, area = kernel.simulate_calls(
        t, c, h, np.asarray(plan.counts, dtype=np.int64), int(dynamic_pool),
        float(scenario.sim_duration), record=record,
    )
    as_t = lambda a: tuple(int(x) for x in a)  # noqa: E731
    return SimMetrics(
        offered=as_t(offered),
        blocked=as_t(blocked),
        completed=as_t(completed),
        in_progress=as_t(in_progress),
        dynamic_grants=as_t(grants),
        peak_pool_occupancy=peak,
        mean_pool_occupancy=area / scenario.sim_duration,
    )


def scenario_probabilities(scenario: ScenarioConfig):
    """Probability vector for a scenario: normalized inverse arrival rates.

    Arrival rates stand in for packet counts, so a busier cell gets a smaller
    probability and, under minimization, more channels.
    """
    stats = [
        BaseStationStats(i, 0.0, r) for i, r in enumerate(scenario.arrival_rate_per_cell)
    ]
    return inverse_packet_count_probabilities(stats)


def scenario_bounds(scenario: ScenarioConfig) -> ChannelBounds:
    """Bounds from the scenario file, else from rounded-up offered Erlangs."""
    if scenario.bounds is not None:
        return scenario.bounds
    return estimate_channel_bounds([math.ceil(e) for e in scenario.offered_erlangs])


@dataclass(frozen=True)
class PlanSummary:
    mean_blocking: float
    std_blocking: float
    objective: float
    runs: tuple[SimMetrics, ...] = field(repr=False)


def evaluate_plan(
    scenario: ScenarioConfig,
    plan: AllocationPlan,
    seeds: Sequence[int],
    dynamic_pool: Optional[int] = None,
    probs=None,
) -> PlanSummary:
    """Mean and sample std of overall blocking across seeds, plus the objective.

    ``dynamic_pool`` defaults to the scenario's dynamic share plus the plan's
    residual; ``probs`` defaults to :func:`scenario_probabilities`.
    """
    if len(seeds) == 0:
        raise ValueError("at least one seed is required")
    if dynamic_pool is None:
        _, dyn = split_channels(scenario.total_channels, scenario.fixed_fraction)
        dynamic_pool = dyn + plan.residual_to_pool
    if probs is None:
        probs = scenario_probabilities(scenario)
    runs = tuple(run_hca_simulation(scenario, plan, dynamic_pool, seed=s) for s in seeds)
    blocking = [r.overall_blocking for r in runs]
    std = statistics.stdev(blocking) if len(blocking) > 1 else 0.0
    return PlanSummary(
        mean_blocking=statistics.fmean(blocking),
        std_blocking=std,
        objective=average_allocation(plan, probs),
        runs=runs,
    )
