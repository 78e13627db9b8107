"""Allocation plans, the average-channels objective and the rank-and-pair rule."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DimensionMismatch, InfeasibleMinimum
from .traffic import ProbabilityVector


class Direction(enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Strategy(enum.Enum):
    AP_CASE1 = "ap1"
    AP_CASE2 = "ap2"
    AP_CASE3 = "ap3"
    GP_CASE4 = "gp4"
    SOURCE_CODING = "source"
    UNIFORM_FCA = "uniform"


@dataclass(frozen=True)
class StrategyParams:
    c: Optional[Fraction] = None
    a: Optional[int] = None
    d: Optional[int] = None
    r: Optional[int] = None
    k: Optional[int] = None

    def to_dict(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if val is None:
                continue
            if isinstance(val, Fraction):
                out[key] = str(val) if val.denominator != 1 else val.numerator
            else:
                out[key] = val
        return out


@dataclass(frozen=True)
class AllocationPlan:
    """Fixed channel counts per station plus the strategy that produced them.

    ``total_fixed`` is the budget L handed to the allocator; whatever the
    series does not consume is ``residual_to_pool`` and joins the dynamic pool.
    """

    counts: tuple[int, ...]
    total_fixed: int
    residual_to_pool: int
    strategy: Strategy
    params: StrategyParams = field(default_factory=StrategyParams)

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
        if any(n < 0 for n in self.counts):
            raise ValueError("channel counts must be nonnegative")
        if self.residual_to_pool < 0:
            raise ValueError("residual must be nonnegative")
        if sum(self.counts) + self.residual_to_pool != self.total_fixed:
            raise ValueError(
                f"counts {sum(self.counts)} + residual {self.residual_to_pool} "
                f"!= budget {self.total_fixed}"
            )

    @property
    def num_cells(self) -> int:
        return len(self.counts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["station", "channels"])
        for i, n in enumerate(self.counts):
            w.writerow([i, n])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "counts": list(self.counts),
            "total_fixed": self.total_fixed,
            "residual_to_pool": self.residual_to_pool,
            "params": self.params.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, doc: dict) -> "AllocationPlan":
        params = dict(doc.get("params", {}))
        if "c" in params:
            params["c"] = Fraction(str(params["c"]))
        return cls(
            counts=tuple(doc["counts"]),
            total_fixed=int(doc["total_fixed"]),
            residual_to_pool=int(doc["residual_to_pool"]),
            strategy=Strategy(doc["strategy"]),
            params=StrategyParams(**params),
        )


def average_allocation(plan: AllocationPlan | Sequence[int], probs: ProbabilityVector) -> float:
    """Probability-weighted mean channel count, sum of n_i * p_i."""
    counts = plan.counts if isinstance(plan, AllocationPlan) else tuple(plan)
    if len(counts) != len(probs):
        raise DimensionMismatch(f"{len(counts)} counts vs {len(probs)} probabilities")
    return math.fsum(n * p for n, p in zip(counts, probs))


def rank_cells(probs: ProbabilityVector | Sequence[float]) -> list[int]:
    """Station indices by descending probability, ties to the lower index."""
    values = list(probs)
    return sorted(range(len(values)), key=lambda i: (-values[i], i))


def pair_counts_to_cells(
    sorted_counts_ascending: Sequence[int],
    probs: ProbabilityVector | Sequence[float],
    direction: Direction = Direction.MINIMIZE,
) -> tuple[int, ...]:
    """Hand out channel counts so the objective is minimized (or maximized).

    Under ``MINIMIZE`` the most probable cell receives the smallest count;
    ``MAXIMIZE`` reverses the pairing. Returns counts indexed by station.
    """
    counts = sorted(int(n) for n in sorted_counts_ascending)
    if len(counts) != len(probs):
        raise DimensionMismatch(f"{len(counts)} counts vs {len(probs)} probabilities")
    if direction is Direction.MAXIMIZE:
        counts.reverse()
    out = [0] * len(counts)
    for station, n in zip(rank_cells(probs), counts):
        out[station] = n
    return tuple(out)


def largest_remainder_round(
    real_quotas: Sequence[float],
    L: int,
    min_one: bool = False,
) -> list[int]:
    """Apportion ``L`` integer units in proportion to ``real_quotas``.

    Each entry gets ``floor(q_i * L / sum(q))``; the leftover units go to the
    largest fractional remainders, ties to the lower index. The result is then
    made monotone in the quotas (a smaller quota never ends up with more
    units), which only permutes values between cells whose rounding crossed.

    With ``min_one`` every entry is raised to at least one unit, taking the
    units from the largest entries.
    """
    quotas = [float(q) for q in real_quotas]
    m = len(quotas)
    if m == 0:
        raise DimensionMismatch("no quotas")
    if any(q < 0 or not math.isfinite(q) for q in quotas):
        raise ValueError("quotas must be finite and nonnegative")
    total = math.fsum(quotas)
    if total <= 0:
        raise ValueError("quotas sum to zero")
    if L < 0:
        raise ValueError("L must be nonnegative")
    if min_one and L < m:
        raise InfeasibleMinimum(f"{L} channels cannot give {m} cells one each")

    scaled = [q * L / total for q in quotas]
    result = [int(math.floor(s)) for s in scaled]
    # float error can push a floor one past the true value
    while sum(result) > L:
        j = max(range(m), key=lambda i: (result[i] - scaled[i], i))
        result[j] -= 1
    leftover = L - sum(result)
    order = sorted(range(m), key=lambda i: (-(scaled[i] - result[i]), i))
    for i in order[:leftover]:
        result[i] += 1

    if min_one:
        for i in range(m):
            while result[i] < 1:
                # donor: a largest entry, preferring the smallest quota so the
                # quota ordering survives
                donor = max(
                    (j for j in range(m) if result[j] > 1),
                    key=lambda j: (result[j], -quotas[j], -j),
                )
                result[donor] -= 1
                result[i] += 1

    by_quota = sorted(range(m), key=lambda i: (quotas[i], i))
    values = sorted(result)
    for i, v in zip(by_quota, values):
        result[i] = v
    return result
