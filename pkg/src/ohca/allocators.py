"""Channel-count generators: arithmetic and geometric series, source coding.

Every allocator returns an :class:`~ohca.core.AllocationPlan` whose counts
plus residual add up to the budget ``L`` it was given.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    AllocationPlan,
    Direction,
    Strategy,
    StrategyParams,
    largest_remainder_round,
    pair_counts_to_cells,
)
from .errors import (
    CaseInapplicable,
    DimensionMismatch,
    InfeasibleMinimum,
    NoAdmissibleSeries,
    NoFeasibleL,
    SeriesExceedsBudget,
    UnknownStrategy,
    ZeroProbability,
)
from .traffic import ChannelBounds, ProbabilityVector


@dataclass(frozen=True)
class DiophantineSolution:
    """All integer solutions of ``e*x + f*y = target``.

    Solution ``t`` is ``(base_x + t*step_x, base_y + t*step_y)``.
    """

    e: int
    f: int
    target: int
    base_x: int
    base_y: int
    step_x: int
    step_y: int
    g: int

    def at(self, t: int) -> tuple[int, int]:
        return self.base_x + t * self.step_x, self.base_y + t * self.step_y


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b)``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def solve_linear_diophantine(e: int, f: int, g: int) -> Optional[DiophantineSolution]:
    """Solve ``e*x + f*y = g`` over the integers; ``None`` when unsolvable."""
    if e < 1 or f < 1:
        raise ValueError("coefficients must be positive integers")
    gcd, x0, y0 = extended_gcd(e, f)
    if g % gcd:
        return None
    scale = g // gcd
    return DiophantineSolution(
        e=e,
        f=f,
        target=g,
        base_x=x0 * scale,
        base_y=y0 * scale,
        step_x=f // gcd,
        step_y=-(e // gcd),
        g=gcd,
    )


def _check_probs(probs: ProbabilityVector, M: int):
    if len(probs) != M:
        raise DimensionMismatch(f"M={M} but {len(probs)} probabilities")


def _plan(series, L, probs, direction, strategy, params) -> AllocationPlan:
    counts = pair_counts_to_cells(sorted(series), probs, direction)
    used = sum(counts)
    if used > L:
        raise SeriesExceedsBudget(f"series needs {used} channels, budget is {L}")
    return AllocationPlan(counts, L, L - used, strategy, params)


def allocate_ap_case1(
    M: int, L: int, probs: ProbabilityVector, direction: Direction = Direction.MINIMIZE
) -> AllocationPlan:
    """Scaled series c, 2c, ..., Mc with c = 2L / (M^2 + M), rounded to sum L."""
    _check_probs(probs, M)
    if L < M:
        raise InfeasibleMinimum(f"L={L} < M={M}")
    c = Fraction(2 * L, M * M + M)
    quotas = [float(c * i) for i in range(1, M + 1)]
    series = largest_remainder_round(quotas, L, min_one=True)
    return _plan(series, L, probs, direction, Strategy.AP_CASE1, StrategyParams(c=c))


def allocate_ap_case2(
    M: int,
    L: int,
    bounds: ChannelBounds,
    probs: ProbabilityVector,
    direction: Direction = Direction.MINIMIZE,
) -> AllocationPlan:
    """Series starting at ``l_min`` with step ``floor((l_max - l_min) / M)``."""
    _check_probs(probs, M)
    a = bounds.l_min
    d = (bounds.l_max - bounds.l_min) // M
    series = [a + i * d for i in range(M)]
    return _plan(series, L, probs, direction, Strategy.AP_CASE2, StrategyParams(a=a, d=d))


def ap_case3_candidates(M: int, L: int) -> list[tuple[int, int]]:
    """Every ``(a, d)`` with ``a >= 1, d >= 0`` and ``M*a + M(M-1)/2 * d = L``.

    Raises
    ------
    NoFeasibleL
        If the gcd of the two coefficients does not divide ``L``.
    """
    if M < 2:
        raise CaseInapplicable("the Diophantine series needs at least two cells")
    sol = solve_linear_diophantine(M, M * (M - 1) // 2, L)
    if sol is None:
        raise NoFeasibleL(f"L={L} is not a multiple of gcd for M={M}")
    # a = base_x + t*step_x >= 1  and  d = base_y + t*step_y >= 0, step_y < 0
    t_lo = -((sol.base_x - 1) // sol.step_x)
    t_hi = sol.base_y // -sol.step_y
    return [sol.at(t) for t in range(t_lo, t_hi + 1)]


def allocate_ap_case3(
    M: int,
    L: int,
    l_min: int,
    probs: ProbabilityVector,
    direction: Direction = Direction.MINIMIZE,
) -> AllocationPlan:
    """Arithmetic series that sums exactly to ``L``, start nearest ``l_min``."""
    _check_probs(probs, M)
    candidates = ap_case3_candidates(M, L)
    if not candidates:
        raise NoAdmissibleSeries(f"no series with a >= 1, d >= 0 sums to {L} over {M} cells")
    a, d = min(candidates, key=lambda ad: (abs(ad[0] - l_min), ad[0]))
    k = L // math.gcd(M, M * (M - 1) // 2)
    series = [a + i * d for i in range(M)]
    return _plan(
        series, L, probs, direction, Strategy.AP_CASE3, StrategyParams(a=a, d=d, k=k)
    )


def largest_gp_ratio(M: int, bounds: ChannelBounds) -> Optional[int]:
    """Largest integer r >= 2 with l_max - l_min > l_min * (r^(M-1) - 1)."""
    spread = bounds.l_max - bounds.l_min
    a = bounds.l_min
    if spread <= a * (2 ** (M - 1) - 1):
        return None
    r = 2
    while spread > a * ((r + 1) ** (M - 1) - 1):
        r += 1
    return r


def allocate_gp_case4(
    M: int,
    L: int,
    bounds: ChannelBounds,
    probs: ProbabilityVector,
    direction: Direction = Direction.MINIMIZE,
) -> AllocationPlan:
    _check_probs(probs, M)
    if M < 2:
        raise CaseInapplicable("the geometric series needs at least two cells")
    r = largest_gp_ratio(M, bounds)
    if r is None:
        raise CaseInapplicable(
            f"no integer ratio >= 2 fits bounds ({bounds.l_min}, {bounds.l_max}) for M={M}"
        )
    a = bounds.l_min
    series = [a * r**i for i in range(M)]
    return _plan(series, L, probs, direction, Strategy.GP_CASE4, StrategyParams(a=a, r=r))


def huffman_code_lengths(probs: ProbabilityVector | Sequence[float]) -> list[int]:
    """Depth of each station's leaf in a Huffman tree built over ``probs``.

    Merges take the two lightest nodes; equal weights are ordered by the
    smallest station id under each node.
    """
    values = list(probs)
    if len(values) < 2:
        raise DimensionMismatch("Huffman code lengths need at least two stations")
    for i, p in enumerate(values):
        if p <= 0:
            raise ZeroProbability(f"station {i} has zero probability")
    heap = [(p, i, (i,)) for i, p in enumerate(values)]
    heapq.heapify(heap)
    depth = [0] * len(values)
    while len(heap) > 1:
        p1, id1, leaves1 = heapq.heappop(heap)
        p2, id2, leaves2 = heapq.heappop(heap)
        for leaf in leaves1 + leaves2:
            depth[leaf] += 1
        heapq.heappush(heap, (p1 + p2, min(id1, id2), leaves1 + leaves2))
    return depth


def source_coding_weights(probs: ProbabilityVector | Sequence[float]) -> list[float]:
    """Ideal code lengths ``-log2 p_i``."""
    out = []
    for i, p in enumerate(probs):
        if p <= 0:
            raise ZeroProbability(f"station {i} has zero probability")
        out.append(-math.log2(p))
    return out


def allocate_source_coding(
    probs: ProbabilityVector, L: int, direction: Direction = Direction.MINIMIZE
) -> AllocationPlan:
    """Split ``L`` in the ratio of the ideal code lengths.

    When every probability is equal (M = 1 included) the weights are all zero
    or all equal, and the split degenerates to the uniform one.
    """
    M = len(probs)
    weights = source_coding_weights(probs)
    if L < M:
        raise InfeasibleMinimum(f"L={L} < M={M}")
    if math.fsum(weights) <= 0:
        weights = [1.0] * M
    counts = largest_remainder_round(weights, L, min_one=True)
    if direction is Direction.MAXIMIZE:
        counts = list(pair_counts_to_cells(sorted(counts), probs, direction))
    return AllocationPlan(tuple(counts), L, 0, Strategy.SOURCE_CODING, StrategyParams())


def allocate_uniform(M: int, L: int) -> AllocationPlan:
    """Conventional FCA: ``L // M`` each, remainder to the lowest indices."""
    if M < 1:
        raise DimensionMismatch("M must be positive")
    if L < M:
        raise InfeasibleMinimum(f"L={L} < M={M}")
    base, extra = divmod(L, M)
    counts = tuple(base + (1 if i < extra else 0) for i in range(M))
    return AllocationPlan(counts, L, 0, Strategy.UNIFORM_FCA, StrategyParams())


def parse_strategy(token: str | Strategy) -> Strategy:
    if isinstance(token, Strategy):
        return token
    try:
        return Strategy(token)
    except ValueError:
        valid = " | ".join(s.value for s in Strategy)
        raise UnknownStrategy(f"unknown strategy {token!r}; expected one of {valid}") from None


def allocate(
    strategy: str | Strategy,
    probs: ProbabilityVector,
    L: int,
    bounds: Optional[ChannelBounds] = None,
    direction: Direction = Direction.MINIMIZE,
) -> AllocationPlan:
    """Run the allocator named by ``strategy``; the cell count is ``len(probs)``.

    ``ap2`` and ``gp4`` need ``bounds``; ``ap3`` uses ``bounds.l_min`` as the
    preferred series start (1 when no bounds are given).
    """
    strategy = parse_strategy(strategy)
    M = len(probs)
    if strategy is Strategy.AP_CASE1:
        return allocate_ap_case1(M, L, probs, direction)
    if strategy is Strategy.AP_CASE2:
        return allocate_ap_case2(M, L, _need(bounds, strategy), probs, direction)
    if strategy is Strategy.AP_CASE3:
        l_min = bounds.l_min if bounds is not None else 1
        return allocate_ap_case3(M, L, l_min, probs, direction)
    if strategy is Strategy.GP_CASE4:
        return allocate_gp_case4(M, L, _need(bounds, strategy), probs, direction)
    if strategy is Strategy.SOURCE_CODING:
        return allocate_source_coding(probs, L, direction)
    return allocate_uniform(M, L)


def _need(bounds, strategy):
    if bounds is None:
        raise CaseInapplicable(f"strategy {strategy.value} requires channel bounds")
    return bounds
