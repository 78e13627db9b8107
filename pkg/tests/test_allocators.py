import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from ohca.allocators import (
    allocate,
    allocate_ap_case1,
    allocate_ap_case2,
    allocate_ap_case3,
    allocate_gp_case4,
    allocate_source_coding,
    allocate_uniform,
    ap_case3_candidates,
    huffman_code_lengths,
    solve_linear_diophantine,
)
from ohca.core import Direction, Strategy, average_allocation
from ohca.errors import (
    CaseInapplicable,
    InfeasibleMinimum,
    NoAdmissibleSeries,
    NoFeasibleL,
    OhcaError,
    SeriesExceedsBudget,
    UnknownStrategy,
    ZeroProbability,
)
from ohca.traffic import ChannelBounds, ProbabilityVector

P = ProbabilityVector
DESC4 = P([0.4, 0.3, 0.2, 0.1])


def uniform(m):
    return P([1 / m] * m)


# --- Diophantine -----------------------------------------------------------

def test_diophantine_family():
    sol = solve_linear_diophantine(5, 10, 25)
    assert sol.g == 5
    assert (sol.step_x, sol.step_y) == (2, -1)
    family = {sol.at(t) for t in range(-5, 6)}
    assert {(5, 0), (3, 1), (1, 2)} <= family


def test_diophantine_no_solution():
    assert solve_linear_diophantine(4, 6, 7) is None


@pytest.mark.parametrize("f, g", [(1, 0), (7, 13), (3, -8)])
def test_diophantine_unit_coefficient(f, g):
    sol = solve_linear_diophantine(1, f, g)
    assert any(sol.at(t) == (g, 0) for t in range(-abs(g) - 1, abs(g) + 2))


@settings(max_examples=300)
@given(
    st.integers(min_value=1, max_value=50),
    st.integers(min_value=1, max_value=50),
    st.integers(min_value=-50, max_value=50),
)
def test_diophantine_against_brute_force(e, f, g):
    sol = solve_linear_diophantine(e, f, g)
    brute = any((g - e * x) % f == 0 for x in range(-abs(g) - f, abs(g) + f + 1))
    assert (sol is not None) == brute
    if sol is not None:
        for t in range(-3, 4):
            x, y = sol.at(t)
            assert e * x + f * y == g
        assert e * sol.step_x + f * sol.step_y == 0


# --- AP cases -----------------------------------------------------------------

def test_ap1_worked_example():
    plan = allocate_ap_case1(4, 20, DESC4)
    assert plan.counts == (2, 4, 6, 8)
    assert plan.params.c == Fraction(2)
    assert plan.residual_to_pool == 0


def test_ap1_single_cell():
    assert allocate_ap_case1(1, 5, P([1.0])).counts == (5,)


def test_ap1_non_integral_scale():
    plan = allocate_ap_case1(3, 10, P([0.5, 0.3, 0.2]))
    assert plan.params.c == Fraction(5, 3)
    assert plan.counts == (2, 3, 5)


def test_ap1_infeasible():
    with pytest.raises(InfeasibleMinimum):
        allocate_ap_case1(4, 3, DESC4)


def test_ap2_residual():
    plan = allocate_ap_case2(5, 35, ChannelBounds(2, 13), uniform(5))
    assert sorted(plan.counts) == [2, 4, 6, 8, 10]
    assert (plan.params.a, plan.params.d, plan.residual_to_pool) == (2, 2, 5)


def test_ap2_exceeds_budget():
    with pytest.raises(SeriesExceedsBudget):
        allocate_ap_case2(5, 25, ChannelBounds(2, 13), uniform(5))


def test_ap2_degenerate_step():
    plan = allocate_ap_case2(4, 20, ChannelBounds(3, 5), uniform(4))
    assert plan.counts == (3, 3, 3, 3)
    assert plan.params.d == 0


def test_ap3_tie_break():
    assert ap_case3_candidates(5, 25) == [(1, 2), (3, 1), (5, 0)]
    plan = allocate_ap_case3(5, 25, 2, uniform(5))
    assert plan.counts == (1, 3, 5, 7, 9)
    assert (plan.params.a, plan.params.d, plan.params.k) == (1, 2, 5)
    assert plan.residual_to_pool == 0


def test_ap3_not_multiple():
    with pytest.raises(NoFeasibleL):
        allocate_ap_case3(5, 23, 2, uniform(5))


def test_ap3_even_m():
    assert ap_case3_candidates(4, 14) == [(2, 1)]
    assert allocate_ap_case3(4, 14, 3, uniform(4)).counts == (2, 3, 4, 5)


def test_ap3_no_admissible_series():
    # 4a + 6d = 6 only has a = 0, d = 1 with d >= 0
    with pytest.raises(NoAdmissibleSeries):
        allocate_ap_case3(4, 6, 1, uniform(4))


def brute_ad(M, L):
    f = M * (M - 1) // 2
    return [(a, d) for d in range(0, L // f + 1) for a in range(1, L + 1) if M * a + f * d == L]


@pytest.mark.parametrize("M", [2, 3, 4, 5, 6, 7, 8, 9])
def test_ap3_candidates_match_brute_force(M):
    for L in range(M, 120):
        try:
            got = ap_case3_candidates(M, L)
        except NoFeasibleL:
            got = []
        assert sorted(got) == sorted(brute_ad(M, L)), (M, L)


# --- GP case ----------------------------------------------------------------

def test_gp4_example():
    plan = allocate_gp_case4(3, 30, ChannelBounds(2, 20), P([0.5, 0.3, 0.2]))
    assert plan.counts == (2, 6, 18)
    assert (plan.params.a, plan.params.r, plan.residual_to_pool) == (2, 3, 4)


def test_gp4_inapplicable():
    with pytest.raises(CaseInapplicable):
        allocate_gp_case4(3, 100, ChannelBounds(5, 10), uniform(3))


def test_gp4_boundary():
    plan = allocate_gp_case4(2, 10, ChannelBounds(1, 10), P([0.6, 0.4]))
    assert plan.counts == (1, 9)
    assert (plan.params.r, plan.residual_to_pool) == (9, 0)


def test_gp4_exceeds_budget():
    with pytest.raises(SeriesExceedsBudget):
        allocate_gp_case4(3, 20, ChannelBounds(2, 20), uniform(3))


@given(
    st.integers(min_value=2, max_value=6),
    st.integers(min_value=1, max_value=20),
    st.integers(min_value=0, max_value=5000),
)
def test_gp4_ratio_is_largest(M, l_min, spread):
    bounds = ChannelBounds(l_min, l_min + spread)
    ok = lambda r: spread > l_min * (r ** (M - 1) - 1)  # noqa: E731
    try:
        plan = allocate_gp_case4(M, 10**9, bounds, uniform(M))
    except CaseInapplicable:
        assert not ok(2)
        return
    r = plan.params.r
    assert r >= 2 and ok(r) and not ok(r + 1)


# --- Huffman and source coding -------------------------------------------

def test_huffman_dyadic():
    assert huffman_code_lengths([0.5, 0.25, 0.125, 0.125]) == [1, 2, 3, 3]


def test_huffman_thirds():
    lengths = huffman_code_lengths([1 / 3] * 3)
    assert sorted(lengths) == [1, 2, 2]
    assert lengths == [2, 2, 1]


def test_huffman_two():
    assert huffman_code_lengths([0.5, 0.5]) == [1, 1]


def test_huffman_zero_probability():
    with pytest.raises(ZeroProbability):
        huffman_code_lengths([1.0, 0.0])


def expected_length_bruteforce(probs):
    # optimal prefix-code expected length over all complete trees, by merging
    # every pair recursively (exponential; fine for M <= 6)
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def best(ws):
        if len(ws) == 1:
            return 0.0
        out = math.inf
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                rest = [w for k, w in enumerate(ws) if k not in (i, j)]
                merged = ws[i] + ws[j]
                out = min(out, merged + best(tuple(sorted(rest + [merged]))))
        return out

    return best(tuple(sorted(probs)))


@settings(max_examples=60)
@given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=6))
def test_huffman_is_optimal(weights):
    probs = P.from_weights(weights).values
    lengths = huffman_code_lengths(probs)
    got = sum(p * n for p, n in zip(probs, lengths))
    assert got == pytest.approx(expected_length_bruteforce(probs), rel=1e-9)


def test_source_coding_worked_example():
    plan = allocate_source_coding(P([0.5, 0.25, 0.125, 0.125]), 18)
    assert plan.counts == (2, 4, 6, 6)
    assert plan.strategy is Strategy.SOURCE_CODING


def test_source_coding_uniform():
    assert allocate_source_coding(uniform(4), 8).counts == (2, 2, 2, 2)


def test_source_coding_min_one():
    # weights 0.152 : 3.322 give quotas 0.437 : 9.563
    plan = allocate_source_coding(P([0.9, 0.1]), 10)
    assert plan.counts == (1, 9)


def test_source_coding_maximize():
    plan = allocate_source_coding(P([0.5, 0.25, 0.125, 0.125]), 18, Direction.MAXIMIZE)
    assert plan.counts == (6, 6, 4, 2)


def test_source_coding_zero():
    with pytest.raises(ZeroProbability):
        allocate_source_coding(P([1.0, 0.0]), 10)


# --- dispatcher ------------------------------------------------------------------

def test_uniform_split():
    assert allocate_uniform(4, 10).counts == (3, 3, 2, 2)
    assert allocate("uniform", uniform(4), 10).counts == (3, 3, 2, 2)


def test_dispatch_ap1():
    assert allocate("ap1", DESC4, 20) == allocate_ap_case1(4, 20, DESC4)


def test_unknown_strategy():
    with pytest.raises(UnknownStrategy):
        allocate("ap9", DESC4, 20)


def test_bounds_required():
    with pytest.raises(CaseInapplicable):
        allocate("ap2", DESC4, 20)


# --- properties -----------------------------------------------------------------

prob_vectors = st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=10).map(
    P.from_weights
)
bounds_st = st.tuples(st.integers(1, 10), st.integers(0, 60)).map(
    lambda t: ChannelBounds(t[0], t[0] + t[1])
)


@settings(max_examples=300)
@given(prob_vectors, st.integers(1, 400), bounds_st, st.sampled_from(list(Strategy)),
       st.sampled_from(list(Direction)))
def test_budget_and_dominance(probs, L, bounds, strategy, direction):
    try:
        plan = allocate(strategy, probs, L, bounds, direction)
    except OhcaError:
        return
    assert sum(plan.counts) + plan.residual_to_pool == L
    assert all(n >= 1 for n in plan.counts)
    if strategy is Strategy.AP_CASE3:
        assert plan.residual_to_pool == 0
    if direction is Direction.MINIMIZE and strategy is not Strategy.UNIFORM_FCA:
        p = probs.values
        for i in range(len(p)):
            for j in range(len(p)):
                if p[i] > p[j]:
                    assert plan.counts[i] <= plan.counts[j]


@settings(max_examples=300)
@given(prob_vectors, st.integers(1, 400), bounds_st,
       st.sampled_from([s for s in Strategy if s is not Strategy.UNIFORM_FCA]))
def test_objective_not_worse_than_uniform(probs, L, bounds, strategy):
    assume(max(probs.values) - min(probs.values) > 1e-9)
    try:
        plan = allocate(strategy, probs, L, bounds)
    except OhcaError:
        return
    base = allocate_uniform(len(probs), L)
    assert average_allocation(plan, probs) <= average_allocation(base, probs) + 1e-9


@pytest.mark.parametrize("M", [3, 5, 7, 9])
def test_ap3_odd_m_feasibility(M):
    for L in range(M, 201):
        try:
            allocate_ap_case3(M, L, 1, uniform(M))
            ok = True
        except (NoFeasibleL, NoAdmissibleSeries):
            ok = False
        assert ok == (L % M == 0), (M, L)
