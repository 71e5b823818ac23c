import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pab_sfe import Demand, Firm, best_response, best_response_grid_oracle, clear_market_kinked, restricted_utility
from pab_sfe.best_response import _pick, golden_section_max, unimodality_audit
from pab_sfe.payoff import restricted_utility_batch

# single firm facing D(p) = 100 - 10 p; optimum solved symbolically (sympy) and frozen
MONOPOLY = [
    # K, c, best breakpoint, best utility
    (5.0, 0.0, 2.5, 125.0),
    (5.0, 0.25, 20.0 / 3.0, 500.0 / 9.0),
    (10.0, 0.0, 10.0 / 3.0, 500.0 / 3.0),
    (10.0, 0.25, 7.5, 62.5),
    (1000.0, 0.0, 1000.0 / 201.0, 50000.0 / 201.0),
]


@pytest.mark.parametrize("K,c,x,u", MONOPOLY)
def test_single_firm_matches_symbolic_optimum(paper_demand, K, c, x, u):
    res = best_response(0, [], K, paper_demand, Firm(1, c))
    assert res.best_breakpoint == pytest.approx(x, abs=1e-9)
    assert res.best_utility == pytest.approx(u, rel=1e-12)
    assert 0.0 < res.best_breakpoint < paper_demand.price_cap


@pytest.mark.parametrize("K,c,x,u", MONOPOLY)
def test_opponents_at_cap_reduce_to_single_firm(paper_demand, K, c, x, u):
    res = best_response_grid_oracle(0, [10.0, 10.0], K, paper_demand, Firm(1, c), grid_points=2000)
    assert res.best_breakpoint == pytest.approx(x, abs=1e-6)
    assert res.best_utility == pytest.approx(u, abs=1e-8)


def test_paper_k5_firm1_best_response(paper_demand):
    res = best_response(0, [6.53, 7.09, 7.42], 5.0, paper_demand, Firm(1, 0.25))
    assert res.best_breakpoint == pytest.approx(5.68, abs=0.02)


def test_prohibitive_cost(paper_demand):
    others = [5.0, 6.0]
    firm = Firm(1, 1e6)
    res = best_response(0, others, 5.0, paper_demand, firm)
    oracle = best_response_grid_oracle(0, others, 5.0, paper_demand, firm)
    p_without = clear_market_kinked([10.0, *others], 5.0, paper_demand)
    assert 0.0 <= res.best_utility < 1e-3
    assert res.best_breakpoint >= p_without - 1e-3
    assert res.best_utility >= oracle.best_utility - 1e-12


def test_self_consistency_is_bitwise(paper_demand):
    firm = Firm(1, 0.5)
    res = best_response(0, [3.0, 8.0, 9.5], 10.0, paper_demand, firm)
    assert restricted_utility(res.best_breakpoint, [3.0, 8.0, 9.5], 10.0, paper_demand, firm) == res.best_utility


def test_segment_diagnostics_cover_active_sets(paper_demand):
    res = best_response(0, [3.0, 8.0, 9.5], 10.0, paper_demand, Firm(1, 0.5))
    assert res.segment_diagnostics
    for seg in res.segment_diagnostics:
        lo, hi = seg.interval
        assert 0.0 <= lo <= seg.optimum_breakpoint <= hi <= 10.0
        assert 0 <= seg.active_opponents <= 3
    assert max(s.optimum_utility for s in res.segment_diagnostics) == pytest.approx(res.best_utility, abs=1e-9)


def test_pick_breaks_ties_towards_larger_breakpoint():
    assert _pick([(1.0, 0.0), (3.0, 0.0), (2.0, -1.0)]) == (3.0, 0.0)


def test_golden_section_on_parabola():
    x, fx = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx <= 0.0


def test_grid_oracle_needs_two_points(paper_demand):
    with pytest.raises(ValueError):
        best_response_grid_oracle(0, [5.0], 5.0, paper_demand, Firm(1, 0.0), grid_points=1)


@st.composite
def br_instances(draw):
    N = draw(st.floats(10.0, 200.0))
    gamma = draw(st.floats(0.5, 20.0))
    d = Demand(N, gamma)
    K = draw(st.sampled_from([0.1, 1.0, 5.0, 10.0, 100.0, 1000.0]))
    others = draw(st.lists(st.floats(0.0, 1.0), min_size=0, max_size=6))
    c = draw(st.floats(0.0, 5.0))
    return d, K, [f * d.price_cap for f in others], Firm(1, c)


@settings(max_examples=100)
@given(br_instances())
def test_closed_form_beats_grid_oracle(inst):
    d, K, others, firm = inst
    res = best_response(0, others, K, d, firm)
    oracle = best_response_grid_oracle(0, others, K, d, firm, grid_points=2000)
    assert 0.0 <= res.best_breakpoint <= d.price_cap
    assert res.best_utility >= oracle.best_utility - 1e-6
    assert restricted_utility(res.best_breakpoint, others, K, d, firm) == res.best_utility

    grid = np.linspace(0, d.price_cap, 2000)
    values = restricted_utility_batch(grid, others, K, d, firm)
    rivals = grid[(values >= values.max() - 1e-6) & (np.abs(grid - res.best_breakpoint) > 1e-3)]
    if rivals.size == 0 and res.best_utility > 1e-9:
        assert res.best_breakpoint == pytest.approx(oracle.best_breakpoint, abs=1e-3)


def test_unimodality_sanity_instance(paper_demand):
    assert unimodality_audit([], 0.5, paper_demand, Firm(1, 0.0)) == []


def test_unimodality_audit_logs_findings(paper_demand, rng, caplog):
    caplog.set_level(logging.WARNING)
    found = []
    for _ in range(200):
        others = list(rng.uniform(0, 10, rng.integers(1, 5)))
        found += unimodality_audit(others, float(rng.choice([1.0, 10.0, 1000.0])), paper_demand, Firm(1, rng.uniform(0, 3)))
    for f in found:
        assert f.utility < f.global_max
    assert len(caplog.records) == len(found)
