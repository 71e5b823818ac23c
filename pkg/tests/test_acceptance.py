"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary."""

import time

import numpy as np

from pab_sfe import (
    Demand,
    Firm,
    KinkedOffer,
    Quadruple,
    best_response,
    best_response_grid_oracle,
    clear_market_general,
    clear_market_kinked,
    dominance_transform,
    find_equilibrium,
    increasing_differences_check,
    k_sweep,
    kink_improvement,
    pab_utility_general,
    restricted_utility,
    verify_nash,
)
from pab_sfe.analysis import increasing_differences_sides
from pab_sfe.market import random_supply_curve

from .conftest import paper_scenario

RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f"  ({detail})" if detail else ""))
    assert ok, detail


def _reproduce(number, K, bps, price, utils, tol, budget):
    t0 = time.perf_counter()
    res = find_equilibrium(paper_scenario(K))
    elapsed = time.perf_counter() - t0
    b_err = max(abs(a - b) for a, b in zip(res.breakpoints, bps))
    p_err = abs(res.clearing_price - price)
    u_err = max(abs(a - b) / b for a, b in zip(res.utilities, utils))
    ok = res.converged and b_err <= tol and p_err <= tol and u_err <= 0.01 and elapsed < budget
    record(
        number,
        f"K={K:g} equilibrium reproduction",
        ok,
        f"max|dp_i|={b_err:.4f}, |dp*|={p_err:.4f}, max rel du={u_err:.4f}, {elapsed:.2f}s",
    )


def test_criterion_01_k5():
    _reproduce(1, 5.0, (5.68, 6.53, 7.09, 7.42), 7.79, (43.2, 25.25, 13.78, 7.22), 0.02, 1.0)


def test_criterion_02_k10():
    _reproduce(2, 10.0, (6.36, 6.9, 7.22, 7.39), 7.57, (47.74, 26.07, 13.66, 7.00), 0.02, 1.0)


def test_criterion_03_k1000():
    _reproduce(3, 1000.0, (7.261, 7.269, 7.272, 7.274), 7.276, (52.84, 26.45, 13.23, 6.62), 0.005, 5.0)


def test_criterion_04_example1(example1):
    d, K, f1 = example1.demand, example1.lipschitz_K, example1.firms[0]
    u_base = restricted_utility(50.0, [0.0], K, d, f1)
    u_other = restricted_utility(50.0, [1.0], K, d, f1)
    u_both = restricted_utility(50.2, [1.0], K, d, f1)
    quad = Quadruple(50.0, 50.2, (0.0,), (1.0,))
    lhs, rhs = increasing_differences_sides(example1, 0, quad)
    flagged = not increasing_differences_check(example1, 0, [quad]).is_supermodular_on_sample
    ok = (
        u_base == 0.0
        and abs(u_other - 50.0 / 3.0) <= 1e-9
        and abs(u_both - 10.04) <= 0.01
        and abs(lhs + 6.63) <= 0.01
        and rhs == 0.0
        and flagged
    )
    record(4, "Example 1 reproduction", ok, f"u=({u_base}, {u_other:.10f}, {u_both:.4f}), lhs={lhs:.4f}, rhs={rhs}")


def test_criterion_05_clearing_oracle():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst = 0.0
    cases = 1000
    for _ in range(cases):
        d = Demand(rng.uniform(1.0, 500.0), rng.uniform(0.1, 50.0))
        n = int(rng.integers(1, 9))
        K = float(10 ** rng.uniform(-1.0, 3.0))
        b = rng.uniform(0.0, d.price_cap, n)
        # a share of breakpoints pinned at the ends exercises the boundary segments
        b[rng.random(n) < 0.1] = d.price_cap
        b[rng.random(n) < 0.05] = 0.0
        curves = [KinkedOffer(x, K).to_supply_curve(d.price_cap) for x in b]
        worst = max(worst, abs(clear_market_kinked(b, K, d) - clear_market_general(curves, d)))
    elapsed = time.perf_counter() - t0
    record(5, "clearing oracle equivalence", worst <= 1e-8 and elapsed < 10.0, f"{cases} cases, max diff {worst:.2e}, {elapsed:.2f}s")


def test_criterion_06_best_response_oracle():
    rng = np.random.default_rng(6)
    worst = -np.inf
    cases = 500
    for _ in range(cases):
        d = Demand(rng.uniform(10.0, 200.0), rng.uniform(0.5, 20.0))
        K = float(10 ** rng.uniform(-1.0, 3.0))
        others = rng.uniform(0.0, d.price_cap, int(rng.integers(0, 7)))
        firm = Firm(1, float(rng.uniform(0.0, 5.0)))
        closed = best_response(0, others, K, d, firm)
        oracle = best_response_grid_oracle(0, others, K, d, firm, grid_points=10_000)
        worst = max(worst, oracle.best_utility - closed.best_utility)
    record(6, "best-response oracle equivalence", worst <= 1e-6, f"{cases} cases, max oracle excess {worst:.2e}")


def _random_market(rng, slope_K=None):
    d = Demand(100.0, 10.0)
    others = [random_supply_curve(rng, 10.0, slope_K=slope_K, n_nodes=6) for _ in range(int(rng.integers(1, 4)))]
    own = random_supply_curve(rng, 10.0, slope_K=slope_K, n_nodes=int(rng.integers(3, 12)))
    return d, own, others


def test_criterion_07_dominance():
    rng = np.random.default_rng(7)
    cases, failures, min_margin = 0, 0, np.inf
    while cases < 200:
        d, own, others = _random_market(rng)
        p = clear_market_general([own, *others], d)
        if not p > 0 or own.integral(p) <= 0.0:
            continue
        cases += 1
        firm = Firm(1, float(rng.uniform(0.0, 2.0)))
        dom = dominance_transform(own, p)
        p_dom = clear_market_general([dom, *others], d)
        int_gap = own.integral(p) - dom.integral(p)
        u_gap = pab_utility_general(dom, p, firm).utility - pab_utility_general(own, p, firm).utility
        min_margin = min(min_margin, int_gap, u_gap)
        if abs(p_dom - p) > 1e-8 or int_gap <= 1e-9 or u_gap <= 1e-9:
            failures += 1
    record(7, "dominance transform", failures == 0, f"{cases} curves, {failures} failures, min margin {min_margin:.3e}")


def test_criterion_08_kink_improvement():
    rng = np.random.default_rng(8)
    K = 5.0
    cases, failures, strict_cases = 0, 0, 0
    while cases < 200:
        d, own, others = _random_market(rng, slope_K=K)
        p = clear_market_general([own, *others], d)
        if not p > 0:
            continue
        cases += 1
        firm = Firm(1, float(rng.uniform(0.0, 2.0)))
        kinked = kink_improvement(own, p, K).to_supply_curve(10.0)
        p_k = clear_market_general([kinked, *others], d)
        gap = pab_utility_general(kinked, p, firm).utility - pab_utility_general(own, p, firm).utility
        differs = own.integral(p) - kinked.integral(p) > 1e-9
        strict_cases += differs
        if abs(p_k - p) > 1e-8 or gap < -1e-12 or (differs and gap <= 0.0):
            failures += 1
    record(8, "kink improvement", failures == 0, f"{cases} curves ({strict_cases} strict), {failures} failures")


def test_criterion_09_nash_certificate():
    gains = {}
    ok = True
    for K in (5.0, 10.0, 1000.0):
        sc = paper_scenario(K)
        cert = verify_nash(find_equilibrium(sc).breakpoints, sc, epsilon=1e-2, deviation_grid_size=10_000)
        gains[K] = max(cert.per_firm_max_gain)
        ok &= cert.passed
    zeros = verify_nash([0.0] * 4, paper_scenario(5.0), epsilon=1e-2, deviation_grid_size=10_000)
    ok &= not zeros.passed
    detail = ", ".join(f"K={k:g} max gain {g:.1e}" for k, g in gains.items())
    record(9, "Nash certificate", ok, f"{detail}; all-zeros max gain {max(zeros.per_firm_max_gain):.2f}")


def test_criterion_10_k_sweep():
    rows = k_sweep(paper_scenario(5.0), [5.0, 10.0, 1000.0])
    p = [r.clearing_price for r in rows]
    u1 = [r.utilities[0] for r in rows]
    u4 = [r.utilities[3] for r in rows]
    spread = max(abs(b - rows[-1].clearing_price) for b in rows[-1].breakpoints)
    ok = all(r.converged for r in rows) and p[0] > p[1] > p[2] and u1[0] < u1[1] < u1[2] and u4[0] > u4[1] > u4[2]
    ok &= spread <= 0.02
    record(10, "comparative statics in K", ok, f"p*={[round(x, 3) for x in p]}, max|p_i-p*| at K=1000 {spread:.4f}")
