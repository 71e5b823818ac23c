"""Nash equilibria of the breakpoint game.

Equilibria are located by damped simultaneous best-response iteration and
then certified by checking that no firm gains more than ``epsilon`` from a
unilateral deviation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .best_response import best_response
from .market import (
    KinkedOffer,
    Scenario,
    SupplyCurve,
    check_breakpoints,
    clear_market_general,
    clear_market_kinked,
    random_supply_curve,
)
from .payoff import pab_utility_general, profile_outcome, restricted_utility, restricted_utility_batch


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 100_000
    damping: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class EquilibriumResult:
    breakpoints: tuple[float, ...]
    clearing_price: float
    utilities: tuple[float, ...]
    iterations: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class NashCertificate:
    epsilon: float
    per_firm_max_gain: tuple[float, ...]
    deviation_grid_size: int
    passed: bool
    per_firm_best_deviation: tuple[float, ...] = field(default=())


def best_response_profile(breakpoints: Sequence[float], scenario: Scenario) -> list[float]:
    """Every firm's best response to the others' current breakpoints."""
    b = list(breakpoints)
    return [
        best_response(i, b[:i] + b[i + 1 :], scenario.lipschitz_K, scenario.demand, firm).best_breakpoint
        for i, firm in enumerate(scenario.firms)
    ]


def find_equilibrium(
    scenario: Scenario,
    options: SolverOptions | None = None,
    initial: Sequence[float] | None = None,
) -> EquilibriumResult:
    """Damped simultaneous best-response iteration.

    Starts from every firm at the price cap (zero supply) unless ``initial``
    is given. Non-convergence is reported through ``converged``, never raised.
    """
    options = options or SolverOptions()
    cap = scenario.price_cap
    if initial is None:
        p = [cap] * scenario.n_firms
    else:
        p = check_breakpoints(initial, scenario.demand)
    lam = options.damping
    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, options.max_iterations + 1):
        br = best_response_profile(p, scenario)
        residual = max(abs(r - x) for r, x in zip(br, p))
        if residual <= options.tolerance:
            converged = True
            break
        p = [min(max((1.0 - lam) * x + lam * r, 0.0), cap) for x, r in zip(p, br)]
    outcome = profile_outcome(p, scenario.lipschitz_K, scenario.demand, scenario.firms)
    return EquilibriumResult(
        breakpoints=tuple(p),
        clearing_price=outcome.clearing_price_p_star,
        utilities=outcome.utilities_u,
        iterations=iterations,
        converged=converged,
        residual=residual,
    )


def _thread_count() -> int:
    return max(1, int(os.environ.get("PAB_SFE_THREADS", "1")))


def multi_start(
    scenario: Scenario,
    starts: int,
    seed: int,
    options: SolverOptions | None = None,
    threads: int | None = None,
) -> list[EquilibriumResult]:
    """Run the solver from ``starts`` seeded uniform random initial profiles.

    Results come back in start order regardless of thread count, so the output
    is reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    inits = rng.uniform(0.0, scenario.price_cap, size=(starts, scenario.n_firms))
    threads = threads or _thread_count()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda x0: find_equilibrium(scenario, options, x0), inits))


def distinct_equilibria(results: Sequence[EquilibriumResult], atol: float = 1e-6) -> list[EquilibriumResult]:
    """Converged results with pairwise-distinct breakpoint profiles."""
    out: list[EquilibriumResult] = []
    for r in results:
        if not r.converged:
            continue
        if all(np.max(np.abs(np.subtract(r.breakpoints, o.breakpoints))) > atol for o in out):
            out.append(r)
    return out


def verify_nash(
    breakpoints: Sequence[float],
    scenario: Scenario,
    epsilon: float = 1e-2,
    deviation_grid_size: int = 10_000,
) -> NashCertificate:
    """Largest unilateral gain per firm over the exact best response and a deviation grid."""
    b = check_breakpoints(breakpoints, scenario.demand)
    K, demand = scenario.lipschitz_K, scenario.demand
    grid = np.linspace(0.0, scenario.price_cap, deviation_grid_size)
    gains, deviations = [], []
    for i, firm in enumerate(scenario.firms):
        others = np.delete(b, i)
        stay = restricted_utility(b[i], others, K, demand, firm)
        br = best_response(i, others, K, demand, firm)
        values = restricted_utility_batch(grid, others, K, demand, firm)
        k = int(np.argmax(values))
        if br.best_utility >= values[k]:
            gain, dev = br.best_utility - stay, br.best_breakpoint
        else:
            gain, dev = float(values[k]) - stay, float(grid[k])
        gains.append(float(gain))
        deviations.append(float(dev))
    return NashCertificate(
        epsilon=epsilon,
        per_firm_max_gain=tuple(gains),
        deviation_grid_size=deviation_grid_size,
        passed=max(gains) <= epsilon,
        per_firm_best_deviation=tuple(deviations),
    )


def verify_nash_general(
    breakpoints: Sequence[float],
    scenario: Scenario,
    epsilon: float,
    deviations_per_firm: int = 200,
    seed: int = 0,
    n_nodes: int = 8,
) -> NashCertificate:
    """Certificate against random K-Lipschitz piecewise-linear deviations.

    Opponents keep their kinked offers; the deviating firm may bid any curve in
    the Lipschitz class, and the market is cleared by bisection.
    """
    b = check_breakpoints(breakpoints, scenario.demand)
    K, demand, cap = scenario.lipschitz_K, scenario.demand, scenario.price_cap
    rng = np.random.default_rng(seed)
    curves = [KinkedOffer(x, K).to_supply_curve(cap) for x in b]
    p_star = clear_market_kinked(b, K, demand)
    gains = []
    for i, firm in enumerate(scenario.firms):
        stay = pab_utility_general(curves[i], p_star, firm).utility
        best_gain = -np.inf
        for _ in range(deviations_per_firm):
            dev = random_supply_curve(rng, cap, slope_K=K, n_nodes=n_nodes)
            field_ = curves[:i] + [dev] + curves[i + 1 :]
            price = clear_market_general(field_, demand)
            best_gain = max(best_gain, pab_utility_general(dev, price, firm).utility - stay)
        gains.append(float(best_gain))
    return NashCertificate(
        epsilon=epsilon,
        per_firm_max_gain=tuple(gains),
        deviation_grid_size=deviations_per_firm,
        passed=max(gains) <= epsilon,
    )

