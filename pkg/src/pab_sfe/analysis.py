"""Structural checks on the pay-as-bid game.

* ``dominance_transform``: reshapes any non-zero curve into ``p -> S(p**2 / p*)``,
  which sells the same quantity at the same clearing price but bids lower
  below ``p*``, so pay-as-bid revenue strictly rises.
* ``kink_improvement``: replaces a K-Lipschitz curve with the kinked offer that
  matches it at the clearing price.
* ``increasing_differences_check``: samples the increasing-differences
  inequality that supermodularity requires.
* ``k_sweep``: equilibria across Lipschitz constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .equilibrium import SolverOptions, find_equilibrium
from .errors import DomainError, ValidationError
from .market import KinkedOffer, Scenario, SupplyCurve, check_breakpoints, clear_market_kinked
from .payoff import restricted_utility

DOMINANCE_EXTRA_NODES = 64
INCREASING_DIFF_SLACK = 1e-9


def dominance_transform(supply: SupplyCurve, clearing_price: float) -> SupplyCurve:
    """The curve ``p -> S(p**2 / clearing_price)`` on the same price range.

    Beyond the original range the argument is held at the last node, which
    keeps the result continuous and non-decreasing. The result is sampled at
    the preimages of the original nodes, ``DOMINANCE_EXTRA_NODES`` uniform
    points on ``[0, p*]`` and ``p*`` itself, where it equals ``S(p*)`` exactly.
    """
    if not clearing_price > 0.0:
        raise DomainError("dominance transform needs a positive clearing price")
    cap = supply.max_price
    if clearing_price > cap:
        raise DomainError(f"clearing price {clearing_price} exceeds the curve's range {cap}")
    preimages = np.sqrt(supply.prices * clearing_price)
    uniform = np.linspace(0.0, clearing_price, DOMINANCE_EXTRA_NODES + 2)
    prices = np.unique(np.concatenate([preimages, uniform, [clearing_price, cap]]))
    prices = prices[prices <= cap]
    quantities = np.asarray(supply.value_at(prices * prices / clearing_price))
    quantities[0] = 0.0
    quantities[prices == clearing_price] = supply.value_at(clearing_price)
    return SupplyCurve(prices, quantities)


def kink_improvement(supply: SupplyCurve, clearing_price: float, slope_K: float) -> KinkedOffer:
    """Kinked offer with slope ``slope_K`` selling ``S(p*)`` at ``p*``.

    Because ``S`` is K-Lipschitz and zero at zero, the kinked offer never
    exceeds ``S`` below ``p*`` and never falls short of it above.
    """
    if not supply.is_lipschitz(slope_K):
        raise ValidationError(f"supply curve slope {supply.max_slope} exceeds K = {slope_K}")
    if not 0.0 < clearing_price <= supply.max_price:
        raise DomainError(f"clearing price must lie in (0, {supply.max_price}], got {clearing_price}")
    breakpoint = clearing_price - supply.value_at(clearing_price) / slope_K
    return KinkedOffer(max(breakpoint, 0.0), slope_K)


@dataclass(frozen=True)
class Quadruple:
    """Own strategies ``own <= own_prime`` and opponent profiles ``others <= others_prime``."""

    own: float
    own_prime: float
    others: tuple[float, ...]
    others_prime: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "others", tuple(float(x) for x in self.others))
        object.__setattr__(self, "others_prime", tuple(float(x) for x in self.others_prime))
        if len(self.others) != len(self.others_prime):
            raise DomainError("opponent profiles must have equal length")
        if self.own_prime < self.own:
            raise DomainError(f"need own' >= own, got {self.own_prime} < {self.own}")
        if any(b < a for a, b in zip(self.others, self.others_prime)):
            raise DomainError("need others' >= others componentwise")


@dataclass(frozen=True)
class Violation:
    quadruple: Quadruple
    lhs: float
    rhs: float


@dataclass
class IncreasingDifferencesReport:
    tested_quadruples: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def is_supermodular_on_sample(self) -> bool:
        return not self.violations


def increasing_differences_sides(scenario: Scenario, firm_index: int, quad: Quadruple) -> tuple[float, float]:
    """Both sides of the increasing-differences inequality for one quadruple.

    ``lhs = u(own', others') - u(own, others')`` and
    ``rhs = u(own', others) - u(own, others)``.
    """
    firm = scenario.firms[firm_index]
    K, demand = scenario.lipschitz_K, scenario.demand

    def u(x, others):
        return restricted_utility(x, others, K, demand, firm)

    lhs = u(quad.own_prime, quad.others_prime) - u(quad.own, quad.others_prime)
    rhs = u(quad.own_prime, quad.others) - u(quad.own, quad.others)
    return lhs, rhs


def increasing_differences_check(
    scenario: Scenario,
    firm_index: int,
    sample: Iterable[Quadruple],
    slack: float = INCREASING_DIFF_SLACK,
) -> IncreasingDifferencesReport:
    """Evaluate the inequality on every quadruple and collect the violations."""
    report = IncreasingDifferencesReport()
    for quad in sample:
        if len(quad.others) != scenario.n_firms - 1:
            raise DomainError(f"quadruple has {len(quad.others)} opponents, scenario has {scenario.n_firms - 1}")
        check_breakpoints([quad.own, quad.own_prime, *quad.others, *quad.others_prime], scenario.demand)
        lhs, rhs = increasing_differences_sides(scenario, firm_index, quad)
        report.tested_quadruples += 1
        if lhs < rhs - slack:
            report.violations.append(Violation(quad, lhs, rhs))
    return report


def _profile(firm_index: int, own: float, others: Sequence[float]) -> list[float]:
    out = list(others)
    out.insert(firm_index, own)
    return out


def active_set(breakpoints: Sequence[float], scenario: Scenario) -> frozenset[int]:
    """Firms selling a positive quantity at the clearing price."""
    p_star = clear_market_kinked(breakpoints, scenario.lipschitz_K, scenario.demand)
    return frozenset(i for i, x in enumerate(breakpoints) if x < p_star)


def in_stable_region(scenario: Scenario, firm_index: int, quad: Quadruple) -> bool:
    """Firm sells at all four profiles and the number of active firms is the same at each."""
    sets = [
        active_set(_profile(firm_index, own, others), scenario)
        for own in (quad.own, quad.own_prime)
        for others in (quad.others, quad.others_prime)
    ]
    return all(firm_index in s for s in sets) and len({len(s) for s in sets}) == 1


def random_quadruples(scenario: Scenario, firm_index: int, count: int, seed: int) -> list[Quadruple]:
    """Uniformly drawn ordered quadruples over ``[0, p_hat]``."""
    rng = np.random.default_rng(seed)
    cap = scenario.price_cap
    m = scenario.n_firms - 1
    out = []
    for _ in range(count):
        own = np.sort(rng.uniform(0.0, cap, 2))
        lo = rng.uniform(0.0, cap, m)
        hi = lo + rng.uniform(0.0, 1.0, m) * (cap - lo)
        out.append(Quadruple(own[0], own[1], tuple(lo), tuple(hi)))
    return out


def grid_quadruples(scenario: Scenario, own_grid: Sequence[float], other_grid: Sequence[float]) -> list[Quadruple]:
    """All ordered pairs on a grid; opponents move together along ``other_grid``."""
    m = scenario.n_firms - 1
    own_grid = sorted(own_grid)
    other_grid = sorted(other_grid)
    return [
        Quadruple(a, a2, (b,) * m, (b2,) * m)
        for i, a in enumerate(own_grid)
        for a2 in own_grid[i + 1 :]
        for j, b in enumerate(other_grid)
        for b2 in other_grid[j + 1 :]
    ]


@dataclass(frozen=True)
class KSweepRow:
    K: float
    breakpoints: tuple[float, ...]
    clearing_price: float
    utilities: tuple[float, ...]
    converged: bool
    iterations: int
    residual: float


def k_sweep(base_scenario: Scenario, K_values: Sequence[float], options: SolverOptions | None = None) -> list[KSweepRow]:
    """Equilibrium for each Lipschitz constant, in input order."""
    K_values = [float(k) for k in K_values]
    if not K_values:
        raise ValidationError("need at least one K value")
    if any(not k > 0 for k in K_values):
        raise ValidationError("K values must be positive")
    if len(set(K_values)) != len(K_values):
        raise ValidationError("K values must be distinct")
    rows = []
    for K in K_values:
        res = find_equilibrium(base_scenario.with_K(K), options)
        rows.append(
            KSweepRow(K, res.breakpoints, res.clearing_price, res.utilities, res.converged, res.iterations, res.residual)
        )
    return rows
