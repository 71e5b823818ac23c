"""Pay-as-bid utilities.

A firm bidding supply curve ``S`` is paid its own bid for every unit sold, so
revenue is ``p* S(p*) - int_0^{p*} S(p) dp`` and utility subtracts the
quadratic production cost of the quantity ``S(p*)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .market import Demand, Firm, MarketOutcome, SupplyCurve, clear_market_kinked, clear_market_kinked_batch


@dataclass(frozen=True)
class UtilityBreakdown:
    revenue: float
    cost: float
    utility: float

    @classmethod
    def from_parts(cls, revenue: float, cost: float) -> "UtilityBreakdown":
        return cls(revenue=revenue, cost=cost, utility=revenue - cost)


def pab_utility_general(supply: SupplyCurve, clearing_price: float, firm: Firm) -> UtilityBreakdown:
    """Utility of bidding ``supply`` when the market clears at ``clearing_price``.

    The integral is exact on the piecewise-linear representation.

    Raises:
        DomainError: if ``clearing_price`` is outside the curve's price range.
    """
    if not 0.0 <= clearing_price <= supply.max_price * (1 + 1e-12):
        raise DomainError(f"clearing price {clearing_price} outside [0, {supply.max_price}]")
    quantity = supply.value_at(clearing_price)
    revenue = clearing_price * quantity - supply.integral(clearing_price)
    return UtilityBreakdown.from_parts(revenue, float(firm.cost_at(quantity)))


def kinked_utility(own_breakpoint: float, clearing_price: float, slope_K: float, cost_coeff: float) -> float:
    """Closed-form utility of a kinked offer at a known clearing price."""
    q = slope_K * max(clearing_price - own_breakpoint, 0.0)
    return float(clearing_price * q - q * q / (2.0 * slope_K) - cost_coeff * q * q)


def restricted_utility(
    own_breakpoint: float,
    other_breakpoints: Sequence[float],
    slope_K: float,
    demand: Demand,
    firm: Firm,
) -> float:
    """Utility in the game over breakpoints: clear the market, then evaluate in closed form."""
    p_star = clear_market_kinked([own_breakpoint, *other_breakpoints], slope_K, demand)
    return kinked_utility(own_breakpoint, p_star, slope_K, firm.cost_coeff_c)


def restricted_utility_batch(
    own_breakpoints: np.ndarray,
    other_breakpoints: Sequence[float],
    slope_K: float,
    demand: Demand,
    firm: Firm,
) -> np.ndarray:
    """``restricted_utility`` evaluated at many own breakpoints at once."""
    x = np.asarray(own_breakpoints, dtype=float)
    p_star = clear_market_kinked_batch(x, other_breakpoints, slope_K, demand)
    q = slope_K * np.maximum(p_star - x, 0.0)
    return p_star * q - q * q / (2.0 * slope_K) - firm.cost_coeff_c * q * q


def profile_outcome(
    breakpoints: Sequence[float], slope_K: float, demand: Demand, firms: Sequence[Firm]
) -> MarketOutcome:
    """Clearing price, quantities and utilities for a full breakpoint profile."""
    b = [float(x) for x in breakpoints]
    p_star = clear_market_kinked(b, slope_K, demand)
    quantities = tuple(slope_K * max(p_star - x, 0.0) for x in b)
    utilities = tuple(kinked_utility(x, p_star, slope_K, f.cost_coeff_c) for x, f in zip(b, firms))
    return MarketOutcome(p_star, quantities, utilities)
