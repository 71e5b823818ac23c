"""Market primitives and the clearing price of a supply-function auction.

Demand is linear, ``D(p) = N - gamma * p``, with price cap ``p_hat = N / gamma``.
Firms bid non-decreasing supply curves that vanish at zero price; the market
clears at the unique price where demand meets total supply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, ValidationError

# relative slack for monotonicity / Lipschitz / range checks on round-tripped floats
REL_SLACK = 1e-12

BISECTION_XTOL = 1e-10
BISECTION_MAXITER = 200


def _slack(scale: float) -> float:
    return REL_SLACK * max(1.0, abs(scale))


@dataclass(frozen=True)
class Demand:
    intercept_N: float
    slope_gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.intercept_N) and math.isfinite(self.slope_gamma)):
            raise ValidationError("demand parameters must be finite")
        if self.slope_gamma <= 0:
            raise ValidationError(f"demand slope gamma must be > 0, got {self.slope_gamma}")
        if self.intercept_N < 0:
            raise ValidationError(f"demand intercept N must be >= 0, got {self.intercept_N}")

    @property
    def price_cap(self) -> float:
        """Price at which demand vanishes."""
        return self.intercept_N / self.slope_gamma

    def demand_at(self, price):
        # exact zero at the cap, not N - gamma * (N / gamma)
        price = np.asarray(price, dtype=float)
        out = self.intercept_N - self.slope_gamma * price
        out = np.where(price == self.price_cap, 0.0, out)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Firm:
    id: int
    cost_coeff_c: float

    def __post_init__(self):
        if not math.isfinite(self.cost_coeff_c) or self.cost_coeff_c < 0:
            raise ValidationError(f"firm {self.id}: cost coefficient must be >= 0, got {self.cost_coeff_c}")

    def cost_at(self, quantity):
        return self.cost_coeff_c * quantity * quantity


@dataclass(frozen=True)
class KinkedOffer:
    """The offer ``S(p) = K * max(p - breakpoint, 0)``."""

    breakpoint_p: float
    slope_K: float

    def __post_init__(self):
        if not self.slope_K > 0:
            raise ValidationError(f"slope K must be > 0, got {self.slope_K}")
        if self.breakpoint_p < 0:
            raise DomainError(f"breakpoint must be >= 0, got {self.breakpoint_p}")

    def value_at(self, price):
        return self.slope_K * np.maximum(np.asarray(price, dtype=float) - self.breakpoint_p, 0.0)

    def to_supply_curve(self, price_cap: float) -> "SupplyCurve":
        """Exact piecewise-linear encoding on ``[0, price_cap]``."""
        b = min(self.breakpoint_p, price_cap)
        if b <= 0.0 or b >= price_cap:
            prices = [0.0, price_cap]
        else:
            prices = [0.0, b, price_cap]
        quantities = [self.slope_K * max(p - self.breakpoint_p, 0.0) for p in prices]
        return SupplyCurve(np.array(prices), np.array(quantities))


@dataclass(frozen=True, eq=False)
class SupplyCurve:
    """Piecewise-linear supply curve through ``(price, quantity)`` nodes.

    The first node must be ``(0, 0)``; node prices strictly increase and
    quantities never decrease. Arrays are stored read-only.
    """

    prices: np.ndarray
    quantities: np.ndarray
    _slopes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        quantities = np.array(self.quantities, dtype=float)
        if prices.ndim != 1 or prices.shape != quantities.shape or prices.size < 2:
            raise ValidationError("supply curve needs matching 1-d node arrays with at least two nodes")
        if not (np.all(np.isfinite(prices)) and np.all(np.isfinite(quantities))):
            raise ValidationError("supply curve nodes must be finite")
        if prices[0] != 0.0 or quantities[0] != 0.0:
            raise ValidationError("supply curve must start at node (0, 0)")
        if np.any(np.diff(prices) <= 0):
            raise ValidationError("supply curve node prices must be strictly increasing")
        dq = np.diff(quantities)
        if np.any(dq < -_slack(quantities.max())):
            raise ValidationError("supply curve quantities must be non-decreasing")
        # absorb slack-level dips so downstream maths sees a monotone curve
        quantities = np.maximum.accumulate(quantities)
        prices.flags.writeable = False
        quantities.flags.writeable = False
        slopes = np.diff(quantities) / np.diff(prices)
        slopes.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "quantities", quantities)
        object.__setattr__(self, "_slopes", slopes)

    @classmethod
    def zero(cls, price_cap: float) -> "SupplyCurve":
        return cls(np.array([0.0, price_cap]), np.array([0.0, 0.0]))

    @property
    def max_price(self) -> float:
        return float(self.prices[-1])

    @property
    def max_slope(self) -> float:
        return float(self._slopes.max())

    def value_at(self, price):
        """Evaluate the curve; held constant beyond the last node."""
        out = np.interp(price, self.prices, self.quantities)
        return float(out) if np.ndim(out) == 0 else out

    def is_lipschitz(self, slope_K: float) -> bool:
        return self.max_slope <= slope_K * (1.0 + REL_SLACK)

    def is_zero(self) -> bool:
        return bool(np.all(self.quantities == 0.0))

    def integral(self, upper: float) -> float:
        """Exact integral of the curve over ``[0, upper]``."""
        if upper <= 0.0:
            return 0.0
        p, q = self.prices, self.quantities
        k = int(np.searchsorted(p, upper, side="right"))
        total = float(np.sum(0.5 * (q[1:k] + q[: k - 1]) * np.diff(p[:k])))
        if k < p.size:
            total += 0.5 * (q[k - 1] + self.value_at(upper)) * (upper - p[k - 1])
        else:
            total += q[-1] * (upper - p[-1])
        return total

    def price_weighted_integral(self, upper: float) -> float:
        """Exact ``int_0^upper p * S'(p) dp`` for the piecewise-linear curve."""
        p = self.prices
        lo = p[:-1]
        hi = np.minimum(p[1:], upper)
        mask = hi > lo
        return float(np.sum(self._slopes[mask] * (hi[mask] ** 2 - lo[mask] ** 2) / 2.0))

    def validate_for(self, demand: Demand, slope_K: float | None = None) -> None:
        """Check the curve covers ``[0, p_hat]`` and, if given, the K-Lipschitz bound."""
        cap = demand.price_cap
        if abs(self.max_price - cap) > _slack(cap):
            raise ValidationError(f"supply curve must end at the price cap {cap}, ends at {self.max_price}")
        if slope_K is not None and not self.is_lipschitz(slope_K):
            raise ValidationError(f"supply curve slope {self.max_slope} exceeds K = {slope_K}")


@dataclass(frozen=True)
class MarketOutcome:
    clearing_price_p_star: float
    quantities_q: tuple[float, ...]
    utilities_u: tuple[float, ...]


@dataclass(frozen=True)
class Scenario:
    demand: Demand
    firms: tuple[Firm, ...]
    lipschitz_K: float

    def __post_init__(self):
        object.__setattr__(self, "firms", tuple(self.firms))
        if not self.firms:
            raise ValidationError("scenario needs at least one firm")
        if not (math.isfinite(self.lipschitz_K) and self.lipschitz_K > 0):
            raise ValidationError(f"Lipschitz constant K must be > 0, got {self.lipschitz_K}")

    @property
    def n_firms(self) -> int:
        return len(self.firms)

    @property
    def price_cap(self) -> float:
        return self.demand.price_cap

    def with_K(self, slope_K: float) -> "Scenario":
        return Scenario(self.demand, self.firms, slope_K)


def check_breakpoints(breakpoints: Sequence[float], demand: Demand) -> list[float]:
    """Validate breakpoints against ``[0, p_hat]``; values within slack of the cap are snapped to it."""
    b = [float(x) for x in breakpoints]
    if not b:
        raise DomainError("need at least one breakpoint")
    cap = demand.price_cap
    if not all(math.isfinite(x) for x in b):
        raise DomainError("breakpoints must be finite")
    if min(b) < 0.0 or max(b) > cap + _slack(cap):
        raise DomainError(f"breakpoints must lie in [0, {cap}], got {b}")
    return [min(x, cap) for x in b]


def kinked_excess_demand(price: float, breakpoints, slope_K: float, demand: Demand) -> float:
    """``D(p) - K * sum_i max(p - p_i, 0)``."""
    return demand.demand_at(price) - slope_K * sum(max(price - x, 0.0) for x in breakpoints)


def clear_market_kinked(breakpoints: Sequence[float], slope_K: float, demand: Demand) -> float:
    """Clearing price when every firm bids a kinked offer with slope ``slope_K``.

    Scans the segments between sorted breakpoints. On the segment where the
    ``k`` lowest breakpoints are active the price solves
    ``N - gamma p = K (k p - sum of active breakpoints)`` in closed form.
    The first segment whose upper end already has non-positive excess demand
    contains the root.
    """
    if not slope_K > 0:
        raise DomainError(f"slope K must be > 0, got {slope_K}")
    b = sorted(check_breakpoints(breakpoints, demand))
    N, gamma, cap = demand.intercept_N, demand.slope_gamma, demand.price_cap
    n = len(b)
    active_sum = 0.0
    lower = 0.0
    for k in range(n + 1):
        if k > 0:
            active_sum += b[k - 1]
            lower = b[k - 1]
        upper = b[k] if k < n else cap
        # breakpoints below `upper` are exactly the first k (ties add zero)
        if k == n or N - gamma * upper - slope_K * (k * upper - active_sum) <= 0.0:
            candidate = (N + slope_K * active_sum) / (gamma + slope_K * k)
            return min(max(candidate, lower), upper)
    raise AssertionError("unreachable")


def clearing_candidates(breakpoints: Sequence[float], slope_K: float, demand: Demand, tol: float = 1e-9) -> list[float]:
    """All segment solutions consistent with their own active set (within ``tol``).

    Used to audit uniqueness of the clearing price.
    """
    b = np.sort(check_breakpoints(breakpoints, demand))
    N, gamma, cap = demand.intercept_N, demand.slope_gamma, demand.price_cap
    out: list[float] = []
    for k in range(b.size + 1):
        lower = b[k - 1] if k > 0 else 0.0
        upper = b[k] if k < b.size else cap
        candidate = (N + slope_K * b[:k].sum()) / (gamma + slope_K * k)
        if lower - tol <= candidate <= upper + tol:
            out.append(float(candidate))
    return out


def clear_market_kinked_batch(own: np.ndarray, others: Sequence[float], slope_K: float, demand: Demand) -> np.ndarray:
    """Vectorised clearing price for many values of one firm's breakpoint.

    ``own`` holds candidate breakpoints for a single firm; ``others`` are the
    fixed breakpoints of the remaining firms.
    """
    own = np.asarray(own, dtype=float)
    others = np.asarray(others, dtype=float)
    N, gamma, cap = demand.intercept_N, demand.slope_gamma, demand.price_cap
    b = np.sort(np.column_stack([own, np.broadcast_to(others, (own.size, others.size))]), axis=1)
    n = b.shape[1]
    cums = np.concatenate([np.zeros((own.size, 1)), np.cumsum(b, axis=1)], axis=1)
    lowers = np.concatenate([np.zeros((own.size, 1)), b], axis=1)
    uppers = np.concatenate([b, np.full((own.size, 1), cap)], axis=1)
    ks = np.arange(n + 1)
    excess = N - gamma * uppers - slope_K * (ks * uppers - cums)
    excess[:, n] = -np.inf
    first = np.argmax(excess <= 0.0, axis=1)
    rows = np.arange(own.size)
    cand = (N + slope_K * cums[rows, first]) / (gamma + slope_K * first)
    return np.clip(cand, lowers[rows, first], uppers[rows, first])


def clear_market_general(supplies: Sequence[SupplyCurve], demand: Demand) -> float:
    """Clearing price for arbitrary supply curves, by bisection on ``[0, p_hat]``."""
    if not supplies:
        raise DomainError("need at least one supply curve")
    for s in supplies:
        s.validate_for(demand)
    cap = demand.price_cap

    def excess(price: float) -> float:
        return demand.demand_at(price) - sum(s.value_at(price) for s in supplies)

    if cap == 0.0 or excess(cap) >= 0.0:
        return cap
    return bisect(excess, 0.0, cap, xtol=BISECTION_XTOL, maxiter=BISECTION_MAXITER)


def random_supply_curve(
    rng: np.random.Generator,
    price_cap: float,
    slope_K: float | None = None,
    n_nodes: int = 8,
    max_slope: float = 10.0,
) -> SupplyCurve:
    """Random monotone piecewise-linear curve on ``[0, price_cap]``.

    With ``slope_K`` the chord slopes are drawn in ``[0, slope_K]`` so the
    curve belongs to the K-Lipschitz class; otherwise slopes go up to ``max_slope``.
    """
    inner = np.sort(rng.uniform(0.0, price_cap, size=max(n_nodes - 2, 0)))
    prices = np.unique(np.concatenate([[0.0], inner, [price_cap]]))
    top = slope_K if slope_K is not None else max_slope
    slopes = rng.uniform(0.0, top, size=prices.size - 1)
    # occasional flat pieces exercise the non-strict part of monotonicity
    slopes[rng.random(slopes.size) < 0.2] = 0.0
    quantities = np.concatenate([[0.0], np.cumsum(slopes * np.diff(prices))])
    return SupplyCurve(prices, quantities)
