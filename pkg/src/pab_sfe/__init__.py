"""Pay-as-bid auctions with K-Lipschitz supply functions: clearing, utilities, best responses, equilibria."""

__version__ = "0.1.0"

from .analysis import (
    IncreasingDifferencesReport,
    KSweepRow,
    Quadruple,
    dominance_transform,
    increasing_differences_check,
    k_sweep,
    kink_improvement,
)
from .best_response import BestResponseResult, best_response, best_response_grid_oracle
from .equilibrium import (
    EquilibriumResult,
    NashCertificate,
    SolverOptions,
    find_equilibrium,
    multi_start,
    verify_nash,
    verify_nash_general,
)
from .errors import DomainError, PabError, ValidationError
from .market import (
    Demand,
    Firm,
    KinkedOffer,
    MarketOutcome,
    Scenario,
    SupplyCurve,
    clear_market_general,
    clear_market_kinked,
)
from .payoff import UtilityBreakdown, pab_utility_general, restricted_utility
