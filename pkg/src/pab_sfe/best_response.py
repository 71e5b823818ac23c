"""Best responses in the game over kinked-offer breakpoints.

Against fixed opponents, the clearing price is a continuous, piecewise-affine,
non-decreasing function of the firm's own breakpoint ``x``. On each piece the
set of active opponents is fixed, ``p*`` and the sold quantity are affine in
``x``, and utility is a concave quadratic, so each piece is maximised exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .market import Demand, Firm, check_breakpoints
from .payoff import restricted_utility, restricted_utility_batch

log = logging.getLogger(__name__)

GOLDEN_MAX_ITER = 200
GOLDEN_REL_TOL = 1e-12
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SegmentDiagnostic:
    active_opponents: int
    interval: tuple[float, float]
    optimum_breakpoint: float
    optimum_utility: float


@dataclass(frozen=True)
class BestResponseResult:
    best_breakpoint: float
    best_utility: float
    segment_diagnostics: list[SegmentDiagnostic] = field(default_factory=list)


@dataclass(frozen=True)
class _Segment:
    active: int
    lo: float
    hi: float
    # p* = price_const + price_slope * x ; q = qty_const + qty_slope * x
    price_const: float
    price_slope: float
    qty_const: float
    qty_slope: float


def _active_segments(other_breakpoints: Sequence[float], slope_K: float, demand: Demand) -> list[_Segment]:
    """Pieces of ``[0, p_hat]`` on which the firm sells and the active opponent set is fixed."""
    N, gamma, cap = demand.intercept_N, demand.slope_gamma, demand.price_cap
    K = slope_K
    b = sorted(float(x) for x in other_breakpoints)
    segments = []
    S = 0.0
    for m in range(len(b) + 1):
        if m > 0:
            S += b[m - 1]
        M = gamma + K * (m + 1)
        # p* must lie between the m-th and (m+1)-th opponent breakpoints
        lo = 0.0 if m == 0 else (M * b[m - 1] - N - K * S) / K
        hi = cap
        if m < len(b):
            hi = min(hi, (M * b[m] - N - K * S) / K)
        # own quantity positive: x < p*, i.e. x < (N + K S) / (gamma + K m)
        hi = min(hi, (N + K * S) / (gamma + K * m))
        lo = max(lo, 0.0)
        if lo > hi:
            continue
        segments.append(
            _Segment(
                active=m,
                lo=lo,
                hi=hi,
                price_const=(N + K * S) / M,
                price_slope=K / M,
                qty_const=K * (N + K * S) / M,
                qty_slope=-K * (gamma + K * m) / M,
            )
        )
    return segments


def _segment_argmax(seg: _Segment, slope_K: float, cost_coeff: float) -> float:
    # u(x) = p*(x) q(x) - w q(x)^2, strictly concave on the segment
    w = 1.0 / (2.0 * slope_K) + cost_coeff
    a, b_ = seg.price_const, seg.price_slope
    d, e = seg.qty_const, seg.qty_slope
    quad = b_ * e - w * e * e
    lin = a * e + b_ * d - 2.0 * w * d * e
    x = -lin / (2.0 * quad)
    return min(max(x, seg.lo), seg.hi)


def _pick(candidates: list[tuple[float, float]]) -> tuple[float, float]:
    """Highest utility; ties go to the larger breakpoint."""
    return max(candidates, key=lambda c: (c[1], c[0]))


def best_response(
    firm_index: int,
    other_breakpoints: Sequence[float],
    slope_K: float,
    demand: Demand,
    firm: Firm,
) -> BestResponseResult:
    """Exact maximiser of the firm's utility over its breakpoint in ``[0, p_hat]``.

    ``firm_index`` only labels the call; ``firm`` carries the cost.
    """
    others = check_breakpoints(other_breakpoints, demand) if len(other_breakpoints) else []
    K, cap, w = slope_K, demand.price_cap, 1.0 / (2.0 * slope_K) + firm.cost_coeff_c

    # not selling at all: utility exactly 0 anywhere at or above the opponents' price
    candidates = [(cap, 0.0)]
    diagnostics = []
    for seg in _active_segments(others, K, demand):
        x_opt = _segment_argmax(seg, K, firm.cost_coeff_c)
        # the segment ends guard against clamping round-off
        for x in (x_opt, seg.lo, seg.hi):
            p_star = seg.price_const + seg.price_slope * x
            q = max(seg.qty_const + seg.qty_slope * x, 0.0)
            candidates.append((x, p_star * q - w * q * q))
        diagnostics.append(SegmentDiagnostic(seg.active, (seg.lo, seg.hi), x_opt, candidates[-3][1]))
    x, _ = _pick(candidates)
    val = restricted_utility(x, others, K, demand, firm)
    return BestResponseResult(float(x), float(val), diagnostics)


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = GOLDEN_MAX_ITER):
    """Golden-section search for the maximum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = max([(a, f(a)), (b, f(b)), (c, fc), (d, fd)], key=lambda t: t[1])
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc > best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd > best[1]:
                best = (d, fd)
    return best


def best_response_grid_oracle(
    firm_index: int,
    other_breakpoints: Sequence[float],
    slope_K: float,
    demand: Demand,
    firm: Firm,
    grid_points: int = 10_000,
) -> BestResponseResult:
    """Brute-force best response: dense grid, then golden-section refinement."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    others = np.asarray(other_breakpoints, dtype=float)
    cap = demand.price_cap
    extra = [x for seg in _active_segments(others, slope_K, demand) for x in (seg.lo, seg.hi)]
    grid = np.unique(np.concatenate([np.linspace(0.0, cap, grid_points), extra]))
    values = restricted_utility_batch(grid, others, slope_K, demand, firm)
    k = int(np.argmax(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]

    def u(x: float) -> float:
        return restricted_utility(x, others, slope_K, demand, firm)

    x_ref, _ = golden_section_max(u, lo, hi, tol=GOLDEN_REL_TOL * max(cap, 1.0))
    candidates = [(float(grid[k]), u(float(grid[k]))), (x_ref, u(x_ref))]
    x, val = _pick(candidates)
    return BestResponseResult(float(x), float(val))


@dataclass(frozen=True)
class UnimodalityFinding:
    breakpoint: float
    utility: float
    global_max: float


def unimodality_audit(
    other_breakpoints: Sequence[float],
    slope_K: float,
    demand: Demand,
    firm: Firm,
    grid_points: int = 1000,
    noise: float = 1e-9,
) -> list[UnimodalityFinding]:
    """Strict interior local maxima of the utility other than the global one.

    Findings are logged, not raised: quasi-concavity is a claim being audited.
    """
    grid = np.linspace(0.0, demand.price_cap, grid_points)
    u = restricted_utility_batch(grid, other_breakpoints, slope_K, demand, firm)
    top = float(u.max())
    findings = []
    # collapse plateaus before looking for peaks
    keep = np.concatenate([[True], np.abs(np.diff(u)) > noise])
    xs, us = grid[keep], u[keep]
    for k in range(1, us.size - 1):
        if us[k] > us[k - 1] + noise and us[k] > us[k + 1] + noise and us[k] < top - noise:
            findings.append(UnimodalityFinding(float(xs[k]), float(us[k]), top))
    for f in findings:
        log.warning("non-global local maximum at breakpoint %.6g: %.6g < %.6g", f.breakpoint, f.utility, f.global_max)
    return findings
