"""Command-line front end.

Exit codes: 0 success (including a reported non-convergence), 2 parse or
validation error, 3 domain error, 4 I/O error.

Environment overrides: ``PAB_SFE_TOLERANCE`` (solver tolerance, below the
command-line flag but above the scenario file) and ``PAB_SFE_THREADS``
(worker threads for multi-start runs).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import (
    Quadruple,
    dominance_transform,
    grid_quadruples,
    in_stable_region,
    increasing_differences_check,
    increasing_differences_sides,
    k_sweep,
    kink_improvement,
    random_quadruples,
)
from .equilibrium import SolverOptions, distinct_equilibria, find_equilibrium, multi_start, verify_nash, verify_nash_general
from .errors import DomainError, ValidationError
from .market import KinkedOffer, clear_market_general, random_supply_curve
from .payoff import pab_utility_general, profile_outcome
from .scenario_io import PRESETS, ResultRecord, ScenarioFile, load_preset, load_scenario, scenario_echo

log = logging.getLogger("pab_sfe")

EXIT_OK, EXIT_VALIDATION, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4


def fmt(x: float) -> str:
    return f"{x:.6g}"


def _table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in header]] + [[c if isinstance(c, str) else fmt(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _scenario_file(args) -> ScenarioFile:
    for name in PRESETS:
        if getattr(args, "preset_" + name.replace("-", "_"), False):
            return load_preset(name)
    if args.preset:
        return load_preset(args.preset)
    if not args.scenario:
        raise ValidationError("a scenario file or preset is required")
    return load_scenario(args.scenario)


def _solver_options(args, sf: ScenarioFile) -> SolverOptions:
    kw = {k: v for k, v in sf.solver.items() if k in ("tolerance", "max_iterations", "damping")}
    if os.environ.get("PAB_SFE_TOLERANCE"):
        try:
            kw["tolerance"] = float(os.environ["PAB_SFE_TOLERANCE"])
        except ValueError:
            raise ValidationError("PAB_SFE_TOLERANCE must be a number") from None
    for key in ("tolerance", "max_iterations", "damping"):
        value = getattr(args, key, None)
        if value is not None:
            kw[key] = value
    try:
        return SolverOptions(**kw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _emit(args, record: ResultRecord, table: str) -> None:
    if args.json:
        print(record.to_json())
    else:
        print(table)
    if args.record:
        Path(args.record).write_text(record.to_json() + "\n")


def _cert_dict(cert) -> dict:
    return {
        "epsilon": cert.epsilon,
        "per_firm_max_gain": list(cert.per_firm_max_gain),
        "deviation_grid_size": cert.deviation_grid_size,
        "passed": cert.passed,
    }


def cmd_clear(args) -> int:
    sf = _scenario_file(args)
    sc = sf.scenario
    if args.all_at_cap:
        breakpoints = [sc.price_cap] * sc.n_firms
    elif args.breakpoints is not None:
        breakpoints = args.breakpoints
    elif sf.breakpoints is not None:
        breakpoints = list(sf.breakpoints)
    else:
        raise ValidationError("clear needs --breakpoints, --all-at-cap or a 'breakpoints' entry in the scenario")
    if len(breakpoints) != sc.n_firms:
        raise ValidationError(f"got {len(breakpoints)} breakpoints for {sc.n_firms} firms")
    out = profile_outcome(breakpoints, sc.lipschitz_K, sc.demand, sc.firms)
    demand_at = sc.demand.demand_at(out.clearing_price_p_star)
    record = ResultRecord(
        command="clear",
        inputs={"scenario": scenario_echo(sf), "breakpoints": list(map(float, breakpoints))},
        outputs={
            "clearing_price": out.clearing_price_p_star,
            "quantities": list(out.quantities_q),
            "utilities": list(out.utilities_u),
            "demand_at_clearing": demand_at,
            "total_supply": sum(out.quantities_q),
        },
    )
    rows = [(str(i + 1), b, q, u) for i, (b, q, u) in enumerate(zip(breakpoints, out.quantities_q, out.utilities_u))]
    table = "\n".join(
        [
            f"p* = {fmt(out.clearing_price_p_star)}   D(p*) = {fmt(demand_at)}   total supply = {fmt(sum(out.quantities_q))}",
            _table(["firm", "breakpoint", "quantity", "utility"], rows),
        ]
    )
    _emit(args, record, table)
    return EXIT_OK


def cmd_solve(args) -> int:
    sf = _scenario_file(args)
    sc = sf.scenario
    options = _solver_options(args, sf)
    res = find_equilibrium(sc, options)
    cert = verify_nash(res.breakpoints, sc, args.epsilon, args.grid)
    outcome = profile_outcome(res.breakpoints, sc.lipschitz_K, sc.demand, sc.firms)
    outputs = {
        "breakpoints": list(res.breakpoints),
        "clearing_price": res.clearing_price,
        "quantities": list(outcome.quantities_q),
        "utilities": list(res.utilities),
        "certificate": _cert_dict(cert),
    }
    diagnostics = {"converged": res.converged, "iterations": res.iterations, "residual": res.residual}
    lines = []
    if args.multi_start:
        seed = args.seed if args.seed is not None else sf.solver.get("seed", 0)
        runs = multi_start(sc, args.multi_start, seed, options)
        distinct = distinct_equilibria(runs)
        outputs["multi_start"] = {
            "seed": seed,
            "starts": [
                {"breakpoints": list(r.breakpoints), "converged": r.converged, "iterations": r.iterations} for r in runs
            ],
            "distinct_equilibria": [list(r.breakpoints) for r in distinct],
        }
        lines.append(
            f"multi-start: {len(runs)} starts (seed {seed}), "
            f"{sum(r.converged for r in runs)} converged, {len(distinct)} distinct equilibria"
        )
    record = ResultRecord("solve", {"scenario": scenario_echo(sf), "options": asdict(options)}, outputs, diagnostics)
    rows = [
        (str(i + 1), f.cost_coeff_c, b, q, u, g)
        for i, (f, b, q, u, g) in enumerate(
            zip(sc.firms, res.breakpoints, outcome.quantities_q, res.utilities, cert.per_firm_max_gain)
        )
    ]
    head = (
        f"K = {fmt(sc.lipschitz_K)}   p* = {fmt(res.clearing_price)}   converged = {res.converged}"
        f"   iterations = {res.iterations}   residual = {res.residual:.3g}"
    )
    verdict = f"Nash certificate (epsilon {fmt(cert.epsilon)}, grid {cert.deviation_grid_size}): " + (
        "PASSED" if cert.passed else "FAILED"
    )
    table = "\n".join([head, _table(["firm", "c", "breakpoint", "quantity", "utility", "max gain"], rows), verdict, *lines])
    _emit(args, record, table)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sf = _scenario_file(args)
    sc = sf.scenario
    options = _solver_options(args, sf)
    rows = k_sweep(sc, args.K, options)
    n = sc.n_firms
    header = ["K", "p_star", "converged", "iterations", "residual"]
    header += [f"p_{i + 1}" for i in range(n)] + [f"u_{i + 1}" for i in range(n)]
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=args.delimiter)
        writer.writerow(header)
        for r in rows:
            writer.writerow(
                [repr(r.K), repr(r.clearing_price), int(r.converged), r.iterations, repr(r.residual)]
                + [repr(x) for x in r.breakpoints]
                + [repr(x) for x in r.utilities]
            )
    record = ResultRecord(
        "sweep",
        {"scenario": scenario_echo(sf), "K": list(args.K), "output": str(args.output)},
        {
            "rows": [
                {
                    "K": r.K,
                    "clearing_price": r.clearing_price,
                    "breakpoints": list(r.breakpoints),
                    "utilities": list(r.utilities),
                    "converged": r.converged,
                }
                for r in rows
            ]
        },
    )
    table_rows = [(r.K, r.clearing_price, str(r.converged), *r.breakpoints, *r.utilities) for r in rows]
    th = ["K", "p*", "converged"] + [f"p_{i + 1}" for i in range(n)] + [f"u_{i + 1}" for i in range(n)]
    _emit(args, record, _table(th, table_rows) + f"\nwrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def _quadruple_from_args(args, sf: ScenarioFile) -> tuple[int, Quadruple] | None:
    if args.own is not None or args.own_prime is not None or args.others or args.others_prime:
        if args.own is None or args.own_prime is None or args.others is None or args.others_prime is None:
            raise ValidationError("--own, --own-prime, --others and --others-prime must be given together")
        return args.firm, Quadruple(args.own, args.own_prime, tuple(args.others), tuple(args.others_prime))
    if sf.quadruple is not None:
        q = sf.quadruple
        return q["firm"], Quadruple(q["own"], q["own_prime"], q["others"], q["others_prime"])
    return None


def cmd_supermod(args) -> int:
    if args.example1:
        args.preset = "example1"
    sf = _scenario_file(args)
    sc = sf.scenario
    single = None if (args.random or args.grid) else _quadruple_from_args(args, sf)
    inputs: dict[str, Any] = {"scenario": scenario_echo(sf)}
    if single is not None:
        firm, quad = single
        if not 0 <= firm < sc.n_firms:
            raise DomainError(f"firm index {firm} out of range")
        report = increasing_differences_check(sc, firm, [quad])
        lhs, rhs = increasing_differences_sides(sc, firm, quad)
        verdict = "VIOLATION" if report.violations else "ok"
        inputs["quadruple"] = {
            "firm": firm,
            "own": quad.own,
            "own_prime": quad.own_prime,
            "others": list(quad.others),
            "others_prime": list(quad.others_prime),
        }
        record = ResultRecord(
            "supermod", inputs, {"lhs": lhs, "rhs": rhs, "violation": bool(report.violations), "tested_quadruples": 1}
        )
        table = (
            f"firm {firm + 1}: u(p_i', p_-i') - u(p_i, p_-i') = {fmt(lhs)}\n"
            f"         u(p_i', p_-i)  - u(p_i, p_-i)  = {fmt(rhs)}\n"
            f"{verdict}"
        )
        _emit(args, record, table)
        return EXIT_OK

    firm = args.firm
    if not 0 <= firm < sc.n_firms:
        raise DomainError(f"firm index {firm} out of range")
    if args.grid:
        pts = np.linspace(0.0, sc.price_cap, args.grid)
        sample = grid_quadruples(sc, pts, pts)
        inputs["grid"] = args.grid
    else:
        seed = args.seed if args.seed is not None else sf.solver.get("seed", 0)
        sample = random_quadruples(sc, firm, args.random, seed)
        inputs.update(random=args.random, seed=seed)
    if args.stable_only:
        sample = [q for q in sample if in_stable_region(sc, firm, q)]
    report = increasing_differences_check(sc, firm, sample)
    worst = min(report.violations, key=lambda v: v.lhs - v.rhs, default=None)
    outputs = {
        "tested_quadruples": report.tested_quadruples,
        "violations": len(report.violations),
        "is_supermodular_on_sample": report.is_supermodular_on_sample,
    }
    if worst is not None:
        outputs["worst"] = {"lhs": worst.lhs, "rhs": worst.rhs}
    inputs.update(firm=firm, stable_only=args.stable_only)
    record = ResultRecord("supermod", inputs, outputs)
    table = (
        f"firm {firm + 1}: tested {report.tested_quadruples} quadruples, {len(report.violations)} violations"
        + (f"; worst lhs - rhs = {fmt(worst.lhs - worst.rhs)}" if worst else "")
    )
    _emit(args, record, table)
    return EXIT_OK


def cmd_verify(args) -> int:
    sf = _scenario_file(args)
    sc = sf.scenario
    breakpoints = args.breakpoints if args.breakpoints is not None else sf.breakpoints
    if breakpoints is None:
        raise ValidationError("verify needs --breakpoints or a 'breakpoints' entry in the scenario")
    if len(breakpoints) != sc.n_firms:
        raise ValidationError(f"got {len(breakpoints)} breakpoints for {sc.n_firms} firms")
    cert = verify_nash(breakpoints, sc, args.epsilon, args.grid)
    outputs = {"certificate": _cert_dict(cert)}
    lines = [
        _table(["firm", "breakpoint", "max gain", "best deviation"],
               [(str(i + 1), b, g, d) for i, (b, g, d) in enumerate(zip(breakpoints, cert.per_firm_max_gain, cert.per_firm_best_deviation))]),
        f"restricted game: {'PASSED' if cert.passed else 'FAILED'} (epsilon {fmt(cert.epsilon)})",
    ]
    if args.general:
        gcert = verify_nash_general(breakpoints, sc, args.epsilon, args.general, seed=args.seed or 0)
        outputs["general_certificate"] = _cert_dict(gcert)
        lines.append(f"random K-Lipschitz deviations ({args.general} per firm): {'PASSED' if gcert.passed else 'FAILED'}")
    record = ResultRecord("verify", {"scenario": scenario_echo(sf), "breakpoints": list(map(float, breakpoints))}, outputs)
    _emit(args, record, "\n".join(lines))
    return EXIT_OK if cert.passed or not args.strict else 1


def cmd_dominate(args) -> int:
    sf = _scenario_file(args)
    sc = sf.scenario
    K, cap, demand = sc.lipschitz_K, sc.price_cap, sc.demand
    firm_idx = args.firm
    if not 0 <= firm_idx < sc.n_firms:
        raise DomainError(f"firm index {firm_idx} out of range")
    if args.breakpoints is not None:
        profile = list(args.breakpoints)
    elif sf.breakpoints is not None:
        profile = list(sf.breakpoints)
    else:
        profile = list(find_equilibrium(sc, _solver_options(args, sf)).breakpoints)
    if len(profile) != sc.n_firms:
        raise ValidationError(f"got {len(profile)} breakpoints for {sc.n_firms} firms")
    rng = np.random.default_rng(args.seed)
    curves = [KinkedOffer(b, K).to_supply_curve(cap) for b in profile]
    curves[firm_idx] = random_supply_curve(rng, cap, slope_K=K, n_nodes=args.nodes)
    firm = sc.firms[firm_idx]

    def evaluate(curve):
        field_ = curves[:firm_idx] + [curve] + curves[firm_idx + 1 :]
        price = clear_market_general(field_, demand)
        return price, curve.integral(price), pab_utility_general(curve, price, firm).utility

    p0, int0, u0 = evaluate(curves[firm_idx])
    if not p0 > 0:
        raise DomainError("clearing price is zero; the dominance construction is undefined")
    dom = dominance_transform(curves[firm_idx], p0)
    kink = kink_improvement(curves[firm_idx], p0, K)
    p1, int1, u1 = evaluate(dom)
    p2, int2, u2 = evaluate(kink.to_supply_curve(cap))
    rows = [
        ("original", p0, int0, u0),
        ("S(p^2/p*)", p1, int1, u1),
        (f"kinked at {fmt(kink.breakpoint_p)}", p2, int2, u2),
    ]
    record = ResultRecord(
        "dominate",
        {"scenario": scenario_echo(sf), "firm": firm_idx, "opponent_profile": profile, "seed": args.seed},
        {
            "original": {"clearing_price": p0, "integral": int0, "utility": u0},
            "dominance": {"clearing_price": p1, "integral": int1, "utility": u1},
            "kinked": {"clearing_price": p2, "integral": int2, "utility": u2, "breakpoint": kink.breakpoint_p},
        },
    )
    _emit(args, record, _table(["strategy", "p*", "integral to p*", "utility"], rows))
    return EXIT_OK


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", nargs="?", help="scenario YAML file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="use a shipped scenario")
    for name in PRESETS:
        if name.startswith("paper"):
            p.add_argument(f"--{name}", dest="preset_" + name.replace("-", "_"), action="store_true", help=f"preset {name}")
    p.add_argument("--json", action="store_true", help="print the machine-readable record instead of a table")
    p.add_argument("--record", metavar="PATH", help="also write the JSON record to PATH")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--damping", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pab-sfe", description="Pay-as-bid supply function equilibria.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clear", help="clear the market for given breakpoints")
    _add_scenario_args(p)
    p.add_argument("--breakpoints", type=float, nargs="+")
    p.add_argument("--all-at-cap", action="store_true", help="every firm offers nothing below the price cap")
    p.set_defaults(handler=cmd_clear)

    p = sub.add_parser("solve", help="find and certify an equilibrium")
    _add_scenario_args(p)
    _add_solver_args(p)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--grid", type=int, default=10_000, help="deviation grid size for the certificate")
    p.add_argument("--multi-start", dest="multi_start", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("sweep", help="equilibria across Lipschitz constants")
    _add_scenario_args(p)
    _add_solver_args(p)
    p.add_argument("--K", type=float, nargs="+", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("supermod", help="check increasing differences")
    _add_scenario_args(p)
    p.add_argument("--example1", action="store_true", help="replay the two-firm counterexample preset")
    p.add_argument("--firm", type=int, default=0, help="0-based firm index")
    p.add_argument("--own", type=float)
    p.add_argument("--own-prime", dest="own_prime", type=float)
    p.add_argument("--others", type=float, nargs="+")
    p.add_argument("--others-prime", dest="others_prime", type=float, nargs="+")
    p.add_argument("--random", type=int, default=0, help="number of random quadruples")
    p.add_argument("--grid", type=int, default=0, help="grid points per axis")
    p.add_argument("--seed", type=int)
    p.add_argument("--stable-only", action="store_true", help="keep quadruples with a fixed active-firm count")
    p.set_defaults(handler=cmd_supermod)

    p = sub.add_parser("verify", help="Nash certificate for a breakpoint profile")
    _add_scenario_args(p)
    p.add_argument("--breakpoints", type=float, nargs="+")
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--general", type=int, default=0, help="random K-Lipschitz deviations per firm")
    p.add_argument("--seed", type=int)
    p.add_argument("--strict", action="store_true", help="exit 1 when the certificate fails")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("dominate", help="demonstrate the dominance and kink constructions")
    _add_scenario_args(p)
    _add_solver_args(p)
    p.add_argument("--firm", type=int, default=0)
    p.add_argument("--breakpoints", type=float, nargs="+", help="opponent profile (all firms)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=8)
    p.set_defaults(handler=cmd_dominate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
