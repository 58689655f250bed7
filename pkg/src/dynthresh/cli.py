"""Command-line interface.

Exit codes: 0 success, 1 the analysis contradicts an expectation given on the
command line (``--expect`` / ``--strict``), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .affine import AffineParams, ClassifyBudget, classify
from .core import DomainError
from .criteria import (
    check_averaging,
    check_contraction,
    check_monotone,
    common_limit_verdict,
    contraction_verdict,
)
from .metrics import basin_sample, lyapunov_ensemble
from .plotting import basin_svg, orbit_svg
from .scenarios import BUILTIN_NAMES, Scenario, ScenarioError, resolve
from .sim import detect_limit, sync_gap, transitions, visitation


@dataclass
class CommandOutcome:
    exit_code: int
    artifacts: list[str] = field(default_factory=list)


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return vals


def _grid(text: str) -> tuple[int, int]:
    try:
        r, c = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid: expected RxC, got {text!r}") from None
    return r, c


def _provenance(args, scenario: Scenario, seed: int | None = None) -> dict:
    return {
        "tool": "dynthresh",
        "version": __version__,
        "command": args.argv,
        "seed": scenario.run.seed if seed is None else seed,
        "scenario": scenario.to_dict(),
    }


def _comments(prov: dict) -> list[str]:
    return [f"{k}={json.dumps(v, sort_keys=True)}" for k, v in prov.items()]


def _emit_json(obj: dict, path: str | None, out: CommandOutcome) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
        out.artifacts.append(path)
    else:
        sys.stdout.write(text)


def _affine(scenario: Scenario) -> AffineParams:
    try:
        return AffineParams.from_system(scenario.system)
    except DomainError as exc:
        raise UsageError(f"scenario {scenario.name!r} is not affine: {exc}") from None


def cmd_simulate(args, scenario: Scenario, out: CommandOutcome) -> None:
    trace = scenario.simulate(args.steps)
    prov = _provenance(args, scenario)
    prov["steps"] = args.steps or scenario.run.n_steps
    text = trace.to_csv(comments=_comments(prov))
    if args.out:
        Path(args.out).write_text(text)
        out.artifacts.append(args.out)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(orbit_svg(trace, title=scenario.name))
        out.artifacts.append(args.svg)

    verdict = detect_limit(trace, scenario.run.tol, scenario.run.window)
    summary = {"final": [float(trace.a[-1]), float(trace.c[-1])], "limit": verdict.kind.value,
               "overflow_at": trace.overflow_at}
    if len(trace) >= 2:
        ts = transitions(trace)
        summary["switches"] = len(ts.t12) + len(ts.t21)
    if len(trace) >= 10:
        summary["visitation"] = visitation(trace).kind.value
        summary["sync_gap"] = sync_gap(trace, min(scenario.run.window, len(trace)))
    print(json.dumps(summary), file=sys.stderr)
    if args.expect and verdict.kind.value.lower() != args.expect:
        out.exit_code = 1


def cmd_classify(args, scenario: Scenario, out: CommandOutcome) -> None:
    p = _affine(scenario)
    budget = ClassifyBudget(seed=args.seed)
    if args.grid:
        budget = ClassifyBudget(grid=_grid(args.grid), box=budget.box, seed=args.seed)
    if args.box:
        budget = ClassifyBudget(grid=budget.grid, box=_floats(args.box, 4, "--box"), seed=args.seed)
    result = classify(p, budget)
    report = result.to_dict()
    report["params"] = dict(zip(AffineParams.NAMES, p.as_tuple()))
    report["budget"] = {"grid": list(budget.grid), "box": list(budget.box), "n_steps": budget.n_steps}
    report["provenance"] = _provenance(args, scenario, budget.seed)
    _emit_json(report, args.json, out)


def cmd_lyapunov(args, scenario: Scenario, out: CommandOutcome) -> None:
    if args.box:
        box = _floats(args.box, 4, "--box")
    else:
        a, c = scenario.initial
        box = (a - 0.5, a + 0.5, c - 0.5, c + 0.5)
    try:
        ens = lyapunov_ensemble(scenario.system, args.seeds, args.iters, args.transient, args.seed, box)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    report = {
        "mean_lambda_max": ens.mean,
        "spread": ens.spread,
        "overflowed": ens.overflowed,
        "deviation_from_ln3": ens.mean - float(np.log(3.0)),
        "runs": [{"lambda_max": e.lambda_max, "seed": e.seed, "regime_fraction": e.regime_fraction,
                  "n_iterations": e.n_iterations} for e in ens.estimates],
        "iters": args.iters,
        "transient": args.transient,
        "box": list(box),
        "provenance": _provenance(args, scenario, args.seed),
    }
    _emit_json(report, args.json, out)


def cmd_basin(args, scenario: Scenario, out: CommandOutcome) -> None:
    grid = basin_sample(scenario.system, _floats(args.box, 4, "--box"), _grid(args.grid),
                        args.steps, args.tol)
    prov = _provenance(args, scenario)
    text = grid.to_csv(comments=_comments(prov) + [f"attractors={json.dumps(grid.attractors)}"])
    if args.out:
        Path(args.out).write_text(text)
        out.artifacts.append(args.out)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(basin_svg(grid))
        out.artifacts.append(args.svg)
    print(json.dumps(grid.counts(), sort_keys=True), file=sys.stderr)


def cmd_sweep(args, scenario: Scenario, out: CommandOutcome) -> None:
    p = _affine(scenario)
    if args.param not in AffineParams.NAMES:
        raise UsageError(f"--param must be one of {', '.join(AffineParams.NAMES)}")
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    values = np.linspace(args.start, args.stop, args.points)
    rows = []
    for v in values:
        q = p.replace(**{args.param: float(v)})
        result = classify(q, ClassifyBudget(seed=args.seed))
        base = Scenario(scenario.name, q.to_system(), scenario.initial, scenario.run)
        limit = detect_limit(base.simulate(args.steps), scenario.run.tol, scenario.run.window)
        rows.append({"value": float(v), "label": result.label.value,
                     "diverged_fraction": result.evidence.diverged_fraction,
                     "limit_from_initial": limit.kind.value, "growth_rate": limit.growth_rate})
    report = {"param": args.param, "points": rows, "provenance": _provenance(args, scenario, args.seed)}
    _emit_json(report, args.json, out)


def cmd_verify(args, scenario: Scenario, out: CommandOutcome) -> None:
    trace = scenario.simulate(args.steps)
    sys_ = scenario.system if not scenario.time_varying else None
    if args.theorem == "contraction":
        if sys_ is None:
            raise UsageError("contraction check needs a time-invariant system")
        verdict = contraction_verdict(sys_, trace)
    elif args.theorem == "monotone":
        if sys_ is None:
            raise UsageError("monotone check needs a time-invariant system")
        verdict = check_monotone(sys_, trace)
    elif args.theorem == "averaging":
        if sys_ is None:
            raise UsageError("averaging check needs a time-invariant system")
        verdict = check_averaging(sys_, trace, args.tol)
    else:
        verdict = common_limit_verdict(trace, args.tol)
    report = verdict.to_dict()
    if args.theorem == "contraction":
        rep = check_contraction(sys_)
        report["contraction_report"] = {"L_f": rep.L_f, "L_g": rep.L_g, "L_h_a": rep.L_h_a,
                                        "L_h_c": rep.L_h_c, "combined": rep.combined,
                                        "satisfied": rep.satisfied, "note": rep.note}
    report["notes"] = scenario.notes
    report["provenance"] = _provenance(args, scenario)
    _emit_json(report, args.json, out)
    if args.strict and not (verdict.hypotheses_met and verdict.conclusion_observed):
        out.exit_code = 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dynthresh",
        description="Simulate and analyse piecewise recursive sequences with dynamic thresholds.",
        epilog=f"built-in scenarios: {', '.join(BUILTIN_NAMES)}; or pass a scenario .json file",
    )
    ap.add_argument("--version", action="version", version=f"dynthresh {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def scen(p):
        p.add_argument("scenario", help="built-in name or scenario file")

    p = sub.add_parser("simulate", help="iterate the map and write a CSV trace")
    scen(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.add_argument("--expect", choices=["converged", "diverged", "periodic", "undecided"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="five-type classification of an affine scenario")
    scen(p)
    p.add_argument("--json")
    p.add_argument("--grid")
    p.add_argument("--box")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("lyapunov", help="leading Lyapunov exponent averaged over seeded starts")
    scen(p)
    p.add_argument("--iters", type=int, default=10**6)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--transient", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--box")
    p.add_argument("--json")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("basin", help="attractor labels on a grid of initial states")
    scen(p)
    p.add_argument("--box", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_basin)

    p = sub.add_parser("sweep", help="classify while varying one affine coefficient")
    scen(p)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check theorem hypotheses and conclusions on a trace")
    scen(p)
    p.add_argument("--theorem", required=True, choices=["contraction", "monotone", "averaging", "common-limit"])
    p.add_argument("--steps", type=int)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv: list[str] | None = None) -> CommandOutcome:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandOutcome(int(exc.code or 0))
    args.argv = argv
    out = CommandOutcome(0)
    try:
        scenario = resolve(args.scenario)
        args.func(args, scenario, out)
    except (ScenarioError, UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"dynthresh: error: {exc}", file=sys.stderr)
        return CommandOutcome(2, out.artifacts)
    return out


def main() -> None:
    sys.exit(run().exit_code)


if __name__ == "__main__":
    main()
