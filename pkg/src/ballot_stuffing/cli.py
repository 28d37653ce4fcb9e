"""Command-line interface.

Exit codes: 0 success, 2 bad input, 3 numeric or certification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .api import METHODS, compute_equilibrium, solve
from .equilibrium import sample_inspection
from .errors import BallotGameError, InvalidArgument
from .experiments import generate_synthetic, sweep, sweep_csv
from .instance_file import load_instance
from .model import CERT_TOLERANCE, verify_structure
from .parliamentary import solve_parliamentary

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class CommandFailed(Exception):
    def __init__(self, code, message, payload=None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def _default_seed() -> int:
    raw = os.environ.get("BLOTTO_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise CommandFailed(EXIT_INPUT, f"BLOTTO_SEED must be an integer, got {raw!r}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``lo:hi:n`` (linear) or ``lo:hi:n:log`` (geometric)."""
    try:
        if ":" in text:
            parts = text.split(":")
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            log = len(parts) > 3 and parts[3] == "log"
            grid = np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)
            return [float(v) for v in grid]
        return [float(v) for v in text.split(",") if v.strip()]
    except (ValueError, IndexError):
        raise CommandFailed(EXIT_INPUT, f"cannot parse grid {text!r}") from None


def cmd_solve(args) -> None:
    doc = load_instance(args.instance)
    game = doc.game()
    sol = solve(game, args.method, args.tol)
    cert = verify_structure(game, sol.z, args.tol)
    payload = sol.to_dict()
    payload["budget_used"] = game.total_cost(sol.z)
    payload["certificate"] = cert.to_dict()
    if not cert:
        raise CommandFailed(EXIT_NUMERIC, "solution failed certification", payload)
    _emit(_dump(payload))


def _equilibrium_payload(eq) -> dict:
    payload = eq.solution.to_dict()
    payload["p"] = [{"booth": a, "prob": float(p)} for a, p in zip(eq.marginals.booths, eq.marginals.probs)]
    payload["q_support"] = [{"subset": list(s), "prob": float(q)} for s, q in eq.distribution.support]
    payload["expected_payoff"] = eq.nash.expected_payoff
    payload["certificate"] = eq.certificate.to_dict()
    payload["nash_certificate"] = eq.nash.to_dict()
    return payload


def cmd_equilibrium(args) -> None:
    doc = load_instance(args.instance)
    eq = compute_equilibrium(doc.game(), args.method, args.tol)
    if not (eq.certificate and eq.nash):
        raise CommandFailed(EXIT_NUMERIC, "equilibrium failed verification", _equilibrium_payload(eq))
    _emit(_dump(_equilibrium_payload(eq)))


def cmd_sample(args) -> None:
    doc = load_instance(args.instance)
    eq = compute_equilibrium(doc.game(), args.method, args.tol)
    if not (eq.certificate and eq.nash):
        raise CommandFailed(EXIT_NUMERIC, "equilibrium failed verification", _equilibrium_payload(eq))
    seed = _default_seed() if args.seed is None else args.seed
    draws = sample_inspection(eq.distribution, seed, size=args.draws)
    _emit(_dump({"seed": seed, "draws": [list(d) for d in draws]}))


def cmd_sweep(args) -> None:
    doc = load_instance(args.instance)
    game = doc.game()
    budgets = _parse_grid(args.g_grid) if args.g_grid else [game.budget]
    ks = [int(k) for k in _parse_grid(args.k_list)] if args.k_list else [game.inspectors]
    if not budgets or not ks:
        raise CommandFailed(EXIT_INPUT, "budget grid and inspector list must be nonempty")
    if any(g <= 0 for g in budgets):
        raise CommandFailed(EXIT_INPUT, "budgets must be positive")
    rows = sweep(game, budgets, ks, doc.booth_stats(), args.method)
    _emit(sweep_csv(rows, game.n_booths), args.out)


def cmd_parliamentary(args) -> None:
    doc = load_instance(args.instance)
    stats = doc.booth_stats()
    if stats is None:
        raise CommandFailed(EXIT_INPUT, "parliamentary model needs stats for every booth")
    seed = _default_seed() if args.seed is None else args.seed
    plan = solve_parliamentary(
        doc.game().costs, doc.win_curves(), stats, doc.budget, doc.inspectors, args.samples, seed
    )
    payload = plan.to_dict()
    payload["seed"] = seed
    _emit(_dump(payload))


def cmd_generate(args) -> None:
    seed = _default_seed() if args.seed is None else args.seed
    doc = generate_synthetic(
        args.booths,
        seed,
        budget=args.budget,
        inspectors=args.inspectors,
        sigma_range=tuple(args.sigma_range),
        population_range=tuple(args.population_range),
    )
    _emit(doc.to_json(), args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ballot-stuffing", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--method", choices=METHODS, default="auto")
        sp.add_argument("--tol", type=float, default=CERT_TOLERANCE, help="certificate tolerance")

    sp = sub.add_parser("solve", help="optimal stuffing vector with its certificate")
    solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("equilibrium", help="stuffing vector plus the inspector's mixed strategy")
    solver_flags(sp)
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("sample", help="draw inspected subsets from the equilibrium strategy")
    solver_flags(sp)
    sp.add_argument("--seed", type=int, default=None, help="default: $BLOTTO_SEED or 0")
    sp.add_argument("--draws", type=int, default=1)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("sweep", help="CSV of solutions over budgets and inspector counts")
    sp.add_argument("instance")
    sp.add_argument("--g-grid", help="a,b,c | lo:hi:n | lo:hi:n:log (default: instance budget)")
    sp.add_argument("--k-list", help="comma-separated inspector counts (default: instance value)")
    sp.add_argument("--method", choices=METHODS, default="auto")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("parliamentary", help="booth-count model via the concave-gain reduction")
    sp.add_argument("instance")
    sp.add_argument("--seed", type=int, default=None, help="default: $BLOTTO_SEED or 0")
    sp.add_argument("--samples", type=int, default=10**6, help="Monte Carlo draws for weighted booths")
    sp.set_defaults(func=cmd_parliamentary)

    sp = sub.add_parser("generate", help="synthetic instance with variance-population costs")
    sp.add_argument("--booths", type=int, default=51)
    sp.add_argument("--seed", type=int, default=None, help="default: $BLOTTO_SEED or 0")
    sp.add_argument("--budget", type=float, default=1e4)
    sp.add_argument("--inspectors", type=int, default=2)
    sp.add_argument("--sigma-range", type=float, nargs=2, default=(5.0, 60.0))
    sp.add_argument("--population-range", type=float, nargs=2, default=(0.5, 40.0))
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except CommandFailed as exc:
        if exc.payload is not None:
            sys.stdout.write(_dump(exc.payload))
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BallotGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(_dump({"diagnostics": diag}), file=sys.stderr, end="")
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
