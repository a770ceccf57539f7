"""Command-line front end. Every command prints one JSON document."""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import sys
import time
from typing import Any, Sequence

from mpmath import mp

from .enumerate import ip_enumerate
from .exprs import ExprError, RealExpr, log3, precision
from .geometry import IndeterminateComparison, LevelMismatch, NotNormalized, TwoLevelState, distance
from .householder import NotUnitary, decompose_su3
from .norm_solver import Status, solve
from .p9 import approximate_phi, best_at_level, is_phi, p9_emulation_report, phi_state, table1_fixtures
from .polytope import RationalPolytope, UnboundedPolytope
from .search import BudgetExhaustedError, Mode, SearchConfig, SearchException, approximate_state

PRECISION_ENV = "METASYNTH_PRECISION"

EXIT_OK, EXIT_USAGE, EXIT_EXCEPTION, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_precision() -> int | None:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


def _epsilon(text: str) -> RealExpr:
    try:
        e = RealExpr(text)
        v = e.mpf(64)
    except (ExprError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad epsilon {text!r}: {exc}") from None
    if not 0 < v < mp.sqrt(2):
        raise UsageError(f"epsilon must lie in (0, sqrt 2), got {text}")
    return e


def _config(args: argparse.Namespace) -> SearchConfig:
    try:
        return SearchConfig(
            lam=args.lam,
            mode=Mode(args.mode),
            norm_budget=args.norm_budget,
            seed=args.seed,
            precision=args.precision_bits or _default_precision(),
            k_max=args.k_max,
            threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _log3_str(x: Any) -> str | None:
    if x == 0:
        return None
    with precision(128):
        return mp.nstr(log3(x), 12)


# --- commands -------------------------------------------------------------------


def cmd_approx_state(args: argparse.Namespace) -> tuple[dict, int]:
    cfg = _config(args)
    try:
        levels = tuple(int(t) for t in args.levels.split(","))
        bits = cfg.precision or 256
        s = TwoLevelState.from_strings(args.x0, args.x1, levels, precision=bits, check=not args.normalize)
        if args.normalize:
            s = s.normalized()
    except (ExprError, NotNormalized, ValueError) as exc:
        raise UsageError(str(exc)) from None
    eps = _epsilon(args.epsilon)
    # phi's meniscus is flat along a lattice plane: every level past the first
    # nonempty one is strongly exceptional, so it takes the two-dimensional path
    if is_phi(s):
        result = approximate_phi(eps, cfg)
        result.notes["route"] = "p9"
    else:
        result = approximate_state(s, eps, cfg)
    return {"target": s.to_json(), "epsilon": eps.source, "config": cfg.to_json(), **result.to_json()}, EXIT_OK


def cmd_p9(args: argparse.Namespace) -> tuple[dict, int]:
    cfg = _config(args)
    if args.table1:
        return {"status": "ok", "rows": [_table1_row(r) for r in table1_fixtures()]}, EXIT_OK
    if args.k is not None:
        res = best_at_level(args.k, cfg, args.sublattice)
        return {"config": cfg.to_json(), "R_phi_r_count_bound": 2 * (res.k + 1) + 1, **res.to_json()}, EXIT_OK
    if args.epsilon is None:
        raise UsageError("p9 needs --epsilon, --k or --table1")
    eps = _epsilon(args.epsilon)
    rep = p9_emulation_report(eps, cfg, args.sublattice)
    res = rep["state_result"]
    return {
        "epsilon": eps.source,
        "config": cfg.to_json(),
        **res.to_json(),
        "c_phi_r_count_bound": rep["c_phi_r_count_bound"],
        "R_phi_r_count_bound": rep["R_phi_r_count_bound"],
        "mu_note": rep["mu_note"],
    }, EXIT_OK


def _table1_row(row) -> dict:
    out: dict = {
        "k": row.k,
        "epsilon_log3_printed": f"{float(row.epsilon_log3):g}",
        "residual_printed": f"{float(row.residual):g}",
        "shift": row.shift,
    }
    for label, corrected in (("printed", False), ("corrected", True)):
        if label == "corrected" and row.corrected_u is None:
            continue
        c = row.candidate(corrected)
        d = distance(phi_state(), c, 320)
        shifted = row.shifted(corrected)
        sol = solve(shifted.ball_residual())
        out[label] = {
            "u": c.u.to_json(),
            "v": c.v.to_json(),
            "distance_log3": _log3_str(d),
            "shifted_residual": str(shifted.ball_residual()),
            "shifted_status": sol.status.value,
            "w": sol.w.to_json() if sol.w is not None else None,
        }
    return out


def cmd_norm_solve(args: argparse.Namespace) -> tuple[dict, int]:
    try:
        n = int(args.n)
    except ValueError:
        raise UsageError(f"--n must be a decimal integer, got {args.n!r}") from None
    if n < 0:
        raise UsageError("--n must be nonnegative")
    out = solve(n, args.norm_budget, args.seed)
    payload = {"status": out.status.value, "n": str(n), "w": out.w.to_json() if out.w is not None else None}
    if out.witness is not None:
        payload["witness"] = {"prime": str(out.witness[0]), "exponent": out.witness[1]}
    payload["work_spent"] = out.work_spent
    return payload, EXIT_BUDGET if out.status is Status.UNKNOWN else EXIT_OK


def cmd_enum_polytope(args: argparse.Namespace) -> tuple[dict, int]:
    try:
        with open(args.file) as fh:
            P = RationalPolytope.from_json(json.load(fh))
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read polytope: {exc}") from None
    if not 1 <= P.dim <= 4:
        raise UsageError("only dimensions 1 to 4 are supported")
    try:
        pts, stats = ip_enumerate(P, limit=args.limit)
    except UnboundedPolytope as exc:
        raise UsageError(str(exc)) from None
    return {
        "status": "ok",
        "dimension": P.dim,
        "count": len(pts),
        "points": [[str(x) for x in p] for p in sorted(pts)],
        "stats": stats.to_json(),
    }, EXIT_OK


def _entry(x: Any) -> Any:
    if isinstance(x, list):
        if len(x) != 2:
            raise UsageError("complex entries are [re, im] pairs")
        return mp.mpc(mp.mpf(str(x[0])), mp.mpf(str(x[1])))
    return mp.mpmathify(str(x))


def cmd_decompose_su3(args: argparse.Namespace) -> tuple[dict, int]:
    bits = args.precision_bits or _default_precision() or 256
    try:
        raw = json.loads(args.matrix)
        if len(raw) != 3 or any(len(r) != 3 for r in raw):
            raise UsageError("matrix must be 3x3")
        with precision(bits):
            U = [[_entry(x) for x in row] for row in raw]
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"bad matrix: {exc}") from None
    try:
        dec = decompose_su3(U, bits)
    except NotUnitary as exc:
        raise UsageError(str(exc)) from None
    with precision(bits):
        M = mp.matrix(3, 3)
        for i in range(3):
            for j in range(3):
                M[i, j] = U[i][j]
        err = mp.mnorm(dec.product() - M, 1)
        return {
            "status": "ok",
            "count": len(dec.reflections),
            **dec.to_json(),
            "reconstruction_error": mp.nstr(err, 5),
        }, EXIT_OK


def cmd_bench(args: argparse.Namespace) -> tuple[dict, int]:
    cfg = _config(args)
    eps = _epsilon(args.epsilon)
    rng = random.Random(args.seed)
    ks, exceptions = [], 0
    for _ in range(args.count):
        s = TwoLevelState.random(rng)
        try:
            ks.append(approximate_state(s, eps, cfg).k)
        except SearchException:
            exceptions += 1
    with precision(64):
        L = float(log3(1 / eps.mpf(64)))
    ratios = [k / L for k in ks]
    return {
        "status": "ok",
        "epsilon": eps.source,
        "config": cfg.to_json(),
        "count": args.count,
        "exceptions": exceptions,
        "k": ks,
        "median_k_over_log3": round(statistics.median(ratios), 6) if ratios else None,
        "max_k": max(ks, default=None),
    }, EXIT_OK


# --- parser ---------------------------------------------------------------------


def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="count threshold exponent, 0 < lambda <= 3/4")
    p.add_argument("--mode", default=Mode.FIRST_FEASIBLE.value, choices=[m.value for m in Mode])
    p.add_argument("--norm-budget", type=int, default=10_000_000, help="factoring work limit per norm equation")
    p.add_argument("--precision-bits", type=int, default=None, help=f"working precision (default from ${PRECISION_ENV} or epsilon)")
    p.add_argument("--k-max", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metasynth", description="Metaplectic qutrit state synthesis.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1, help="worker cap for norm equations")
    parser.add_argument("--json", action="store_true", help="compact single-line JSON")
    parser.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-identical output)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("approx-state", help="approximate a two-level state")
    p.add_argument("--x0", required=True, help="re,im of the first amplitude")
    p.add_argument("--x1", required=True, help="re,im of the second amplitude")
    p.add_argument("--levels", default="0,1")
    p.add_argument("--epsilon", required=True, help='e.g. "0.01" or "3^-9.53"')
    p.add_argument("--normalize", action="store_true", help="rescale amplitudes to unit norm")
    _search_flags(p)
    p.set_defaults(func=cmd_approx_state)

    p = sub.add_parser("p9", help="approximate phi for the P9 emulation")
    p.add_argument("--epsilon")
    p.add_argument("--k", type=int, default=None, help="best feasible point at this level")
    p.add_argument("--sublattice", action="store_true", help="restrict to the index-2 projected sublattice")
    p.add_argument("--table1", action="store_true", help="verify the bundled reference rows")
    _search_flags(p)
    p.set_defaults(func=cmd_p9)

    p = sub.add_parser("norm-solve", help="solve norm(w) = n")
    p.add_argument("--n", required=True)
    p.add_argument("--norm-budget", type=int, default=10_000_000)
    p.set_defaults(func=cmd_norm_solve)

    p = sub.add_parser("enum-polytope", help="integer points of a rational polytope")
    p.add_argument("--file", required=True, help="JSON H-representation")
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_enum_polytope)

    p = sub.add_parser("decompose-su3", help="two-level Householder factorisation")
    p.add_argument("--matrix", required=True, help="JSON 3x3; entries numbers, strings or [re, im]")
    p.add_argument("--precision-bits", type=int, default=None)
    p.set_defaults(func=cmd_decompose_su3)

    p = sub.add_parser("bench", help="random targets, report k statistics")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--count", type=int, default=20)
    _search_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _emit(payload: dict, compact: bool) -> None:
    if compact:
        sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    record: dict = {"command": args.command, "seed": args.seed}
    start = time.perf_counter()
    try:
        payload, code = args.func(args)
    except UsageError as exc:
        payload, code = {"status": "usage_error", "message": str(exc)}, EXIT_USAGE
    except SearchException as exc:
        payload = {
            "status": "exception",
            "k_at_exception": exc.k_at_exception,
            "count_threshold": round(exc.count_threshold, 6),
            "count": exc.count,
            "count_is_lower_bound": exc.count_is_lower_bound,
        }
        code = EXIT_EXCEPTION
    except BudgetExhaustedError as exc:
        payload = {"status": "budget_exhausted", "k": exc.k, "unknown_instances": [str(n) for n in exc.unknown_instances]}
        code = EXIT_BUDGET
    except (LevelMismatch, IndeterminateComparison) as exc:
        payload, code = {"status": "exception", "message": str(exc)}, EXIT_EXCEPTION
    record["result"] = payload
    if args.timing:
        record["seconds"] = round(time.perf_counter() - start, 3)
    _emit(record, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
