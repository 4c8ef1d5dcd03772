"""Command-line interface.

Exit codes: 0 success, 2 when an algorithm returns "fail" (or a certificate or
verification does not pass), 1 for I/O and validation errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .certificate import certify_uniqueness
from .commuting_ext import (block_extension, generate_instance, solve_commuting_extension,
                            verify_extension)
from .decompose import decompose, make_plan
from .errors import AlgorithmFailure, FormatError
from .flattening import STANDARD, SWAPPED, build_koszul, default_p
from .formats import (load_cp, load_tensor, matrices_from_json, matrices_to_json, read_json,
                      save_cp, save_tensor, write_json)
from .linalg import TolerancePolicy
from .rank_detect import default_q, detect_rank
from .sweep import DEFAULT_ENTRY_BUDGET, SweepConfig, cmd_sweep
from .tensor_core import assemble, match_and_score, random_generic_decomposition

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _auto_int(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}")


def _r_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else (1, int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI or HI, got {text!r}")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("KY_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"KY_SEED must be an integer, got {env!r}")


def _tol(args) -> TolerancePolicy:
    return TolerancePolicy(args.tol_rank, args.tol_match, args.tol_solve)


def _emit(obj, path: Optional[str]) -> None:
    if path:
        write_json(obj, path)
    else:
        json.dump(obj, sys.stdout, indent=2)
        sys.stdout.write("\n")


# ---- commands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    if len(args.dims) != 3:
        raise ValueError(f"--dims needs three sizes, got {args.dims}")
    decomp = random_generic_decomposition(args.dims, args.r, seed=_seed(args))
    save_tensor(assemble(decomp), args.out)
    if args.cp_out:
        save_cp(decomp, args.cp_out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    T = load_tensor(args.input)
    tol = _tol(args)
    q = args.q if args.q is not None else default_q(T.dims[0])
    report: dict = {}
    code = EXIT_OK
    try:
        plan = make_plan(T, q, p=args.p, r=args.r, tol=tol, notes=report)
        decomp = decompose(T, plan, seed=_seed(args), diagnostics=report)
    except AlgorithmFailure as exc:
        code = EXIT_FAIL
        report.update(status="fail", step=exc.step, condition=exc.condition, message=str(exc))
        print(f"fail: {exc}", file=sys.stderr)
    else:
        report["status"] = "ok"
        if args.out:
            save_cp(decomp, args.out)
        else:
            json.dump({"r": decomp.r}, sys.stdout)
            sys.stdout.write("\n")
        if args.truth:
            rec = match_and_score(load_cp(args.truth), decomp)
            report["recovery"] = rec.to_dict()
            print(f"max term error {rec.max_relative_error:.3g}, "
                  f"reconstruction error {rec.reconstruction_relative_error:.3g}", file=sys.stderr)
    if args.report:
        write_json(report, args.report)
    return code


def cmd_rank(args) -> int:
    T = load_tensor(args.input)
    rep = detect_rank(T, q=args.q, tol=_tol(args), p=args.p)
    _emit(rep.to_dict(), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    decomp = load_cp(args.cp, allow_zero=True)
    cert = certify_uniqueness(decomp, args.q, p=args.p, tol=_tol(args))
    _emit(cert.to_dict(), args.out)
    if not cert.overall:
        print(f"certificate failed: conditions {', '.join(cert.failed())}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_flatten(args) -> int:
    T = load_tensor(args.input)
    q = args.q if args.q is not None else default_q(T.dims[0])
    p = args.p if args.p is not None else default_p(q, T.dims[1], T.dims[2])
    build_koszul(T, p, q, args.mode).dump(args.out, args.index)
    return EXIT_OK


def cmd_commext_gen(args) -> int:
    inst = generate_instance(args.m, args.n, args.r, seed=_seed(args))
    write_json(matrices_to_json(inst.A_list, m=inst.m, n=inst.n, r=inst.r), args.out)
    if args.truth:
        write_json(matrices_to_json(inst.Z_list, m=inst.m, n=inst.r), args.truth)
    return EXIT_OK


def cmd_commext_solve(args) -> int:
    A_list = matrices_from_json(read_json(args.input))
    diag: dict = {}
    try:
        if args.block:
            Z = block_extension(A_list)
        else:
            Z = solve_commuting_extension(A_list, args.r, seed=_seed(args), q=args.q, p=args.p,
                                          tol=_tol(args), diagnostics=diag)
    except AlgorithmFailure as exc:
        print(f"fail: {exc} (attempts: {len(diag.get('attempts', []))})", file=sys.stderr)
        return EXIT_FAIL
    write_json(matrices_to_json(Z, m=len(Z), n=Z[0].shape[0]), args.out)
    return EXIT_OK


def cmd_commext_verify(args) -> int:
    A_list = matrices_from_json(read_json(args.a))
    Z_list = matrices_from_json(read_json(args.z))
    rep = verify_extension(A_list, Z_list, tol=args.tol, exact=args.exact)
    _emit(rep.to_dict(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_sweep_cli(args) -> int:
    base = _seed(args)
    config = SweepConfig(dims=tuple(args.dims), q_values=tuple(args.q), r_range=args.r,
                         seeds=tuple(base + k for k in range(args.seeds)),
                         p=args.p, tol=_tol(args), output=args.out, workers=args.workers,
                         entry_budget=args.budget)
    _, summary = cmd_sweep(config)
    _emit(summary, args.summary)
    return EXIT_OK


# ---- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="random seed (falls back to $KY_SEED, then 0)")
    common.add_argument("--tol-rank", type=float, default=1e-9, help="relative rank tolerance")
    common.add_argument("--tol-match", type=float, default=1e-6, help="scalar-multiple tolerance")
    common.add_argument("--tol-solve", type=float, default=1e-8, help="linear solve residual limit")

    parser = argparse.ArgumentParser(prog="kyflat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a planted generic rank-r tensor")
    g.add_argument("--dims", type=_int_list, required=True, help="n1,n2,n3")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--out", required=True, help="tensor JSON")
    g.add_argument("--cp-out", help="also write the planted decomposition")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decompose", parents=[common], help="decompose a tensor")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--q", type=int, default=None)
    d.add_argument("--p", type=_auto_int, default=None)
    d.add_argument("--r", type=_auto_int, default=None)
    d.add_argument("--out", help="CP JSON output")
    d.add_argument("--report", help="diagnostics JSON output")
    d.add_argument("--truth", help="planted CP JSON to score the result against")
    d.set_defaults(func=cmd_decompose)

    rk = sub.add_parser("rank", parents=[common], help="detect or lower-bound tensor rank")
    rk.add_argument("--in", dest="input", required=True)
    rk.add_argument("--q", type=int, default=None)
    rk.add_argument("--p", type=_auto_int, default=None)
    rk.add_argument("--out")
    rk.set_defaults(func=cmd_rank)

    c = sub.add_parser("certify", parents=[common], help="check the uniqueness conditions")
    c.add_argument("--cp", required=True)
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--p", type=_auto_int, default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    f = sub.add_parser("flatten", parents=[common], help="dump a Koszul-Young flattening")
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("--q", type=int, default=None)
    f.add_argument("--p", type=_auto_int, default=None)
    f.add_argument("--mode", choices=(STANDARD, SWAPPED), default=STANDARD)
    f.add_argument("--out", required=True)
    f.add_argument("--index", help="sidecar index-map JSON")
    f.set_defaults(func=cmd_flatten)

    ce = sub.add_parser("commext", help="commuting extensions")
    ce_sub = ce.add_subparsers(dest="commext_command", required=True)
    cg = ce_sub.add_parser("gen", parents=[common], help="planted instance")
    cg.add_argument("--m", type=int, required=True)
    cg.add_argument("--n", type=int, required=True)
    cg.add_argument("--r", type=int, required=True)
    cg.add_argument("--out", required=True)
    cg.add_argument("--truth", help="also write the planted extension")
    cg.set_defaults(func=cmd_commext_gen)
    cs = ce_sub.add_parser("solve", parents=[common], help="find an extension")
    cs.add_argument("--in", dest="input", required=True)
    cs.add_argument("--r", type=int, default=None)
    cs.add_argument("--q", type=int, default=None)
    cs.add_argument("--p", type=int, default=None)
    cs.add_argument("--block", action="store_true", help="use the dimension-2n block construction")
    cs.add_argument("--out", required=True)
    cs.set_defaults(func=cmd_commext_solve)
    cv = ce_sub.add_parser("verify", parents=[common], help="check an extension")
    cv.add_argument("--a", required=True)
    cv.add_argument("--z", required=True)
    cv.add_argument("--tol", type=float, default=1e-7)
    cv.add_argument("--exact", action="store_true", help="exact commutator arithmetic")
    cv.add_argument("--out")
    cv.set_defaults(func=cmd_commext_verify)

    s = sub.add_parser("sweep", parents=[common], help="rank-additivity sweep to CSV")
    s.add_argument("--dims", type=_int_list, action="append", required=True,
                   help="n1,n2,n3 (repeatable)")
    s.add_argument("--q", type=_int_list, required=True, help="comma-separated q values")
    s.add_argument("--r", type=_r_range, required=True, help="LO:HI inclusive, or HI")
    s.add_argument("--p", type=int, default=None)
    s.add_argument("--seeds", type=int, default=3, help="number of seeds per point")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--budget", type=int, default=DEFAULT_ENTRY_BUDGET,
                   help="largest flattening size in entries")
    s.add_argument("--out", required=True, help="CSV output")
    s.add_argument("--summary", help="summary JSON output (stdout if omitted)")
    s.set_defaults(func=cmd_sweep_cli)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "commext" and args.commext_command == "solve" and not args.block \
            and args.r is None:
        parser.error("commext solve needs --r unless --block is given")
    try:
        return args.func(args)
    except AlgorithmFailure as exc:
        print(f"fail: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FormatError as exc:
        print(f"error: invalid input {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
