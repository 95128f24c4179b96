"""Command-line entry point: ``e8frodo {demo,analyze,table2,chi-table}``.

Exit status: 0 on success, 1 on usage errors, 2 when a computation exceeds
its size limit.  Standard output is a pure function of the arguments; wall
times go to standard error.
"""
import argparse
import math
import sys
import time

import numpy as np

from . import __version__
from .failure_analysis import (
    SupportTooLarge,
    cca_advantage_bound,
    cubic_pe_bound,
    failure_bound,
    optimize_alpha,
)
from .kex import SEED_BYTES, bandwidth_bytes, run_trials
from .noise import build_chi, chi_divergence
from .params import PARAMSETS, PUBLISHED, ParamSet, get_paramset, is_original

LOG2_Q_RO = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _log2(x) -> str:
    x = float(x)
    return f"{math.log2(x):.2f}" if x > 0 else "-inf"


def _paramset(args) -> ParamSet:
    explicit = [args.n, args.q, args.sigma, args.ell]
    if args.paramset:
        try:
            base = get_paramset(args.paramset)
        except KeyError as e:
            raise UsageError(e.args[0]) from None
    elif all(v is not None for v in explicit):
        base = None
    else:
        raise UsageError("give --paramset or all of --n, --q, --sigma, --ell")
    try:
        return ParamSet(
            base.name if base else "custom",
            args.n if args.n is not None else base.n,
            args.q if args.q is not None else base.q,
            args.sigma if args.sigma is not None else base.sigma,
            args.ell if args.ell is not None else base.ell,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_demo(args, out):
    p = _paramset(args)
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    stats = run_trials(p, args.trials, rng) if args.trials else None
    elapsed = time.perf_counter() - t0
    pk_bytes = SEED_BYTES + p.D * p.n * p.nbar // 8
    ct_bytes = bandwidth_bytes(p)
    agree = stats.agreements if stats else 0
    if args.csv:
        out.write("paramset,trials,agreements,public_key_bytes,ciphertext_bytes\n")
        out.write(f"{p.name},{args.trials},{agree},{pk_bytes},{ct_bytes}\n")
    else:
        out.write(f"{'parameter set':<22}{p.name} (n={p.n}, q=2^{p.D}, sigma={p.sigma}, l={p.ell})\n")
        out.write(f"{'public key (seed||B)':<22}{pk_bytes} bytes\n")
        out.write(f"{'ciphertext (U||C)':<22}{ct_bytes} bytes\n")
        if stats:
            out.write(f"{'agreements':<22}{agree}/{args.trials}\n")
        else:
            out.write("no trials run\n")
    print(f"wall time {elapsed:.3f}s", file=sys.stderr)
    return 0


def _renyi_at_best_alpha(p: ParamSet, pe: float):
    chi = build_chi(p.sigma)

    def objective(alpha):
        div = chi_divergence(chi, alpha)
        return cca_advantage_bound(2**LOG2_Q_RO, p.ell, pe, 2.0**-p.ell, p.n, div, alpha)

    alpha, value = optimize_alpha(objective, hi=1e3, points=60)
    return alpha, float(chi_divergence(chi, alpha)), value


def cmd_analyze(args, out):
    p = _paramset(args)
    fb = failure_bound(p, grid_cells=args.grid_cells)
    alpha, div, adv = _renyi_at_best_alpha(p, fb.total)
    rows = [
        ("paramset", p.name),
        ("beta", p.beta),
        ("log2 term_vr1", _log2(fb.term_v1)),
        ("log2 term_vr2", _log2(fb.term_v2)),
        ("log2 pe_bound", _log2(fb.total)),
        ("grid_cells", fb.grid_cells),
        ("bandwidth_bytes", bandwidth_bytes(p)),
        ("renyi_alpha", f"{alpha:.4g}"),
        ("renyi_divergence", f"{div:.6e}"),
        ("log2 cca_bound", _log2(adv)),
    ]
    if args.csv:
        out.write(",".join(k.replace(" ", "_") for k, _ in rows) + "\n")
        out.write(",".join(str(v) for _, v in rows) + "\n")
    else:
        for k, v in rows:
            out.write(f"{k:<18}{v}\n")
    return 0


def table2_rows(grid_cells=4096):
    for name, p in PARAMSETS.items():
        security, bw_pub, pe_pub = PUBLISHED[name]
        pe = cubic_pe_bound(p) if is_original(p) else failure_bound(p, grid_cells=grid_cells).total
        yield {
            "paramset": name,
            "sigma": p.sigma,
            "log2q": p.D,
            "bandwidth": bandwidth_bytes(p),
            "bandwidth_published": bw_pub,
            "log2_pe": float(_log2(pe)),
            "log2_pe_published": pe_pub,
            "security_published": security,
        }


def cmd_table2(args, out):
    keys = ["paramset", "sigma", "log2q", "bandwidth", "bandwidth_published",
            "log2_pe", "log2_pe_published", "security_published"]
    rows = list(table2_rows(args.grid_cells))
    if args.csv:
        out.write(",".join(keys) + "\n")
        for r in rows:
            out.write(",".join(str(r[k]) for k in keys) + "\n")
        return 0
    out.write(f"{'parameter set':<20}{'sigma':>6}{'q':>6}{'bytes':>8}{'(pub)':>8}"
              f"{'log2 Pe':>10}{'(pub)':>7}{'sec(pub)':>10}\n")
    for r in rows:
        out.write(f"{r['paramset']:<20}{r['sigma']:>6}{'2^' + str(r['log2q']):>6}{r['bandwidth']:>8}"
                  f"{r['bandwidth_published']:>8}{r['log2_pe']:>10.2f}{r['log2_pe_published']:>7}"
                  f"{r['security_published']:>10}\n")
    out.write("original rows: per-entry decoder bound; modified rows: E8 decoder bound\n")
    return 0


def cmd_chi_table(args, out):
    if args.sigma is None:
        raise UsageError("--sigma is required")
    try:
        table = build_chi(args.sigma)
    except ValueError as e:
        raise UsageError(str(e)) from None
    out.write(table.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="e8frodo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, params=True):
        if params:
            sp.add_argument("--paramset", choices=None, help=f"one of: {', '.join(PARAMSETS)}")
            sp.add_argument("--n", type=int)
            sp.add_argument("--q", type=int)
            sp.add_argument("--ell", type=int)
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--csv", action="store_true", help="machine-readable output")
        sp.add_argument("--out", help="write output to this file instead of stdout")

    demo = sub.add_parser("demo", help="run keygen/encaps/decaps and report sizes")
    common(demo)
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--trials", type=int, default=10)
    demo.set_defaults(func=cmd_demo)

    analyze = sub.add_parser("analyze", help="failure-probability bound for one parameter set")
    common(analyze)
    analyze.add_argument("--grid-cells", type=int, default=4096)
    analyze.set_defaults(func=cmd_analyze)

    table2 = sub.add_parser("table2", help="recompute the parameter comparison table")
    table2.add_argument("--grid-cells", type=int, default=4096)
    table2.add_argument("--csv", action="store_true")
    table2.add_argument("--out")
    table2.set_defaults(func=cmd_table2)

    chi = sub.add_parser("chi-table", help="emit the discretised error table for a sigma")
    chi.add_argument("--sigma", type=float)
    chi.add_argument("--out")
    chi.set_defaults(func=cmd_chi_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # --help, --version and usage errors
        return e.code if isinstance(e.code, int) else 1
    out = open(args.out, "w") if getattr(args, "out", None) else sys.stdout
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"e8frodo: error: {e}", file=sys.stderr)
        return 1
    except (SupportTooLarge, MemoryError) as e:
        print(f"e8frodo: computation limit: {e}", file=sys.stderr)
        return 2
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
