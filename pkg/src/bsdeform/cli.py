"""Command-line front end: check, build, plot, analyze, scan."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

from mpmath import mp, mpf

from . import errors
from .analysis import alpha_grid, analyze, hyperbolic_alpha, resolve_net, scan_point
from .config import Config, Tolerances
from .dynamics import base_map, deformed_map, matching_sets, write_plot_csv
from .group import Verdict, classify_signature, domain_to_dict, parse_word
from .netpartition import net_to_dict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REJECTED = 3
EXIT_PRECISION = 4
EXIT_CONSISTENCY = 5

_USAGE_ERRORS = (
    errors.InvalidOrder,
    errors.AlphaOutsideOverlap,
    errors.NotHyperbolic,
    errors.NoFixedPointInOverlap,
    errors.AmbiguousAlpha,
    errors.IndexOutOfRange,
)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = Config()
    p.add_argument("--precision", type=int, default=d.precision, help="working precision in bits")
    p.add_argument("--tol", type=float, default=d.tol.point, help="point tolerance in radians")
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--max-size", type=int, default=d.max_size)
    p.add_argument("--lmax", type=int, default=d.lmax, help="matching-set budget")
    p.add_argument("--residual", type=float, default=d.residual, help="matching-set residual target")
    p.add_argument("--grid", type=int, default=d.grid)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=d.workers)
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    return p


def _alpha_args(p: argparse.ArgumentParser, required: bool):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--alpha-word", help="comma-separated generator indices, leftmost outermost")
    g.add_argument("--alpha-angle", help="alpha as an angle in radians")
    p.add_argument("--select", choices=("attracting", "repelling"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bsdeform", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    def with_sig(name, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        for m in ("m1", "m2", "m3"):
            p.add_argument(m, type=int)
        return p

    with_sig("check", "classify a signature")
    with_sig("build", "write the domain and net as JSON")
    p = with_sig("plot", "write a CSV plot of f or f_alpha")
    _alpha_args(p, required=False)
    p.add_argument("--samples", type=int, default=1000)
    p = with_sig("analyze", "full verdict report for one alpha")
    _alpha_args(p, required=True)
    p = with_sig("scan", "alpha-grid sweep of one overlap interval")
    p.add_argument("--overlap", type=int, required=True, choices=(1, 2, 3, 4))
    return parser


def config_from(args) -> Config:
    return Config(
        precision=args.precision,
        tol=Tolerances(point=args.tol),
        max_iter=args.max_iter,
        max_size=args.max_size,
        lmax=args.lmax,
        residual=args.residual,
        grid=args.grid,
        seed=args.seed,
        workers=args.workers,
    )


@contextmanager
def _output(path, newline=None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline=newline) as fh:
            yield fh


def _fmt(x) -> str:
    return mp.nstr(mpf(x), 17)


def cmd_check(args) -> int:
    v = classify_signature(args.m1, args.m2, args.m3)
    print(json.dumps(v.to_dict()))
    return EXIT_OK if v.verdict is Verdict.IN_E else EXIT_REJECTED


def cmd_build(args) -> int:
    net = resolve_net((args.m1, args.m2, args.m3), config_from(args))
    with mp.workprec(net.prec):
        data = {**domain_to_dict(net.domain), **net_to_dict(net)}
    with _output(args.out) as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _map_for(args, net):
    if args.alpha_word is None and args.alpha_angle is None:
        return base_map(net)
    if args.alpha_word is not None:
        alpha, _ = hyperbolic_alpha(net, parse_word(args.alpha_word), args.select)
    else:
        alpha = mpf(args.alpha_angle)
    return deformed_map(net, alpha)


def cmd_plot(args) -> int:
    net = resolve_net((args.m1, args.m2, args.m3), config_from(args))
    fmap = _map_for(args, net)
    with _output(args.out, newline="") as fh:
        write_plot_csv(fmap, args.samples, fh)
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = config_from(args)
    report = analyze(
        (args.m1, args.m2, args.m3),
        alpha_word=args.alpha_word,
        alpha_angle=args.alpha_angle,
        config=cfg,
        select=args.select,
    )
    with _output(args.out) as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _scan_task(task):
    sig, cfg, i, alpha = task
    net = resolve_net(sig, cfg)
    with mp.workprec(net.prec):
        table = matching_sets(net, i, cfg.lmax, cfg.residual)
        row = scan_point(net, mpf(alpha), table, cfg)
        return (_fmt(row.alpha), row.surjective_predicate, row.surjective_empirical, row.markov_within_cap)


def cmd_scan(args) -> int:
    cfg = config_from(args)
    sig = (args.m1, args.m2, args.m3)
    net = resolve_net(sig, cfg)
    with mp.workprec(net.prec):
        table = matching_sets(net, args.overlap, cfg.lmax, cfg.residual)
        # Alphas travel to workers as full-precision decimal strings.
        alphas = [mp.nstr(a, int(net.prec * 0.302) + 5) for a in alpha_grid(net, args.overlap, cfg.grid, table)]
    tasks = [(sig, cfg, args.overlap, a) for a in alphas]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_scan_task, tasks))  # map keeps grid order
    else:
        rows = [_scan_task(t) for t in tasks]
    with _output(args.out, newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "surjective_predicate", "surjective_empirical", "markov_within_cap"])
        w.writerows(rows)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "build": cmd_build, "plot": cmd_plot, "analyze": cmd_analyze, "scan": cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except errors.SignatureRejected as exc:
        print(json.dumps({"verdict": exc.verdict}), file=sys.stderr)
        return EXIT_REJECTED
    except errors.PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.BSError as exc:
        print(f"consistency violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
