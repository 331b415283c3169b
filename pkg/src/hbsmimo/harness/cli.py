"""Command-line entry point: ``hbsmimo {run,table1,sweep,qe}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""
import argparse
import logging
import sys

from ..exceptions import HbsError
from .config import RunConfig, load_config, parse_assignments
from .qe_table import qe_table
from .report import emit_report
from .runner import reproduce_table1, run, sweep_snr

log = logging.getLogger("hbsmimo")


def _int_list(text):
    """Parse ``"0-15"`` or ``"2,3"`` style lists."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _number_list(text):
    vals = [float(x) for x in text.split(",") if x.strip()]
    return [int(v) if v.is_integer() else v for v in vals]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    p.add_argument("--out", default=None, help="output file; stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker threads for trials")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="hbsmimo",
        description="Beamspace MIMO rate-loss simulator (SBS vs hybrid beam selection).")
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("run", parents=[common], help="run a single configuration")
    sub.add_parser("table1", parents=[common], help="reproduce the rate-loss table")
    sw = sub.add_parser("sweep", parents=[common], help="per-user rate against SNR")
    sw.add_argument("--snr", type=_float_list, default=None,
                    help="comma-separated SNR grid in dB (default 0,2,...,20)")
    sw.add_argument("--g1", type=int, default=None)
    sw.add_argument("--g2", type=int, default=None)
    sw.add_argument("--baseline", choices=("rvq-full",), default=None,
                    help="add full-dimensional RVQ baseline (M <= 64)")
    qe = sub.add_parser("qe", parents=[common], help="tabulate quantization-error theory")
    qe.add_argument("--L", type=_number_list, default=[2, 3])
    qe.add_argument("--N", type=_int_list, default=list(range(16)))
    return parser


def _config_from_args(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        cfg = parse_assignments(args.set, cfg)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.out is not None:
        changes["output"] = args.out
    if args.format is not None:
        changes["format"] = args.format
    for key in ("g1", "g2"):
        if getattr(args, key, None) is not None:
            changes[key] = getattr(args, key)
    return cfg.replace(**changes)


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.verb == "run":
            report = run(cfg.validate(), n_jobs=args.jobs)
        elif args.verb == "table1":
            report = reproduce_table1(cfg.seed, cfg.trials, base=cfg, n_jobs=args.jobs)
        elif args.verb == "sweep":
            report = sweep_snr(cfg, args.snr, args.baseline, n_jobs=args.jobs)
        else:
            report = qe_table(args.L, args.N)
        emit_report(report, cfg.output, cfg.format)
    except HbsError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
