"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from demogrowth import __version__
from demogrowth.errors import ConfigError, DemogrowthError
from demogrowth.pipeline.config import FORMATS, load_config
from demogrowth.pipeline.report import emit_report, render_text
from demogrowth.pipeline.run import run_pipeline
from demogrowth.synthetic import DEFAULT_SEED, write_fixture
from demogrowth.unitroot import LEVELS, critical_value, simulate_critical_value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _formats(text: str) -> tuple[str, ...]:
    out = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in out if f not in FORMATS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {', '.join(FORMATS)}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="demogrowth", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    helps = {
        "calibrate": "fit A and N9_0 and write the predicted series",
        "test": "calibrate, then run the unit-root, lag-selection and Johansen battery",
        "run": "full pipeline including VAR, VECM and regressions",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=True, help="INI configuration file")
        sp.add_argument("--format", type=_formats, help="comma-separated subset of text,json,csv")
        sp.add_argument("--out", help="output directory (overrides [data] output_dir)")
        sp.add_argument("--seed", type=int, help="Monte-Carlo seed (overrides [montecarlo] seed)")
        sp.add_argument("--quiet", action="store_true", help="do not echo the text report")

    sp = sub.add_parser("simulate-cv", help="simulate a unit-root critical value and compare with the table")
    sp.add_argument("--test", choices=("adf", "dfgls"), default="adf")
    sp.add_argument("--trend", default="constant", help="none, constant or trend")
    sp.add_argument("--n-obs", type=int, default=41, help="regression sample size")
    sp.add_argument("--level", choices=LEVELS, default="1%")
    sp.add_argument("--replications", type=int, default=50000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lag", type=int, default=None)
    sp.add_argument("--config", help="take replications, seed and n_obs from [montecarlo]")

    sp = sub.add_parser("make-fixture", help="write the synthetic fixture and its config")
    sp.add_argument("--out", required=True, help="directory to write into")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return p


_THROUGH = {"calibrate": "predict", "test": "johansen", "run": None}


def _run(args) -> int:
    dataset, run = load_config(args.config)
    if args.seed is not None:
        run = dataclasses.replace(run, mc_seed=args.seed)
    report = run_pipeline(dataset, run, through=_THROUGH[args.command])
    out = args.out if args.out is not None else dataset.resolve(dataset.output_dir)
    for fmt in args.format or dataset.formats:
        for path in emit_report(report, fmt, out):
            print(f"wrote {path}", file=sys.stderr)
    if not args.quiet:
        sys.stdout.write(render_text(report))
    for err in report.errors:
        print(f"error in stage {err['stage']} ({err['vintage']}): {err['message']}", file=sys.stderr)
    return report.exit_code


def _simulate(args) -> int:
    reps, seed, n_obs = args.replications, args.seed, args.n_obs
    if args.config:
        _, run = load_config(args.config)
        reps, seed, n_obs = run.mc_replications or reps, run.mc_seed, run.mc_n_obs
    if reps < 1000:
        raise ConfigError("replications must be at least 1000")
    sim = simulate_critical_value(args.test, args.trend, n_obs, args.level, reps, seed, args.lag)
    tab = critical_value(args.test, args.trend, n_obs, args.level)
    print(f"test={args.test} trend={args.trend} n_obs={n_obs} level={args.level} "
          f"replications={reps} seed={seed}")
    print(f"simulated  {sim:.4f}")
    print(f"tabulated  {tab:.4f}")
    print(f"difference {sim - tab:+.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate-cv":
            return _simulate(args)
        if args.command == "make-fixture":
            print(write_fixture(args.out, args.seed))
            return 0
        return _run(args)
    except DemogrowthError as exc:
        print(f"demogrowth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
