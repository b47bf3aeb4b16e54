"""``jcsc-sim`` command line: run scenarios, compare result CSVs, list bundled scenarios.

Exit codes: 0 ok, 1 usage or parse error, 2 invariant violation, 3 a result
row carries a flag other than ``ok`` (suppressed by ``--allow-flags``).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .series import from_csv, summarize
from .scenario import (ScenarioError, ScenarioParseError, bundled_scenarios, load_scenario,
                       resolve_scenario_path, run_scenario, summary_report)

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_FLAG = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jcsc-sim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a scenario file (or a bundled scenario name)")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--out", help="CSV path; '-' for stdout (default: the scenario's output, else stdout)")
    r.add_argument("--allow-flags", action="store_true", help="exit 0 even if rows are flagged")

    c = sub.add_parser("compare", help="per-point comparison of two result CSVs")
    c.add_argument("baseline")
    c.add_argument("proposed")
    c.add_argument("--baseline-variant")
    c.add_argument("--proposed-variant")
    c.add_argument("--metric")
    c.add_argument("--target", type=float, help="error-rate level for the horizontal gain (BER curves)")

    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return p


def _cmd_run(args) -> int:
    sc = load_scenario(resolve_scenario_path(args.scenario))
    sc = sc.with_overrides(seed=args.seed, trials=args.trials)
    out = args.out if args.out is not None else sc.output
    to_stdout = out in (None, "", "-")
    if not to_stdout:
        parent = Path(out).resolve().parent
        if not parent.is_dir():
            print(f"jcsc-sim: output directory does not exist: {parent}", file=sys.stderr)
            return EXIT_USAGE
    series, text = run_scenario(sc, None if to_stdout else out)
    if to_stdout:
        sys.stdout.write(text)
    else:
        print(f"wrote {out}", file=sys.stderr)
    print(summary_report(series), file=sys.stderr)
    bad = sorted(series.flags - {"ok"})
    if bad:
        print(f"flags raised: {', '.join(bad)}", file=sys.stderr)
        if not args.allow_flags:
            return EXIT_FLAG
    return EXIT_OK


def _pick(series, variant, metric):
    if variant is None:
        variants = series.variants()
        if len(variants) != 1:
            raise ScenarioParseError(f"CSV holds variants {variants}; choose one with --baseline/--proposed-variant")
        variant = variants[0]
    try:
        return series.curve(variant, metric), variant
    except (KeyError, ValueError) as exc:
        raise ScenarioParseError(f"cannot select a curve: {exc}") from exc


def _cmd_compare(args) -> int:
    a = from_csv(Path(args.baseline).read_text(encoding="utf-8"))
    b = from_csv(Path(args.proposed).read_text(encoding="utf-8"))
    if a.experiment != b.experiment:
        raise ScenarioParseError(f"experiment mismatch: {a.experiment} vs {b.experiment}")
    (ca, va), (cb, vb) = _pick(a, args.baseline_variant, args.metric), _pick(b, args.proposed_variant, args.metric)
    target = args.target
    if target is None and a.experiment == "ber":
        target = 1e-3
    print(summarize(ca, cb, target=target).report(va, vb))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_compare(args)
        for name, path in bundled_scenarios().items():
            print(f"{name}\t{path}")
        return EXIT_OK
    except ScenarioError as exc:
        print(f"jcsc-sim: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"jcsc-sim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        print(f"jcsc-sim: {exc}", file=sys.stderr)
        return EXIT_INVARIANT if isinstance(exc, ValueError) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
