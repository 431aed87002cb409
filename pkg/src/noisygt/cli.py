"""Command line entry point: ``noisygt <subcommand> [flags]``.

Exit status is 0 on success, 1 on usage or input errors and 2 when an
internal invariant is violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import harness, oracles, thresholds
from .channel import NoisyChannel
from .errors import GroupTestingError, InternalInconsistency
from .svgplot import PlotSpec, render_svg

log = logging.getLogger("noisygt")

EXIT_USAGE = 1
EXIT_INTERNAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    return vals


def _channel_arg(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"channel must be P01,P10, got {text!r}")
    return vals[0], vals[1]


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def cmd_thresholds(args) -> int:
    ch = NoisyChannel(args.p01, args.p10)
    rep = thresholds.report(args.alpha, ch, args.n)
    data = asdict(rep) | {"C": ch.c_threshold, "beta": ch.beta}
    _write(json.dumps(data, indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    alphas = thresholds.default_alpha_grid() if args.alphas is None else args.alphas
    if not alphas:
        raise UsageError("empty alpha list")
    channels = args.channel or list(harness.FIGURE1_CHANNELS)
    _write(harness.sweep_thresholds(alphas, channels), args.out)
    return 0


_SIM_FIELDS = ("mode", "n", "alpha", "p01", "p10", "eps", "trials", "seed", "multipliers")


def cmd_simulate(args) -> int:
    data = {}
    if args.config:
        cfg_file = harness.ExperimentConfig.from_json(args.config)
        data = cfg_file.to_dict()
    for name in _SIM_FIELDS:
        val = getattr(args, name)
        if val is not None:
            data[name] = val
    missing = [f for f in ("mode", "n", "alpha", "p01", "p10") if f not in data]
    if missing:
        raise UsageError(f"missing settings {missing}: give --config or the flags")
    cfg = harness.ExperimentConfig.from_dict(data)
    rows = harness.run_experiment(cfg, workers=args.workers)
    for r in rows:
        log.info("multiplier %s: success %.3f [%.3f, %.3f], tests mean %.1f, within (1+eps)*threshold: %.2f",
                 r.multiplier, r.success, r.wilson_low, r.wilson_high, r.tests_mean, r.within_budget)
    _write(harness.experiment_csv(rows), args.out)
    return 0


def cmd_oracle_check(args) -> int:
    summary = oracles.run_oracle_suite(args.max_n, args.max_tests)
    summary = {k: float(v) if not isinstance(v, int) else v for k, v in summary.items()}
    print(json.dumps(summary, indent=2))
    if summary["ordering_failures"] or summary["form_mismatches"] or summary["max_normalisation_error"] > 1e-12:
        raise InternalInconsistency("exhaustive oracle suite found violations")
    return 0


def cmd_plot(args) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    spec = PlotSpec(
        x=args.x, y=tuple(args.y.split(",")),
        group_by=tuple(g for g in (args.group or "").split(",") if g),
        title=args.title or "",
    )
    _write(render_svg(text, spec), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noisygt", description="Noisy group testing toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("thresholds", help="threshold constants for one (alpha, channel)")
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--p01", type=float, required=True)
    t.add_argument("--p10", type=float, required=True)
    t.add_argument("--n", type=int, default=10_000)
    t.add_argument("--out")
    t.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("sweep", help="CSV of threshold constants over an alpha grid")
    s.add_argument("--alphas", type=_floats, default=None, help="comma-separated; default 0.01..0.45")
    s.add_argument("--channel", type=_channel_arg, action="append", help="P01,P10; repeatable")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="Monte Carlo recovery experiment")
    m.add_argument("--config", help="JSON file with ExperimentConfig fields")
    m.add_argument("--mode", choices=harness.MODES)
    m.add_argument("--n", type=int)
    m.add_argument("--alpha", type=float)
    m.add_argument("--p01", type=float)
    m.add_argument("--p10", type=float)
    m.add_argument("--eps", type=float)
    m.add_argument("--trials", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--multipliers", type=_floats)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle-check", help="exhaustive small-instance checks")
    o.add_argument("--max-n", type=int, default=3)
    o.add_argument("--max-tests", type=int, default=3)
    o.set_defaults(func=cmd_oracle_check)

    g = sub.add_parser("plot", help="render a CSV as an SVG line chart")
    g.add_argument("--input", required=True)
    g.add_argument("--x", default="alpha")
    g.add_argument("--y", default="c_na,c_ad")
    g.add_argument("--group", default="p01,p10")
    g.add_argument("--title")
    g.add_argument("--out")
    g.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"noisygt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose or args.command == "simulate" else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InternalInconsistency as exc:
        print(f"noisygt: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, GroupTestingError) as exc:
        print(f"noisygt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
