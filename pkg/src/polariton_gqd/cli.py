"""Command-line entry point: run a scenario and write its CSV.

Settings come from an optional ``key = value`` config file (``#`` starts a
comment); flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

from .errors import GuardViolation
from .scenarios import KINDS, ScenarioSpec, run_scenario, summarize, write_csv

log = logging.getLogger("polariton_gqd")

# option name -> (ScenarioSpec field, parser)
OPTIONS = {
    "scenario": ("kind", str),
    "alpha": ("alpha", float),
    "n_alpha": ("n_alpha", int),
    "c1": ("c1", float),
    "c2": ("c2", float),
    "c3": ("c3", float),
    "middle": ("middle", str),
    "site": ("site", int),
    "tcav_us": ("t_cav_us", float),
    "j_over_g": ("j_over_g", float),
    "g": ("g", float),
    "dt": ("dt", float),
    "tmax": ("t_max", float),
    "stride": ("stride", int),
    "starts": ("n_starts", int),
    "grid": ("grid", int),
    "seed": ("seed", int),
    "out": ("out", str),
}


def read_config(path: str | Path) -> dict[str, object]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=",))
    parser.read_string("[run]\n" + Path(path).read_text())
    values = {}
    for key, raw in parser["run"].items():
        name = key.replace("-", "_")
        if name not in OPTIONS:
            raise ValueError(f"unknown config key {key!r}")
        field, conv = OPTIONS[name]
        values[field] = conv(raw.strip())
    return values


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polariton-gqd", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="key = value settings file")
    ap.add_argument("--scenario", choices=KINDS)
    for name, (_, conv) in OPTIONS.items():
        if name == "scenario":
            continue
        flag = "--" + name.replace("_", "-")
        kw = {"choices": ("E", "G")} if name == "middle" else {}
        ap.add_argument(flag, type=conv, dest=name, **kw)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def spec_from_args(args: argparse.Namespace) -> ScenarioSpec:
    values = read_config(args.config) if args.config else {}
    for name, (field, _) in OPTIONS.items():
        v = getattr(args, name)
        if v is not None:
            values[field] = v
    if "kind" not in values:
        raise ValueError("no scenario given (use --scenario or a config file)")
    bell = [values.pop(c, d) for c, d in zip(("c1", "c2", "c3"), (1.0, -0.8, 0.8))]
    return ScenarioSpec(bell_diag=tuple(bell), **values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = spec_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        records = list(run_scenario(spec))
    except GuardViolation as exc:
        print(f"guard violation at tau={exc.tau}: {exc}", file=sys.stderr)
        return 3
    if spec.out:
        with open(spec.out, "w", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)
    if spec.kind != "alpha_sweep":
        for key, value in summarize(records).items():
            log.info("%s = %s", key, value)
    return 0


if __name__ == "__main__":
    sys.exit(main())
