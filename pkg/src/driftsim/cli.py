"""Command-line front end: run decks, sweep parameters, verify properties.

Exit codes: 0 for a run that reaches its end time (and for sweeps,
however individual points fared), 3 for a run that ends early with a
blow-up report, 1 for configuration or solver failures, 2 for usage
errors.  A blow-up always leaves a JSON report file behind, either at
the deck's declared report sink or next to the other outputs under a
name derived from the deck file.

Sweep points execute on a bounded thread pool; set SIMULATE_WORKERS to
cap the width.  Rows are emitted in input order regardless of
completion order, and a failing point becomes a row with an error
status rather than aborting the sweep.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import os
import re
import sys
import time
from dataclasses import replace

import yaml

from . import verify
from .config import build_models, parse_config
from .device import build_mesh
from .errors import ConfigError, DriftError
from .output import format_float, write_outputs, write_report
from .transient import run, terminal_currents

__all__ = ["main"]


def _load_deck(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _execute(config):
    models = build_models(config)
    mesh = build_mesh(config.device)
    result = run(config.device, models, config.stepper)
    return mesh, models, result


def cmd_run(args) -> int:
    try:
        text = _load_deck(args.deck)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 1
    os.makedirs(args.outdir, exist_ok=True)
    try:
        mesh, models, result = _execute(config)
    except DriftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_outputs(config, config.device, mesh, models, result,
                  directory=args.outdir)
    if result.blowup is None:
        return 0
    if not any(s.kind == "report" for s in config.output):
        stem = os.path.splitext(os.path.basename(args.deck))[0]
        fallback = os.path.join(args.outdir, f"{stem}_report.json")
        write_report(fallback, config.device, mesh, models, result)
    print(f"blow-up at t={result.final.t:.6g}: {result.blowup.reason}",
          file=sys.stderr)
    return 3


_SEGMENT = re.compile(r"([^\[\]]+)((?:\[\d+\])*)$")


def _path_tokens(path: str) -> list:
    tokens: list = []
    for part in path.split("."):
        match = _SEGMENT.match(part)
        if match is None or not part:
            raise ConfigError([f"sweep parameter: bad segment {part!r}"])
        name = match.group(1)
        tokens.append(int(name) if name.isdigit() else name)
        tokens.extend(int(i) for i in re.findall(r"\[(\d+)\]",
                                                 match.group(2)))
    return tokens


def _set_by_path(tree, path: str, value: float) -> None:
    tokens = _path_tokens(path)
    node = tree
    for tok in tokens[:-1]:
        try:
            node = node[tok]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(
                [f"sweep parameter: {path!r} does not resolve "
                 f"(failed at {tok!r})"]) from None
    last = tokens[-1]
    try:
        node[last]
    except (KeyError, IndexError, TypeError):
        raise ConfigError(
            [f"sweep parameter: {path!r} does not resolve "
             f"(failed at {last!r})"]) from None
    node[last] = value


def _parse_values(raw: list[str]) -> list[float]:
    out = []
    for chunk in raw:
        for piece in chunk.split(","):
            piece = piece.strip()
            if piece:
                out.append(float(piece))
    return out


def _sweep_point(text: str, param: str, value: float):
    """One independent simulation; returns a finished row dict."""
    started = time.perf_counter()
    try:
        tree = yaml.safe_load(text)
        _set_by_path(tree, param, value)
        config = parse_config(yaml.safe_dump(tree, sort_keys=False))
        # the sweep table is the only output; per-point sinks would
        # trample each other across values
        config = replace(config, output=())
        mesh, models, result = _execute(config)
    except (DriftError, ValueError) as exc:
        return {"value": value, "currents": None, "iterations": 0,
                "wall": time.perf_counter() - started,
                "status": f"error: {exc}"}
    currents = terminal_currents(config.device, mesh, models, result.final)
    status = "ok" if result.blowup is None else "blow-up"
    return {"value": value, "currents": currents,
            "iterations": int(sum(r.gummel_iterations
                                  for r in result.reports)),
            "wall": time.perf_counter() - started, "status": status}


def cmd_sweep(args) -> int:
    try:
        text = _load_deck(args.deck)
        base = parse_config(text)
        values = _parse_values(args.values)
        # dry resolution: a path that cannot address the deck at all is a
        # usage error, not a per-point failure
        _set_by_path(yaml.safe_load(text), args.param, 0.0)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sides = [c.side for c in base.device.contacts]
    header = ["value"] + [f"current_{s}" for s in sides] \
        + ["wall_time", "iterations", "status"]
    workers = max(1, int(os.environ.get("SIMULATE_WORKERS",
                                        os.cpu_count() or 1)))
    rows = []
    if values:
        pool = concurrent.futures.ThreadPoolExecutor(
            max_workers=min(workers, len(values)))
        with pool:
            futures = [pool.submit(_sweep_point, text, args.param, v)
                       for v in values]
            points = [f.result() for f in futures]
        for point in points:
            currents = point["currents"]
            row = [format_float(point["value"])]
            for side in sides:
                row.append(format_float(currents[side])
                           if currents is not None else "nan")
            row += [format_float(point["wall"]), str(point["iterations"]),
                    point["status"]]
            rows.append(row)
    sink = open(args.out, "w", encoding="utf-8", newline="") \
        if args.out else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if sink is not sys.stdout:
            sink.close()
    return 0


def cmd_verify(args, parser) -> int:
    if args.suite == "all":
        results = verify.run_all(args.seed)
    elif args.suite in verify.available():
        results = verify.run_suite(args.suite, args.seed)
    else:
        parser.error(f"unknown suite {args.suite!r}; available: "
                     + ", ".join(verify.available()) + ", all")
    print(verify.render_report(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Charge transport simulation driver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a deck to its end time")
    p_run.add_argument("deck", help="YAML deck file")
    p_run.add_argument("--outdir", default=".",
                       help="directory for declared output sinks")

    p_sweep = sub.add_parser(
        "sweep", help="rerun a deck over a list of parameter values")
    p_sweep.add_argument("deck", help="YAML deck file")
    p_sweep.add_argument("--param", required=True,
                         help="dotted config path, e.g. "
                              "device.contacts[1].bias")
    p_sweep.add_argument("--values", required=True, nargs="*", default=[],
                         help="comma or space separated numbers")
    p_sweep.add_argument("--out", default=None,
                         help="CSV path (default: stdout)")

    p_verify = sub.add_parser(
        "verify", help="run a named property suite")
    p_verify.add_argument("suite",
                          help="one of: " + ", ".join(verify.available())
                               + ", all")
    p_verify.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_verify(args, parser)


if __name__ == "__main__":
    sys.exit(main())
