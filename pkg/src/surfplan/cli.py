"""Command-line front end: config in, budget sweep out, reports on disk.

One JSON document configures the run (scene or channel file, budgets,
planner knobs); a handful of flags override its top-level fields.  Reports
are written as a flat ``sweep.csv`` (one row per budget/start) and a full
``report.json``; every number in the csv can be re-derived from the json.
All floats are written with 12 significant digits, and timing is disabled
by default, so identical configurations produce bit-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelSet, load_channels, synthesize_channels
from .deploy import DeployConfig, sweep_budgets
from .scenes import desk_scene

CSV_COLUMNS = ("budget", "start", "iteration_count", "final_objective",
               "min_rate_bps", "max_slack", "wallclock_s")
_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Configuration problem; the message names the offending field."""


@dataclass
class RunConfig:
    """Everything one invocation needs, after parsing and validation."""

    channels: ChannelSet
    budgets: list
    deploy: DeployConfig
    out_dir: str
    formats: tuple


def _sig12(x: float) -> float:
    """Round to 12 significant digits (the on-disk float precision)."""
    return float(f"{float(x):.12g}")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _build_channels(node) -> ChannelSet:
    if not isinstance(node, dict):
        raise ConfigError("scene: must be an object")
    node = dict(node)
    if "path" in node:
        path = node.pop("path")
        node.pop("kind", None)
        if node:
            raise ConfigError(f"scene: unexpected fields {sorted(node)} beside path")
        if not os.path.exists(path):
            raise ConfigError(f"scene.path: channel file not found: {path}")
        return load_channels(path)
    kind = node.pop("kind", "desk")
    if kind != "desk":
        raise ConfigError(f"scene.kind: unknown scene kind {kind!r}")
    allowed = {"num_ues", "num_surfaces", "bs_antennas", "surface_elements",
               "seed", "normalized"}
    unknown = set(node) - allowed
    if unknown:
        raise ConfigError(f"scene.{sorted(unknown)[0]}: not a desk-scene field")
    try:
        return synthesize_channels(desk_scene(**node))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"scene: {e}") from e


def _build_deploy(node, overrides) -> DeployConfig:
    if not isinstance(node, dict):
        raise ConfigError("deploy: must be an object")
    known = {f.name for f in fields(DeployConfig)}
    unknown = set(node) - known
    if unknown:
        raise ConfigError(f"deploy.{sorted(unknown)[0]}: not a planner field")
    merged = {"budget": 0, **node, **overrides}
    try:
        return DeployConfig(**merged)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"deploy: {e}") from e


def parse_run_config(args) -> RunConfig:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {args.config}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: {args.config} is not valid JSON ({e})")
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")

    channels = _build_channels(doc.get("scene", {}))

    budgets = doc.get("budgets")
    if args.budgets is not None:
        try:
            budgets = [int(tok) for tok in args.budgets.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"budgets: not a comma list of integers: {args.budgets}")
    if not isinstance(budgets, list) or not budgets or \
            not all(isinstance(b, int) and not isinstance(b, bool) for b in budgets):
        raise ConfigError("budgets: required, a nonempty list of integers")
    L = channels.num_surfaces
    for b in budgets:
        if not 0 <= b <= L:
            raise ConfigError(f"budgets: {b} outside [0, {L}] for this scene")
    if budgets != sorted(budgets):
        raise ConfigError("budgets: must be sorted ascending")

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.starts is not None:
        overrides["num_starts"] = args.starts
    if args.tol is not None:
        overrides["solver_tol"] = args.tol
    if args.exhaustive_mip:
        overrides["exhaustive_mip"] = True
    deploy = _build_deploy(doc.get("deploy", {}), overrides)

    formats = doc.get("formats", list(_FORMATS))
    if args.format is not None:
        formats = [tok.strip() for tok in args.format.split(",") if tok.strip()]
    bad = [f for f in formats if f not in _FORMATS]
    if bad or not formats:
        raise ConfigError(f"formats: must be a nonempty subset of {_FORMATS}")

    return RunConfig(channels=channels, budgets=budgets, deploy=deploy,
                     out_dir=args.out, formats=tuple(formats))


def _start_node(s) -> dict:
    return {
        "start": int(s.start),
        "status": s.status,
        "solver_status": s.solver_status,
        "iteration_count": int(s.iteration_count),
        "final_objective": _sig12(s.final_objective),
        "min_rate_bps": _sig12(s.min_rate_bps),
        "max_slack": _sig12(s.max_slack),
        "wallclock_s": _sig12(s.wallclock_s),
        "objective_trace": [_sig12(v) for v in s.objective_trace],
        "slack_trace": [_sig12(v) for v in s.slack_trace],
        "iteration_seconds": [_sig12(v) for v in s.iteration_seconds],
        "snr": [_sig12(v) for v in s.gamma],
        "tau": [_sig12(v) for v in s.tau],
        "alpha": [int(a) for a in s.alpha],
    }


def emit_reports(reports, out_dir, formats, failure: str | None = None) -> list:
    """Write the selected report files; returns the paths written."""
    if not reports and failure is None:
        raise ValueError("nothing to report")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    if "csv" in formats:
        path = os.path.join(out_dir, "sweep.csv")
        lines = [",".join(CSV_COLUMNS)]
        for rep in reports:
            for s in rep.starts:
                lines.append(",".join(_fmt(v) for v in (
                    rep.budget, s.start, s.iteration_count, _sig12(s.final_objective),
                    _sig12(s.min_rate_bps), _sig12(s.max_slack), _sig12(s.wallclock_s),
                )))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(path)

    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        doc = {
            "budgets": [int(r.budget) for r in reports],
            "runs": [
                {
                    "budget": int(r.budget),
                    "best_start": int(r.best_start),
                    "marginal_gain": None if r.marginal_gain is None
                    else _sig12(r.marginal_gain),
                    "min_rate_bps": _sig12(r.min_rate_bps),
                    "starts": [_start_node(s) for s in r.starts],
                }
                for r in reports
            ],
        }
        if failure is not None:
            doc["failed"] = failure
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        written.append(path)

    return written


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="surfplan",
        description="Plan surface deployments over a budget sweep and write reports.",
    )
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory for reports")
    p.add_argument("--budgets", help="comma list overriding the config budgets")
    p.add_argument("--seed", type=int, help="override the planner seed")
    p.add_argument("--starts", type=int, help="override the number of starts")
    p.add_argument("--format", help="comma list of report formats (csv,json)")
    p.add_argument("--exhaustive-mip", action="store_true",
                   help="force enumeration over all surface-mode patterns")
    p.add_argument("--tol", type=float, help="override the solver tolerance")
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    try:
        run = parse_run_config(args)
        os.makedirs(run.out_dir, exist_ok=True)
        if not os.access(run.out_dir, os.W_OK):
            raise ConfigError(f"out: directory not writable: {run.out_dir}")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: out: {e}", file=sys.stderr)
        return 2

    try:
        reports = sweep_budgets(run.channels, run.budgets, run.deploy)
    except RuntimeError as e:
        emit_reports([], run.out_dir, run.formats, failure=str(e))
        print(f"error: solver failure: {e}", file=sys.stderr)
        return 3

    for path in emit_reports(reports, run.out_dir, run.formats):
        print(path)
    return 0


def console_main() -> None:
    raise SystemExit(main())
