#!/usr/bin/env python3
"""
Command-line entry point for randgraphstate.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import networkx as nx
import pandas as pd
from dotenv import load_dotenv

from randgraphstate.core import entanglement, moments, subgraphs
from randgraphstate.core.artifacts import (
    atomic_write_text,
    load_json,
    render_csv,
    render_json,
    result_meta,
)
from randgraphstate.core.crosscheck import SUITES, run_suite
from randgraphstate.core.errors import SamplingBudgetExceeded
from randgraphstate.core.graphs import (
    MODELS,
    EnsembleSpec,
    Graph,
    grid_graph,
    sample_graph,
    sample_multigraph,
    sparsified_grid_reduction,
    y_measurement_reduction,
)
from randgraphstate.core.krawtchouk import KrawtchoukEval
from randgraphstate.core.plotting import fig1_figure, save_svg
from randgraphstate.core.settings import LOG_LEVELS, RunSettings
from randgraphstate.core.telemetry import send_event

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# Options that never influence output bytes.
_UNHASHED = ("threads", "out", "log_level", "handler")


@dataclass(frozen=True)
class RunConfig:
    """Full configuration of one command run."""

    command: str
    seed: int
    threads: int = 1
    out: str | None = None
    format: str | None = None
    model: str | None = None
    n: int | None = None
    n_range: str | None = None
    d: int | None = None
    samples: int | None = None
    options: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        values = dict(vars(args))
        known = {name: values.pop(name, None) for name in ("model", "n", "n_range", "d", "samples")}
        for name in _UNHASHED + ("command", "seed", "format"):
            values.pop(name, None)
        return cls(
            command=args.command,
            seed=args.seed,
            threads=args.threads,
            out=args.out,
            format=args.format,
            options=values,
            **known,
        )

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return asdict(self)

    def config_hash(self) -> str:
        """sha256 over the output-relevant fields."""
        relevant = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        canonical = json.dumps(relevant, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class CommandOutput:
    """A rendered result plus whether every check passed."""

    text: str
    ok: bool = True


def _parse_range(text: str) -> range:
    start, sep, stop = text.partition("..")
    if not sep:
        raise ValueError(f"range must look like A..B, got {text!r}")
    low, high = int(start), int(stop)
    if low < 1 or high < low:
        raise ValueError(f"invalid range {text!r}")
    return range(low, high + 1)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from exc


def _spec_from_args(args: argparse.Namespace) -> EnsembleSpec:
    return EnsembleSpec(args.model, args.n, d=args.d, p=args.p, seed=args.seed)


def _emit(payload: dict, config: RunConfig) -> str:
    if config.format == "csv":
        return render_csv(pd.json_normalize(payload), result_meta(config.config_hash(), config.seed))
    return render_json(payload, result_meta(config.config_hash(), config.seed))


def _emit_table(rows: list[dict], config: RunConfig, extra_meta: dict | None = None) -> str:
    meta = {**result_meta(config.config_hash(), config.seed), **(extra_meta or {})}
    if config.format == "json":
        return render_json({"rows": rows}, meta)
    return render_csv(pd.DataFrame(rows), meta)


# ------------------ Commands ------------------


def cmd_sample(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    spec = _spec_from_args(args)
    if args.raw and spec.model in ("pairing", "matching"):
        graph = sample_multigraph(spec).to_dict()
    else:
        graph = sample_graph(spec).to_dict()
    return CommandOutput(_emit({"spec": spec.to_dict(), "graph": graph}, config))


def cmd_m2_exact(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    rows = []
    for n in _parse_range(args.n_range):
        try:
            rows.extend(moments.exact_table(args.model, args.d, [n]))
        except ValueError as exc:
            logger.warning("Skipping n=%d: %s", n, exc)
    return CommandOutput(_emit_table(rows, config))


def cmd_m2_mc(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    spec = _spec_from_args(args)
    result = moments.mc_avg_m2(spec, args.samples, args.mode, args.angle_samples, args.threads)
    return CommandOutput(_emit(result.to_dict(), config))


def cmd_m2_brute(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    if args.graph:
        g = Graph.from_dict(load_json(args.graph))
    elif args.n is None:
        raise ValueError("m2-brute needs --graph or an ensemble with --n")
    else:
        g = sample_graph(_spec_from_args(args))
    report = moments.graph_moment_report(g, args.angle_samples, args.seed)
    return CommandOutput(_emit(report, config))


def cmd_krawtchouk(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    result = KrawtchoukEval.evaluate(args.i, args.N, args.x)
    if config.format is None:
        return CommandOutput(f"{result.value}\n")
    return CommandOutput(_emit(result.to_dict(), config))


def cmd_rank_dist(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    exact = entanglement.rank_distribution_exact(args.n)
    rows = exact.to_rows()
    extra = {}
    if args.mc:
        comparison = entanglement.rank_distribution_empirical(args.n, args.mc, args.seed)
        for row in rows:
            row["sampled"] = comparison.counts[row["h"]]
            row["expected"] = comparison.expected[row["h"]]
        extra = {"chi2": comparison.statistic, "chi2_p": comparison.p_value}
    return CommandOutput(_emit_table(rows, config, extra))


def cmd_deficiency(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    spec = _spec_from_args(args)
    result = entanglement.deficiency_survey(spec, args.samples, args.mode, args.threads)
    payload = {"spec": spec.to_dict(), "mode": args.mode, "max_deficiency": result.to_dict()}
    return CommandOutput(_emit(payload, config))


def cmd_markov(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    comparison = entanglement.markov_evolve_vs_growth(
        args.r0, args.m0, args.k, args.samples, args.seed
    )
    extra = {"tv": comparison.tv, "leak": comparison.chain.leak}
    return CommandOutput(_emit_table(comparison.to_rows(), config, extra))


def cmd_induced_count(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    host = Graph.from_dict(load_json(args.host))
    pattern = subgraphs.parse_pattern(args.pattern)
    count = subgraphs.count_induced(host, pattern)
    payload = {"host_n": host.n, "host_edges": host.edge_count, "pattern": pattern.to_dict(), "count": count}
    return CommandOutput(_emit(payload, config))


def cmd_induced_mc(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    pattern = subgraphs.parse_pattern(args.pattern)
    result = subgraphs.mc_induced_count(
        args.n, args.d, pattern, args.samples, args.seed, args.threads
    )
    payload = {
        "n": args.n,
        "d": args.d,
        "pattern": pattern.name,
        "estimate": result.to_dict(),
        "expected_leading": subgraphs.expected_induced_count(args.n, args.d, pattern),
    }
    return CommandOutput(_emit(payload, config))


def cmd_fig1(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    """Exact ``E[m2]`` rows for every (model, d, n); a bad row records its error and the run continues."""
    models = ("pairing", "matching") if args.model == "both" else (args.model,)
    rows = []
    for model in models:
        for d in _parse_int_list(args.d_list):
            for n in range(args.n_min, args.n_max + 1):
                row: dict[str, Any] = {"model": model, "d": d, "n": n}
                try:
                    value = moments.exact_avg_m2(model, n, d, args.threads)
                except ValueError as exc:
                    if model == "matching" and n % 2 or model == "pairing" and (n * d) % 2:
                        continue
                    row.update(num="", den="", float_value="", asymptote="", error=str(exc))
                    rows.append(row)
                    continue
                row.update(
                    num=value.numerator,
                    den=value.denominator,
                    float_value=float(value),
                    asymptote=moments.asymptotic_m2(d),
                    error="",
                )
                rows.append(row)
    if args.svg:
        frame = pd.DataFrame([row for row in rows if not row["error"]])
        if not frame.empty:
            save_svg(fig1_figure(frame), args.svg)
    return CommandOutput(_emit_table(rows, config))


def cmd_crosscheck(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    report = run_suite(args.suite, args.seed, args.samples)
    return CommandOutput(_emit(report.to_dict(), config), ok=report.passed)


def cmd_reduce_sparsegrid(args: argparse.Namespace, config: RunConfig) -> CommandOutput:
    if not 1 <= args.L <= 6:
        raise ValueError(f"L must lie in [1, 6], got {args.L}")
    if args.grid_input:
        reduced, sequence = y_measurement_reduction(grid_graph(args.L), ())
    else:
        if args.L < 2:
            raise ValueError("sparsified grids need L >= 2")
        reduced, sequence = sparsified_grid_reduction(args.L)
    target = grid_graph(args.L)
    payload = {
        "L": args.L,
        "isomorphic": nx.is_isomorphic(reduced.to_networkx(), target.to_networkx()),
        "vertices": reduced.n,
        "edges": reduced.edge_count,
        "sequence": list(sequence),
    }
    return CommandOutput(_emit(payload, config))


# ------------------ Parser ------------------


def _common_parser(settings: RunSettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--threads", type=int, default=settings.threads)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("--log-level", choices=LOG_LEVELS, default=settings.log_level)
    return common


def _add_ensemble_args(parser: argparse.ArgumentParser, model_required: bool = True) -> None:
    parser.add_argument("--model", choices=MODELS, required=model_required, default="pairing")
    parser.add_argument("--n", type=int, required=model_required)
    parser.add_argument("--d", type=int, default=None)
    parser.add_argument("--p", type=float, default=None)


def build_parser(settings: RunSettings | None = None) -> argparse.ArgumentParser:
    settings = settings or RunSettings.from_env()
    common = _common_parser(settings)
    parser = argparse.ArgumentParser(
        prog="randgraphstate",
        description="Second moments, rank deficiency and induced subgraphs of random graph states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable, default_format: str | None, help_text: str):
        command = sub.add_parser(name, parents=[common], help=help_text)
        command.set_defaults(handler=handler, default_format=default_format)
        return command

    p = add("sample", cmd_sample, "json", "draw one graph from an ensemble")
    _add_ensemble_args(p)
    p.add_argument("--raw", action="store_true", help="keep loops and repeated edges")

    p = add("m2-exact", cmd_m2_exact, "csv", "exact ensemble-averaged second moments")
    p.add_argument("--model", choices=("pairing", "matching"), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-range", required=True, help="A..B")

    p = add("m2-mc", cmd_m2_mc, "json", "Monte Carlo ensemble second moment")
    _add_ensemble_args(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--mode", choices=("statmech", "statevector"), default="statmech")
    p.add_argument("--angle-samples", type=int, default=1)

    p = add("m2-brute", cmd_m2_brute, "json", "all per-graph routes for one graph")
    p.add_argument("--graph", default=None, help="Graph JSON file")
    _add_ensemble_args(p, model_required=False)
    p.add_argument("--angle-samples", type=int, default=10_000)

    p = add("krawtchouk", cmd_krawtchouk, None, "exact Krawtchouk value")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--x", type=int, required=True)

    p = add("rank-dist", cmd_rank_dist, "csv", "exact rank law of random adjacency matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mc", type=int, default=0, help="also sample this many matrices")

    p = add("deficiency", cmd_deficiency, "json", "maximal rank deficiency over sampled graphs")
    _add_ensemble_args(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--mode", choices=("exhaustive", "heuristic"), default="exhaustive")

    p = add("markov", cmd_markov, "csv", "deficiency chain against matrix growth")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--r0", type=int, default=0)
    p.add_argument("--m0", type=int, default=0)

    p = add("induced-count", cmd_induced_count, "json", "induced copies of a pattern in a host")
    p.add_argument("--host", required=True, help="Graph JSON file")
    p.add_argument("--pattern", required=True)

    p = add("induced-mc", cmd_induced_mc, "json", "mean induced count over uniform regular graphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--samples", type=int, default=1000)

    p = add("fig1", cmd_fig1, "csv", "exact E[m2] curves against n")
    p.add_argument("--d-list", default="3,4")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--model", choices=("pairing", "matching", "both"), default="both")
    p.add_argument("--svg", default=None, help="also write an SVG line chart")

    p = add("crosscheck", cmd_crosscheck, "json", "run an oracle suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--samples", type=int, default=2000)

    p = add("reduce-sparsegrid", cmd_reduce_sparsegrid, "json", "Y-measure a sparsified grid")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--grid-input", action="store_true", help="start from the plain grid")

    return parser


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Parse, run one command, write its output; returns the exit code."""
    load_dotenv()
    try:
        settings = RunSettings.from_env()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    _setup_logging(args.log_level)
    if args.format is None:
        args.format = args.default_format
    del args.default_format

    started = time.monotonic()
    config = None
    code = EXIT_OK
    try:
        config = RunConfig.from_args(args)
        if args.threads < 1:
            raise ValueError(f"--threads must be positive, got {args.threads}")
        output = args.handler(args, config)
        if args.out:
            atomic_write_text(args.out, output.text)
            logger.info("Wrote %s", args.out)
        else:
            sys.stdout.write(output.text)
        code = EXIT_OK if output.ok else EXIT_CHECK_FAILED
    except (SamplingBudgetExceeded, RuntimeError) as exc:
        logger.exception("Command %s failed", args.command)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_CHECK_FAILED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    finally:
        send_event(
            "command",
            {
                "command": args.command,
                "config_hash": config.config_hash() if config else None,
                "seed": args.seed,
                "duration": time.monotonic() - started,
                "exit_code": code,
            },
            settings,
        )
    return code


if __name__ == "__main__":
    sys.exit(main())
