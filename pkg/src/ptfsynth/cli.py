"""Command-line front end: ``ptfsynth <command> [options]``.

Exit codes: 0 success, 1 a verification or representability failure,
2 a usage error. ``--json`` prints the interchange document instead of a
table; ``--output PATH`` (or ``$PTFSYNTH_OUTPUT_DIR/<command>.json``) also
writes it to disk together with a run manifest.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__, registry
from .circuit import (BUILDERS, MAX_BITS, build_full_adder, default_workers, gate_mask, oracle_for,
                      throughput_bench, verify_exhaustive, verify_random)
from .enumeration import MAX_ENUM_N, format_report, representability_report
from .route import best_hard_routing, format_plan, negation_boundary
from .synth import (McmcConfig, QuantizationConfig, WARMSTART_MAX_SWEEPS, format_summary, synthesize_op,
                    warmstart_experiment)
from .transform import fwht_benchmark, format_bench

OUTPUT_DIR_ENV = "PTFSYNTH_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    """Everything needed to rerun a command bit for bit."""

    command: str
    params: dict
    seeds: list[int]
    version: str = __version__
    outputs: list[str] = field(default_factory=list)
    argv: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunManifest":
        return cls(doc["command"], dict(doc["params"]), list(doc["seeds"]), doc["version"],
                   list(doc.get("outputs", [])), list(doc.get("argv", [])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# helpers


def _ops(n: int, names: Sequence[str] | None, use_all: bool):
    if not names:
        if not use_all:
            raise UsageError("pass --all or at least one --op")
        return registry.standard_ops(n)
    ops = []
    for name in names:
        try:
            ops.append(registry.get_op(name, n))
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    return ops


def _seeds(args) -> list[int]:
    if args.seed is not None:
        return [args.seed]
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    return list(range(args.seeds))


def _configs(args) -> tuple[QuantizationConfig, McmcConfig]:
    try:
        return QuantizationConfig(args.tau), McmcConfig(max_sweeps=args.max_sweeps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _output_path(args) -> Path | None:
    if args.output:
        return Path(args.output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / f"{args.command}.json"
    return None


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "json", "output")}


def _emit(args, argv, payload: dict, text: str, seeds: Sequence[int]) -> None:
    path = _output_path(args)
    manifest = RunManifest(args.command, _params(args), list(seeds),
                           outputs=[str(path)] if path else [], argv=list(argv))
    doc = {"manifest": manifest.to_dict(), **payload}
    if path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2))
    print(json.dumps(doc, indent=2) if args.json else text)


# ---------------------------------------------------------------------------
# commands


def cmd_enumerate(args, argv) -> int:
    if args.n > MAX_ENUM_N:
        raise UsageError(f"exhaustive enumeration supports n <= {MAX_ENUM_N}; "
                         f"use `ptfsynth synthesize --n {args.n}` instead")
    if args.n < 1:
        raise UsageError("--n must be positive")
    ops = _ops(args.n, args.op, args.all)
    results = representability_report(ops, workers=args.workers)
    order = {2: registry.ORDER_2, 3: registry.ORDER_3}.get(args.n)
    _emit(args, argv, {"results": [r.row() for r in results]}, format_report(results, order), [])
    return EXIT_OK if all(r.representable for r in results) else EXIT_FAIL


def cmd_synthesize(args, argv) -> int:
    ops = _ops(args.n, args.op, args.all)
    seeds = _seeds(args)
    q, m = _configs(args)
    rows, lines = [], [f"{'op':<16} {'seed':>4} {'init':>6} {'final':>6} {'steps':>6} {'support':>7}  mask"]
    for op in ops:
        for seed in seeds:
            mask, trace = synthesize_op(op, q, m.with_seed(seed))
            rows.append({"trace": trace.record(), "mask": mask.to_dict()})
            lines.append(f"{op.name:<16} {seed:>4} {trace.initial_accuracy:>6.4f} {trace.final_accuracy:>6.4f} "
                         f"{'-' if trace.steps_to_perfect is None else trace.steps_to_perfect:>6} "
                         f"{mask.support:>7}  {mask.terms()}")
    _emit(args, argv, {"runs": rows}, "\n".join(lines), seeds)
    return EXIT_OK if all(r["trace"]["final_accuracy"] == 1.0 for r in rows) else EXIT_FAIL


def cmd_warmstart(args, argv) -> int:
    ops = _ops(args.n, args.op, True)
    seeds = _seeds(args)
    q, m = _configs(args)
    result = warmstart_experiment(ops, seeds, q, m, workers=args.workers)
    summary = result.summary()
    payload = {"summary": summary, "traces": [t.record() for t in result.traces]}
    _emit(args, argv, payload, format_summary(summary), seeds)
    return EXIT_OK if all(r["converged"] == r["runs"] for r in summary) else EXIT_FAIL


def cmd_compose(args, argv) -> int:
    if args.kind == "full_adder":
        circuit = build_full_adder()
    else:
        if not 1 <= args.bits <= MAX_BITS:
            raise UsageError(f"--bits must lie in 1..{MAX_BITS}")
        circuit = BUILDERS[args.kind](args.bits)
    if args.exhaustive:
        if len(circuit.inputs) > 24:
            raise UsageError("exhaustive verification needs at most 24 circuit inputs")
        report = verify_exhaustive(circuit)
    else:
        if args.samples < 1:
            raise UsageError("--samples must be >= 1")
        report = verify_random(circuit, oracle_for(circuit), args.samples, args.seed, args.workers)
    bound = report.error_bound
    text = "\n".join([
        f"circuit    {circuit.name} ({circuit.bits} bits, {len(circuit)} gates, depth {circuit.depth()})",
        f"gates      {circuit.gate_counts()}",
        f"samples    {report.samples}{' (exhaustive)' if report.exhaustive else ''}",
        f"errors     {report.errors}",
        f"bound      {bound:.3g}",
        f"wilson95   [{report.wilson[0]:.3g}, {report.wilson[1]:.3g}]",
    ])
    _emit(args, argv, {"netlist": circuit.to_dict(), "report": report.to_dict()}, text, [args.seed])
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_route(args, argv) -> int:
    parents = list(registry.reference_masks("phase1").values())
    names = list(registry.LINEAR_OPS_2)
    tables = [registry.table(k, 2) for k in names]
    plan, accs = best_hard_routing(tables, parents, not args.no_signs, names)
    boundary = negation_boundary(parents, {k: registry.table(k, 2) for k in ("nand", "nor", "xnor")})
    text = format_plan(plan) + "\n\naccuracy " + " ".join(f"{k}={a:.2f}" for k, a in zip(names, accs))
    text += "\nunsigned/signed best: " + " ".join(f"{k}={a:.2f}/{b:.2f}" for k, (a, b) in boundary.items())
    payload = {"compositions": plan.records(), "accuracy": dict(zip(names, accs)),
               "negation_boundary": {k: list(v) for k, v in boundary.items()}}
    _emit(args, argv, payload, text, [])
    return EXIT_OK if all(a == 1.0 for a in accs) else EXIT_FAIL


INFERENCE_MASKS = ("and", "or", "xor", "nand", "nor", "xnor", "a_and_not_b",
                   "parity_3", "majority_3", "or_a_and_bc")


def cmd_bench(args, argv) -> int:
    if args.kind == "fwht":
        if args.n_min > args.n_max:
            raise UsageError("--n-min must not exceed --n-max")
        rows = fwht_benchmark(range(args.n_min, args.n_max + 1), args.reps, args.seed)
        _emit(args, argv, {"rows": [r.as_dict() for r in rows]}, format_bench(rows), [args.seed])
        return EXIT_OK
    if args.batch < 1:
        raise UsageError("--batch must be >= 1")
    masks = [gate_mask(k) for k in INFERENCE_MASKS]
    kernels = ("packed", "naive") if args.kernel == "both" else (args.kernel,)
    results = [throughput_bench(masks, args.batch, args.reps, k, args.seed) for k in kernels]
    lines = ["kernel\tbatch\tops\ttime_ms\tMOps_per_s"]
    lines += [f"{r.kernel}\t{r.batch}\t{r.ops}\t{r.seconds * 1e3:.3f}\t{r.mops:.2f}" for r in results]
    _emit(args, argv, {"rows": [r.record() for r in results]}, "\n".join(lines), [args.seed])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the interchange document")
    common.add_argument("--output", help=f"write the JSON document here (default ${OUTPUT_DIR_ENV}/<command>.json)")
    common.add_argument("--workers", type=int, default=default_workers(), help="parallel worker cap")

    p = _Parser(prog="ptfsynth", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", parents=[common], help="exhaustive ternary search (n <= 3)")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--all", action="store_true")
    e.add_argument("--op", action="append")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("synthesize", parents=[common], help="spectral quantization plus MCMC refinement")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--all", action="store_true")
    s.add_argument("--op", action="append")
    s.add_argument("--seeds", type=int, default=1, help="run seeds 0..N-1")
    s.add_argument("--seed", type=int, help="run this single seed")
    s.add_argument("--tau", type=float, default=0.3)
    s.add_argument("--max-sweeps", type=int, default=20_000)
    s.set_defaults(func=cmd_synthesize)

    w = sub.add_parser("warmstart", parents=[common], help="random vs WHT-threshold initialization")
    w.add_argument("--n", type=int, default=4)
    w.add_argument("--op", action="append")
    w.add_argument("--seeds", type=int, default=10)
    w.add_argument("--seed", type=int)
    w.add_argument("--tau", type=float, default=0.1)
    w.add_argument("--max-sweeps", type=int, default=WARMSTART_MAX_SWEEPS)
    w.set_defaults(func=cmd_warmstart)

    c = sub.add_parser("compose", parents=[common], help="build and verify a multi-bit circuit")
    c.add_argument("kind", choices=[*BUILDERS, "full_adder"])
    c.add_argument("--bits", type=int, default=8)
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--exhaustive", action="store_true")
    c.set_defaults(func=cmd_compose)

    r = sub.add_parser("route", parents=[common], help="hard routing of the eight linear compositions")
    r.add_argument("--no-signs", action="store_true")
    r.set_defaults(func=cmd_route)

    b = sub.add_parser("bench", parents=[common], help="FWHT scaling or inference throughput")
    b.add_argument("kind", choices=["fwht", "inference"])
    b.add_argument("--n-min", type=int, default=16)
    b.add_argument("--n-max", type=int, default=22)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--batch", type=int, default=100_000)
    b.add_argument("--kernel", choices=["packed", "naive", "both"], default="both")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args, argv)
    except UsageError as exc:
        print(f"ptfsynth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
