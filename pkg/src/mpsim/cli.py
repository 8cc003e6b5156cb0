"""Command-line front end.

    mpsim simulate --model toyA.bnet --init 000 --runs 10000 --depth const:3 --seed 1
    mpsim attractors --model toyA.bnet --from 100
    mpsim transitions --model toyA.bnet --from 000 --depth 3 --targets
    mpsim exact --model toyA.bnet --from 000 --depth exp

Configurations are bitstrings in declaration order of the model file (the
first rule is the leftmost character), or ``NAME=0,NAME=1,...`` lists
covering every component.

Exit codes: 0 success, 1 usage or model error, 2 size/budget cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .attractors import (
    check_attractor_assumption,
    estimate_propensities,
    filter_reachable_attractors,
    minimal_trap_spaces,
)
from .bits import format_config
from .bnet import parse_bnet, parse_configuration
from .engine import Space, reachable_spaces, tr, transition_counts
from .errors import CapExceededError
from .model import BooleanNetwork, apply_mutations, parse_mutation
from .oracle import exact_propensities, format_relation, mp_successors_bruteforce
from .sampler import (
    COUNT,
    LISTING,
    STOP_POLICIES,
    STRONG_BASIN,
    Constant,
    Custom,
    DepthDistribution,
    ExponentialDecay,
    SimulationParams,
    WeightVector,
    default_check_interval,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAP = 2
MATERIALIZE_CAP = 20


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for cap errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- parameter specs ------------------------------------------------------------


def _floats(text: str, what: str) -> list:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"bad {what} list {text!r}") from None


def parse_depth(spec: str, n: int) -> DepthDistribution:
    """``const:K``, ``exp`` or ``custom:p1,...,pk`` (k <= n)."""
    kind, _, arg = spec.partition(":")
    if kind == "const":
        try:
            depth = int(arg)
        except ValueError:
            raise ValueError(f"bad constant depth {spec!r}") from None
        return Constant(depth)
    if kind == "exp" and not arg:
        return ExponentialDecay(n)
    if kind == "custom":
        return Custom(tuple(_floats(arg, "depth probability")))
    raise ValueError(f"bad depth spec {spec!r}; use const:K, exp or custom:p1,...,pn")


def parse_weights(spec: str, n: int) -> WeightVector:
    """``uniform``, ``single`` or ``custom:w1,...,wn``."""
    if spec == "uniform":
        return WeightVector.uniform(n)
    if spec == "single":
        return WeightVector.single(n)
    kind, _, arg = spec.partition(":")
    if kind == "custom":
        values = _floats(arg, "weight")
        if len(values) != n:
            raise ValueError(f"custom weight vector has length {len(values)}, model has {n}")
        return WeightVector(tuple(values))
    raise ValueError(f"bad weight spec {spec!r}; use uniform, single or custom:w1,...,wn")


# --- experiment config and report ------------------------------------------------


@dataclass
class ExperimentConfig:
    model_path: str
    init: str
    mutations: list = field(default_factory=list)
    depth: str = "const:1"
    weights: str = "uniform"
    runs: int = 1000
    seed: int = 0
    check_interval: Optional[int] = None
    stop: str = STRONG_BASIN
    max_steps: int = 100_000
    l_row_mode: str = LISTING
    workers: int = 1
    output: Optional[str] = None
    format: str = "json"


@dataclass
class LoadedModel:
    path: str
    sha256: str
    network: BooleanNetwork


def load_model(path: str, mutations=()) -> LoadedModel:
    raw = Path(path).read_bytes()
    f = parse_bnet(raw.decode("utf-8"))
    f = apply_mutations(f, [parse_mutation(m, f) for m in mutations])
    return LoadedModel(path, hashlib.sha256(raw).hexdigest(), f)


def build_params(cfg: ExperimentConfig, f: BooleanNetwork) -> SimulationParams:
    k = cfg.check_interval if cfg.check_interval is not None else default_check_interval(f.n)
    params = SimulationParams(
        depth=parse_depth(cfg.depth, f.n),
        weights=parse_weights(cfg.weights, f.n),
        seed=cfg.seed,
        max_steps=cfg.max_steps,
        check_interval=k,
        stop=cfg.stop,
        l_row_mode=cfg.l_row_mode,
    )
    params.validate_for(f)
    return params


@dataclass
class PropensityReport:
    model: str
    model_sha256: str
    params: dict
    runs: int
    converged: int
    non_converged: int
    attractors: list  # [{"id", "count", "fraction"}]
    elapsed_seconds: Optional[float]
    seed: int

    def to_json(self) -> str:
        body = {
            "model": self.model,
            "model_sha256": self.model_sha256,
            "params": self.params,
            "runs": self.runs,
            "converged": self.converged,
            "non_converged": self.non_converged,
            "attractors": self.attractors,
            "elapsed_seconds": self.elapsed_seconds,
            "seed": self.seed,
        }
        return json.dumps(body, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["attractor", "count", "fraction"])
        for row in self.attractors:
            # repr keeps the same digits json.dumps writes
            w.writerow([row["id"], row["count"], repr(row["fraction"])])
        return buf.getvalue()

    def plot_rows(self) -> str:
        lines = ["attractor\tfraction"]
        lines += [f"{row['id']}\t{row['fraction']!r}" for row in self.attractors]
        return "\n".join(lines) + "\n"


def cmd_simulate(cfg: ExperimentConfig, timing: bool = True) -> PropensityReport:
    if cfg.runs < 1:
        raise ValueError("runs must be >= 1")
    if cfg.workers < 1:
        raise ValueError("workers must be >= 1")
    model = load_model(cfg.model_path, cfg.mutations)
    f = model.network
    x0 = parse_configuration(cfg.init, f)
    params = build_params(cfg, f)

    start = time.perf_counter()
    attractors = minimal_trap_spaces(f)
    check_attractor_assumption(params, attractors, f.n)
    est = estimate_propensities(
        f, x0, params, cfg.runs, seed=cfg.seed, workers=cfg.workers, attractors=attractors
    )
    elapsed = time.perf_counter() - start

    rows = [{"id": a, "count": c, "fraction": frac} for a, c, frac in est.rows()]
    return PropensityReport(
        model=cfg.model_path,
        model_sha256=model.sha256,
        params={
            "init": format_config(x0, f.n),
            "mutations": sorted(cfg.mutations),
            "depth": cfg.depth,
            "weights": cfg.weights,
            "check_interval": params.check_interval,
            "stop": params.stop,
            "max_steps": params.max_steps,
            "l_row_mode": params.l_row_mode,
        },
        runs=cfg.runs,
        converged=est.converged,
        non_converged=est.non_converged,
        attractors=rows,
        elapsed_seconds=round(elapsed, 6) if timing else None,
        seed=cfg.seed,
    )


def cmd_attractors(f: BooleanNetwork, init: Optional[str] = None) -> list:
    found = minimal_trap_spaces(f)
    if init is not None:
        found = filter_reachable_attractors(found, f, parse_configuration(init, f))
    return [str(a) for a in found]


def cmd_transitions(f: BooleanNetwork, init: str, depth: int, targets: bool = False) -> str:
    """Spaces as ``K=.. H=.. L=..`` lines with per-m counts, optionally with targets."""
    x = parse_configuration(init, f)
    n = f.n
    out = []
    for K, H, L in reachable_spaces(f, x, depth).entries:
        counts = transition_counts(H, L)
        row = [counts.get(m, 0) for m in range(1, max(counts, default=0) + 1)]
        line = (
            f"K={format_config(K, n)} H={format_config(H, n)} L={format_config(L, n)} "
            f"counts={json.dumps(row, separators=(',', ':'))}"
        )
        out.append(line)
        if targets:
            if bin(H).count("1") > MATERIALIZE_CAP:
                out.append(f"  (|H| > {MATERIALIZE_CAP}: targets not listed)")
                continue
            for y in sorted(tr(Space(x, H, L)).members()):
                out.append(f"  -> {format_config(y, n)}")
    return "\n".join(out) + "\n"


def cmd_exact(f: BooleanNetwork, init: str, params: SimulationParams) -> list:
    """(id, probability) sorted by descending probability, then id."""
    probs = exact_propensities(f, parse_configuration(init, f), params)
    return sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))


# --- argument parsing -------------------------------------------------------------


def _add_model(p):
    p.add_argument("--model", required=True, help="path to a .bnet file")
    p.add_argument(
        "--mutation",
        action="append",
        default=[],
        metavar="NAME=V",
        help="fix a component to 0 or 1 (repeatable)",
    )


def _add_walk(p):
    p.add_argument("--depth", default="const:1", help="const:K | exp | custom:p1,...,pn")
    p.add_argument("--weights", default="uniform", help="uniform | single | custom:w1,...,wn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check-interval", type=int, default=None, metavar="K")
    p.add_argument("--max-steps", type=int, default=100_000, metavar="M")
    p.add_argument("--stop", choices=STOP_POLICIES, default=STRONG_BASIN)
    p.add_argument("--l-row-mode", choices=(LISTING, COUNT), default=LISTING)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mpsim",
        description="Most permissive simulation of Boolean networks.",
        epilog="Configurations are bitstrings in the declaration order of the model file.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="estimate attractor propensities by sampling")
    _add_model(p)
    p.add_argument("--init", required=True, help="initial configuration")
    p.add_argument("--runs", type=int, default=1000)
    _add_walk(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, metavar="PATH")
    p.add_argument("--emit-plot-data", default=None, metavar="PATH")
    p.add_argument(
        "--no-timing",
        action="store_true",
        help="write elapsed_seconds as null so reports are byte-comparable",
    )

    p = sub.add_parser("attractors", help="list minimal trap spaces")
    _add_model(p)
    p.add_argument("--from", dest="init", default=None, help="keep those reachable from here")

    p = sub.add_parser("transitions", help="list the spaces of one configuration")
    _add_model(p)
    p.add_argument("--from", dest="init", required=True)
    p.add_argument("--depth", type=int, default=None, help="permissive depth (default n)")
    p.add_argument("--targets", action="store_true", help=f"list targets when |H| <= {MATERIALIZE_CAP}")
    p.add_argument(
        "--relation",
        action="store_true",
        help="instead dump the brute-force MP successors of --from as 'SRC -> TGT' lines",
    )

    p = sub.add_parser("exact", help="exact propensities for small models (n <= 10)")
    _add_model(p)
    p.add_argument("--from", dest="init", required=True)
    _add_walk(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _walk_config(args, **extra) -> ExperimentConfig:
    return ExperimentConfig(
        model_path=args.model,
        init=args.init,
        mutations=list(args.mutation),
        depth=args.depth,
        weights=args.weights,
        seed=args.seed,
        check_interval=args.check_interval,
        stop=args.stop,
        max_steps=args.max_steps,
        l_row_mode=args.l_row_mode,
        **extra,
    )


def run(args) -> int:
    if args.command == "simulate":
        cfg = _walk_config(
            args, runs=args.runs, workers=args.workers, output=args.output, format=args.format
        )
        report = cmd_simulate(cfg, timing=not args.no_timing)
        _write(report.to_json() if cfg.format == "json" else report.to_csv(), cfg.output)
        if args.emit_plot_data:
            Path(args.emit_plot_data).write_text(report.plot_rows(), encoding="utf-8")
        return EXIT_OK

    f = load_model(args.model, args.mutation).network
    if args.command == "attractors":
        _write("".join(a + "\n" for a in cmd_attractors(f, args.init)), None)
    elif args.command == "transitions":
        if args.relation:
            x = parse_configuration(args.init, f)
            pairs = {(x, y) for y in mp_successors_bruteforce(f, x)}
            _write(format_relation(pairs, f.n), None)
        else:
            depth = args.depth if args.depth is not None else f.n
            _write(cmd_transitions(f, args.init, depth, args.targets), None)
    elif args.command == "exact":
        cfg = _walk_config(args)
        rows = cmd_exact(f, args.init, build_params(cfg, f))
        if args.format == "json":
            text = json.dumps([{"id": a, "probability": p} for a, p in rows], indent=2) + "\n"
        else:
            text = "".join(f"{a} {p!r}\n" for a, p in rows)
        _write(text, None)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except CapExceededError as exc:
        print(f"mpsim: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as exc:
        print(f"mpsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
