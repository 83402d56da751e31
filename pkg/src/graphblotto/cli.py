"""Command-line front end: config loading, run orchestration, artifacts.

Configs are JSON, results are JSON, traces and trial tables are CSV.
Exit codes: 0 converged, 2 stopped at the iteration cap, 1 any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from graphblotto import __version__
from graphblotto.baselines import BASELINE_KINDS, BaselineSpec, run_trials, write_trials_csv
from graphblotto.best_response import BestResponseProblem, formulate_br, solve_br
from graphblotto.doa import DoaConfig, DoaResult, run_doa
from graphblotto.graph import Graph, reachable_sets
from graphblotto.matrix_game import MixedStrategy
from graphblotto.optim import emit_mps
from graphblotto.payoff import (
    GameRules,
    IntrinsicMatrix,
    elimination_oracle,
    pi_oi,
    reduce_linear_heterogeneous,
)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field path."""


@dataclass(frozen=True)
class GameConfig:
    graph: Graph
    mode: str
    type_count: int
    threshold: float
    d_x: np.ndarray
    d_y: np.ndarray
    intrinsic: IntrinsicMatrix | None = None
    totals: np.ndarray | None = None
    epsilon: float = 0.01
    prune_threshold: float = 1e-6
    max_iterations: int = 200
    seed: int = 0
    backend: str = "builtin"
    backend_command: str | None = None

    def rules(self) -> GameRules:
        return GameRules(self.mode, self.threshold, self.intrinsic)

    def reduced_distributions(self) -> tuple[np.ndarray, np.ndarray]:
        """Playable per-type distributions; linear mode collapses to the
        reference type first."""
        if self.mode == "linear":
            d_x = reduce_linear_heterogeneous(self.d_x, self.intrinsic, 0, self.totals)
            d_y = reduce_linear_heterogeneous(self.d_y, self.intrinsic, 0, self.totals)
            return d_x, d_y
        return self.d_x, self.d_y


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ConfigError(f"{path}.{key}: missing required field")
    return data[key]


def parse_config(data: dict) -> GameConfig:
    graph_data = _require(data, "graph", "config")
    nodes = int(_require(graph_data, "nodes", "config.graph"))
    edges = _require(graph_data, "edges", "config.graph")
    try:
        graph = Graph(
            nodes,
            frozenset((int(a), int(b)) for a, b in edges),
            bool(graph_data.get("allow_stay", True)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.graph: {exc}") from exc

    mode = _require(data, "mode", "config")
    if mode not in ("homogeneous", "linear", "cdh"):
        raise ConfigError(f"config.mode: unknown mode {mode!r}")
    m = int(data.get("types", 3 if mode == "cdh" else 1))
    if mode == "cdh" and m != 3:
        raise ConfigError(
            f"config.types: cyclic dominance is only defined for 3 types (got {m}); "
            "4+ types have no single outcome interface"
        )
    if mode == "homogeneous" and m != 1:
        raise ConfigError("config.types: homogeneous mode has exactly 1 type")

    threshold = float(_require(data, "C", "config"))
    if threshold <= 0:
        raise ConfigError("config.C: clamp threshold must be positive")

    intrinsic = None
    if mode == "cdh":
        intr = _require(data, "intrinsic", "config")
        try:
            intrinsic = IntrinsicMatrix.cyclic(
                float(_require(intr, "I12", "config.intrinsic")),
                float(_require(intr, "I23", "config.intrinsic")),
                float(_require(intr, "I31", "config.intrinsic")),
            )
            intrinsic.validate_cyclic()
        except ValueError as exc:
            raise ConfigError(f"config.intrinsic: {exc}") from exc
    elif mode == "linear":
        matrix = _require(data, "intrinsic", "config")
        try:
            intrinsic = IntrinsicMatrix.linear(np.asarray(matrix, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"config.intrinsic: {exc}") from exc
        if intrinsic.type_count != m:
            raise ConfigError("config.intrinsic: size does not match config.types")

    totals = None
    if mode == "linear":
        totals = np.asarray(_require(data, "totals", "config"), dtype=float)
        if totals.shape != (m,) or np.any(totals <= 0):
            raise ConfigError("config.totals: need one positive total per type")

    def load_d(key: str) -> np.ndarray:
        d = np.asarray(_require(data, key, "config"), dtype=float)
        d = np.atleast_2d(d)
        if d.shape != (m, nodes):
            raise ConfigError(f"config.{key}: expected shape ({m}, {nodes}), got {d.shape}")
        for i, row_sum in enumerate(d.sum(axis=1)):
            if abs(row_sum - 1.0) > 1e-9:
                raise ConfigError(f"config.{key}[{i}]: row sums to {row_sum:.6g}, expected 1")
        if np.any(d < 0):
            raise ConfigError(f"config.{key}: negative entries")
        return d

    backend_data = data.get("backend", "builtin")
    if isinstance(backend_data, dict):
        backend = _require(backend_data, "kind", "config.backend")
        command = backend_data.get("command")
    else:
        backend, command = str(backend_data), None
    if backend not in ("builtin", "mps_external"):
        raise ConfigError(f"config.backend: unknown backend {backend!r}")
    if backend == "mps_external" and not command:
        raise ConfigError("config.backend.command: external backend needs a command")

    return GameConfig(
        graph=graph,
        mode=mode,
        type_count=m,
        threshold=threshold,
        d_x=load_d("d_x"),
        d_y=load_d("d_y"),
        intrinsic=intrinsic,
        totals=totals,
        epsilon=float(data.get("epsilon", 0.01)),
        prune_threshold=float(data.get("prune_threshold", 1e-6)),
        max_iterations=int(data.get("max_iterations", 200)),
        seed=int(data.get("seed", 0)),
        backend=backend,
        backend_command=command,
    )


def load_config(path: str | Path) -> GameConfig:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def serialize_config(config: GameConfig) -> dict:
    data = {
        "graph": {
            "nodes": config.graph.node_count,
            "edges": sorted(list(e) for e in config.graph.edges),
            "allow_stay": config.graph.allow_stay,
        },
        "mode": config.mode,
        "types": config.type_count,
        "C": config.threshold,
        "d_x": config.d_x.tolist(),
        "d_y": config.d_y.tolist(),
        "epsilon": config.epsilon,
        "prune_threshold": config.prune_threshold,
        "max_iterations": config.max_iterations,
        "seed": config.seed,
        "backend": (
            {"kind": config.backend, "command": config.backend_command}
            if config.backend == "mps_external"
            else config.backend
        ),
    }
    if config.mode == "cdh":
        i12, i23, i31 = config.intrinsic.cyclic_ratios()
        data["intrinsic"] = {"I12": i12, "I23": i23, "I31": i31}
    elif config.mode == "linear":
        data["intrinsic"] = config.intrinsic.entries.tolist()
        data["totals"] = config.totals.tolist()
    return data


def _mix_payload(mix: MixedStrategy) -> dict:
    return {
        "probabilities": [round(float(p), 12) for p in mix.probabilities],
        "strategies": [np.round(s, 12).tolist() for s in mix.strategies],
    }


def _doa_config(config: GameConfig) -> DoaConfig:
    return DoaConfig(
        epsilon=config.epsilon,
        max_iterations=config.max_iterations,
        prune=config.prune_threshold > 0,
        prune_threshold=max(config.prune_threshold, 0.0) or 1e-6,
        external_command=config.backend_command,
    )


def run_solve(config: GameConfig, out_dir: Path, stem: str = "result") -> int:
    d_x, d_y = config.reduced_distributions()
    result = run_doa(config.graph, d_x, d_y, config.rules(), _doa_config(config))
    write_result(result, config, out_dir, stem)
    return 0 if result.converged else 2


def write_result(result: DoaResult, config: GameConfig, out_dir: Path, stem: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__,
        "value": round(result.value, 12),
        "lower": round(result.lower, 12),
        "upper": round(result.upper, 12),
        "converged": result.converged,
        "iterations": result.iterations,
        "mix_x": _mix_payload(result.mix_x),
        "mix_y": _mix_payload(result.mix_y),
        "config": serialize_config(config),
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(payload, indent=2) + "\n")
    with open(out_dir / f"{stem}_trace.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["iteration", "U_l", "U_u", "subgame_value", "support_x", "support_y", "elapsed_ms"]
        )
        for rec in result.trace:
            writer.writerow(
                [
                    rec.iteration,
                    f"{rec.lower:.12g}",
                    f"{rec.upper:.12g}",
                    f"{rec.subgame_value:.12g}",
                    rec.support_x,
                    rec.support_y,
                    f"{rec.elapsed_ms:.3f}",
                ]
            )


def run_baselines(config: GameConfig, out_dir: Path, trials: int) -> int:
    d_x, d_y = config.reduced_distributions()
    rules = config.rules()
    result = run_doa(config.graph, d_x, d_y, rules, _doa_config(config))
    reach_x = reachable_sets(config.graph, d_x)
    reach_y = reachable_sets(config.graph, d_y)
    reports = []
    for kind in BASELINE_KINDS:
        for scheme in ("perturb_player1", "perturb_player2"):
            spec = BaselineSpec(kind, scheme, trials=trials, seed=config.seed)
            reports.append(
                run_trials(spec, result.mix_x, result.mix_y, reach_x, reach_y, rules, result.value)
            )
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trials.csv", "w", newline="") as handle:
        write_trials_csv(reports, handle)
    for report in reports:
        print(
            f"{report.spec.kind:18s} {report.spec.scheme:16s} "
            f"mean={report.mean:+.4f} value={report.equilibrium_value:+.4f}"
        )
    return 0 if result.converged else 2


def run_oracle_check(samples: int, seed: int) -> int:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(samples):
        intrinsic = IntrinsicMatrix.cyclic(*(1.0 + 3.0 * rng.random(3)))
        delta = rng.uniform(-5.0, 5.0, size=3)
        surface = pi_oi(delta, intrinsic)
        sign = 0 if abs(surface) < 1e-10 else (1 if surface > 0 else -1)
        oracle_sign, _ = elimination_oracle(delta, intrinsic)
        if sign != oracle_sign:
            failures += 1
    print(f"oracle-check: {samples - failures}/{samples} agreements, {failures} failures")
    return 0 if failures == 0 else 1


def run_best_response(config: GameConfig, out_dir: Path, mps_path: str | None) -> int:
    d_x, d_y = config.reduced_distributions()
    rules = config.rules()
    reach = reachable_sets(config.graph, d_x)
    opponent = MixedStrategy((d_y,), np.array([1.0]))
    problem = BestResponseProblem(reach, opponent, rules)
    if mps_path:
        with open(mps_path, "w") as handle:
            emit_mps(formulate_br(problem).problem, handle)
    strategy, value, certified = solve_br(problem, external_command=config.backend_command)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__,
        "value": round(value, 12),
        "certified": certified,
        "strategy": np.round(strategy, 12).tolist(),
        "config": serialize_config(config),
    }
    (out_dir / "best_response.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"best response value {value:.6f} (certified={certified})")
    return 0


def run_c_sweep(config: GameConfig, out_dir: Path, values: list[float]) -> int:
    worst = 0
    summary = []
    for c_value in values:
        cfg = GameConfig(
            graph=config.graph,
            mode=config.mode,
            type_count=config.type_count,
            threshold=c_value,
            d_x=config.d_x,
            d_y=config.d_y,
            intrinsic=config.intrinsic,
            totals=config.totals,
            epsilon=config.epsilon,
            prune_threshold=config.prune_threshold,
            max_iterations=config.max_iterations,
            seed=config.seed,
            backend=config.backend,
            backend_command=config.backend_command,
        )
        stem = f"c_{c_value:g}".replace(".", "p")
        code = run_solve(cfg, out_dir, stem=stem)
        worst = max(worst, code)
        data = json.loads((out_dir / f"{stem}.json").read_text())
        summary.append((c_value, data["value"]))
        print(f"C={c_value:g}: value={data['value']:+.6f}")
    with open(out_dir / "c_sweep.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["C", "value"])
        for c_value, value in summary:
            writer.writerow([f"{c_value:g}", f"{value:.12g}"])
    return worst


def _apply_overrides(config: GameConfig, args: argparse.Namespace) -> GameConfig:
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "epsilon", None) is not None:
        updates["epsilon"] = args.epsilon
    if getattr(args, "max_iter", None) is not None:
        updates["max_iterations"] = args.max_iter
    if getattr(args, "prune", None) is not None:
        updates["prune_threshold"] = args.prune
    if not updates:
        return config
    data = serialize_config(config)
    rename = {"max_iterations": "max_iterations", "seed": "seed",
              "epsilon": "epsilon", "prune_threshold": "prune_threshold"}
    for key, value in updates.items():
        data[rename[key]] = value
    return parse_config(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphblotto",
        description="Equilibrium solver for resource-allocation games on graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("config", help="path to a game config JSON")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--prune", type=float, default=None,
                       help="support pruning threshold (0 disables)")
        p.add_argument("--out-dir", type=Path, default=Path("."))

    p_solve = sub.add_parser("solve", help="run the double-oracle solver")
    add_common(p_solve)

    p_base = sub.add_parser("baselines", help="perturbation baseline trials")
    add_common(p_base)
    p_base.add_argument("--trials", type=int, default=30)

    p_oracle = sub.add_parser("oracle-check", help="outcome-surface/elimination agreement sweep")
    p_oracle.add_argument("--samples", type=int, default=10000)
    p_oracle.add_argument("--seed", type=int, default=0)

    p_br = sub.add_parser("best-response", help="single best-response MILP solve")
    add_common(p_br)
    p_br.add_argument("--emit-mps", default=None, help="also write the MILP as an MPS file")

    p_sweep = sub.add_parser("c-sweep", help="re-solve over a list of clamp thresholds")
    add_common(p_sweep)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated C values, e.g. 0.75,0.5,0.25")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle-check":
            return run_oracle_check(args.samples, args.seed)
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "solve":
            return run_solve(config, args.out_dir)
        if args.command == "baselines":
            return run_baselines(config, args.out_dir, args.trials)
        if args.command == "best-response":
            return run_best_response(config, args.out_dir, args.emit_mps)
        if args.command == "c-sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            if not values:
                raise ConfigError("--values: need at least one C value")
            return run_c_sweep(config, args.out_dir, values)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
