"""``steiner-qubo`` command line: gen, build, solve, verify, bench."""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click
import numpy as np
import yaml

from steiner_qubo.annealer import Schedule, SampleSet, sample_sa, sample_sqa
from steiner_qubo.decoder import SteinerSolution, decode, prune
from steiner_qubo.graph_io import DEFAULT_BIG, Graph, GraphError, emit_solution, parse_stp, serialize_stp, solution_record
from steiner_qubo.oracle import BRUTE_FORCE_MAX_EDGES, DisconnectedTerminalsError, brute_force, dreyfus_wagner
from steiner_qubo.qubo import DEFAULT_LAMBDA, build_model, write_model

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


@dataclass
class RunConfig:
    instance: str | None = None
    steps: int | None = None
    lam: int = DEFAULT_LAMBDA
    big: int = DEFAULT_BIG
    sampler: str = "sqa"
    reads: int = 1000
    sweeps: int = 1000
    beta: tuple[float, float] = (0.01, 10.0)
    gamma: tuple[float, float] = (30.0, 0.01)
    trotter: int = 8
    energy_scale: float | None = None
    seed: int = 0
    format: str = "json"
    prune: bool = False
    slack_bits: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.sampler not in ("sa", "sqa"):
            raise click.BadParameter(f"sampler must be sa or sqa, got {self.sampler!r}")
        if self.format not in ("json", "dot"):
            raise click.BadParameter(f"format must be json or dot, got {self.format!r}")
        if self.reads < 1:
            raise click.BadParameter("reads must be at least 1")
        if self.lam <= 0:
            raise click.BadParameter("lambda must be positive")
        if self.steps is not None and self.steps < 1:
            raise click.BadParameter("steps must be at least 1")
        try:
            self.schedule()
        except ValueError as exc:
            raise click.BadParameter(str(exc)) from None

    def schedule(self) -> Schedule:
        return Schedule(
            num_sweeps=self.sweeps,
            beta_range=tuple(self.beta),
            gamma_range=tuple(self.gamma),
            trotter_slices=self.trotter,
            energy_scale=self.energy_scale,
        )

    def as_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d.pop("extra")
        d["beta"], d["gamma"] = list(self.beta), list(self.gamma)
        return d


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)} - {"extra"}
_ALIASES = {"lambda": "lam"}


def resolve_config(config_path: str | None, flags: dict[str, Any]) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    values: dict[str, Any] = {}
    if config_path:
        loaded = yaml.safe_load(Path(config_path).read_text()) or {}
        for k, v in loaded.items():
            k = _ALIASES.get(k, k)
            if k not in _FIELDS:
                raise click.BadParameter(f"unknown config key {k!r}")
            values[k] = v
    values.update({k: v for k, v in flags.items() if v is not None})
    for k in ("beta", "gamma"):
        if k in values:
            values[k] = tuple(float(t) for t in values[k])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def load_instance(path: str | None) -> Graph:
    if not path:
        raise click.UsageError("--instance is required")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise click.FileError(path, hint=str(exc.strerror)) from None
    g = parse_stp(text)
    if not g.name:
        g = dataclasses.replace(g, name=p.stem)
    return g


def random_instance(
    n: int = 11, m: int = 2, wmin: int = 100, wmax: int = 1000, density: float = 0.3, seed: int = 0
) -> Graph:
    """Connected random graph: random spanning tree first, then extra edges up to ``density``.

    Vertex 0 is the first terminal and the root; the other m - 1 terminals are random.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if not 0 < wmin <= wmax:
        raise ValueError("need 0 < wmin <= wmax")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges: dict[tuple[int, int], int] = {}
    for a in range(1, n):
        u, v = int(order[a]), int(order[rng.integers(a)])
        edges[(min(u, v), max(u, v))] = int(rng.integers(wmin, wmax + 1))
    want = max(n - 1, int(round(density * n * (n - 1) / 2)))
    rest = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    rng.shuffle(rest)
    for u, v in rest[: max(0, want - len(edges))]:
        edges[(u, v)] = int(rng.integers(wmin, wmax + 1))
    others = rng.choice(np.arange(1, n), m - 1, replace=False) if m > 1 else []
    return Graph(
        n,
        tuple((u, v, w) for (u, v), w in sorted(edges.items())),
        (0, *(int(t) for t in others)),
        0,
        f"rand_n{n}_m{m}_s{seed}",
    )


@dataclass
class SolveResult:
    graph: Graph
    samples: SampleSet
    best: SteinerSolution
    best_tree: SteinerSolution | None
    num_vars: int


def solve(g: Graph, cfg: RunConfig, seed: int | None = None) -> SolveResult:
    """Build, sample, decode.  ``best`` is the lowest-energy sample's decode;
    ``best_tree`` the lightest decode among samples that verify as trees."""
    seed = cfg.seed if seed is None else seed
    model, idx, _ = build_model(g, cfg.steps, cfg.lam, cfg.big, cfg.slack_bits)
    sampler = sample_sa if cfg.sampler == "sa" else sample_sqa
    ss = sampler(model, cfg.reads, cfg.schedule(), seed)
    best = best_tree = None
    for s in ss.samples:
        sol = decode(s.bits, idx, g, lam=cfg.lam, big=cfg.big)
        if cfg.prune:
            sol = prune(sol, g)
        if best is None:
            best = sol
        if sol.feasible and sol.is_tree and (best_tree is None or sol.tree_weight < best_tree.tree_weight):
            best_tree = sol
    return SolveResult(g, ss, best, best_tree, model.num_vars)


def _run_info(cfg: RunConfig, ss: SampleSet, seed: int) -> dict[str, Any]:
    return {"reads": cfg.reads, "sweeps": cfg.sweeps, "seed": seed, "sampler_info": ss.info, "config": cfg.as_dict()}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


_common = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML/JSON file of RunConfig keys."),
    click.option("--instance", type=str, help="STP instance file."),
    click.option("--steps", type=int, help="Horizon S (default: number of vertices)."),
    click.option("--lambda", "lam", type=int, help="Penalty coefficient (default 10000)."),
    click.option("--big", type=int, help="Weight used for missing edges (default 10000)."),
    click.option("--slack-bits", type=int, help="Slack bits per target (default: enough for any overlap count)."),
]
_sampling = [
    click.option("--sampler", type=click.Choice(["sa", "sqa"])),
    click.option("--reads", type=int),
    click.option("--sweeps", type=int),
    click.option("--beta", type=float, nargs=2, help="Start and end inverse temperature."),
    click.option("--gamma", type=float, nargs=2, help="Start and end transverse field (sqa)."),
    click.option("--trotter", type=int, help="Trotter slices (sqa)."),
    click.option("--energy-scale", type=float, help="Energy unit of the schedule (default: automatic)."),
    click.option("--seed", type=int),
    click.option("--prune", is_flag=True, default=None, help="Repair decoded trees (not part of the QUBO method)."),
]


def _apply(opts):
    def deco(f):
        for o in reversed(opts):
            f = o(f)
        return f

    return deco


def _flags(kw: dict[str, Any]) -> dict[str, Any]:
    beta, gamma = kw.get("beta"), kw.get("gamma")
    kw["beta"] = beta if beta else None
    kw["gamma"] = gamma if gamma else None
    return kw


@click.group()
def main() -> None:
    """Steiner tree QUBO toolkit."""


@main.command()
@click.option("--n", "n", type=int, default=11, show_default=True)
@click.option("--m", "m", type=int, default=2, show_default=True)
@click.option("--wmin", type=int, default=100, show_default=True)
@click.option("--wmax", type=int, default=1000, show_default=True)
@click.option("--density", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def gen(n, m, wmin, wmax, density, seed, out):
    """Write a random connected instance in STP format."""
    try:
        g = random_instance(n, m, wmin, wmax, density, seed)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    _emit(serialize_stp(g), out)


@main.command()
@_apply(_common)
@click.option("--out", type=click.Path(dir_okay=False), help="Model file (default: stdout).")
def build(config_path, out, **kw):
    """Assemble the QUBO and write it in the sparse text format."""
    cfg = resolve_config(config_path, _flags(kw))
    g = load_instance(cfg.instance)
    model, idx, _ = build_model(g, cfg.steps, cfg.lam, cfg.big, cfg.slack_bits)
    header = {
        "instance": g.name, "lambda": cfg.lam, "big": cfg.big, "steps": idx.steps,
        "path_vars": idx.num_path_vars, "slack_vars": idx.num_slack_vars, "aux_vars": idx.num_aux_vars,
    }
    if out:
        with open(out, "w") as fh:
            write_model(model, fh, header)
    else:
        write_model(model, sys.stdout, header)
    click.echo(
        f"variables={model.num_vars} path={idx.num_path_vars} slack={idx.num_slack_vars} "
        f"aux={idx.num_aux_vars} linear={len(model.linear)} quadratic={len(model.quadratic)}",
        err=True,
    )


@main.command("solve")
@_apply(_common + _sampling)
@click.option("--format", "format", type=click.Choice(["json", "dot"]))
@click.option("--out", type=click.Path(dir_okay=False))
def solve_cmd(config_path, out, **kw):
    """Sample the model and decode the lowest-energy sample (exit 2 if infeasible)."""
    cfg = resolve_config(config_path, _flags(kw))
    g = load_instance(cfg.instance)
    res = solve(g, cfg)
    info = _run_info(cfg, res.samples, cfg.seed)
    _emit(emit_solution(res.best, cfg.format, graph=g, run_info=info), out)
    sys.exit(EXIT_OK if res.best.feasible else EXIT_INFEASIBLE)


@main.command()
@click.option("--instance", required=True, type=str)
def verify(instance):
    """Exact optimum by Dreyfus-Wagner (and brute force when the graph is small)."""
    g = load_instance(instance)
    w, tree = dreyfus_wagner(g)
    report: dict[str, Any] = {
        "instance": g.name, "n": g.n, "m": g.m,
        "dreyfus_wagner": {"weight": w, "tree_edges": [list(e) for e in sorted(tree)]},
    }
    if len(g.edges) <= BRUTE_FORCE_MAX_EDGES:
        bw, btree = brute_force(g)
        report["brute_force"] = {"weight": bw, "tree_edges": [list(e) for e in sorted(btree)]}
        report["agree"] = bw == w
    click.echo(json.dumps(report, indent=2))


def run_seeds(master: int, runs: int) -> list[int]:
    ss = np.random.SeedSequence(master)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in ss.spawn(runs)]


def bench(g: Graph, cfg: RunConfig, runs: int) -> dict[str, Any]:
    """Repeat :func:`solve` with derived seeds and score against the exact optimum."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    opt, _ = dreyfus_wagner(g)
    rows = []
    for r, seed in enumerate(run_seeds(cfg.seed, runs)):
        t0 = time.perf_counter()
        res = solve(g, cfg, seed)
        rows.append(
            {
                "run": r,
                "seed": seed,
                "best_energy": res.samples.first.energy,
                "lowest_energy_feasible": res.best.feasible,
                "lowest_energy_is_tree": res.best.is_tree,
                "lowest_energy_tree_weight": res.best.tree_weight,
                "best_tree_weight": res.best_tree.tree_weight if res.best_tree else None,
                "found_tree": res.best_tree is not None,
                "optimal": res.best_tree is not None and res.best_tree.tree_weight == opt,
                "wall_time": time.perf_counter() - t0,
            }
        )
    return {
        "instance": g.name,
        "n": g.n,
        "m": g.m,
        "oracle_weight": opt,
        "runs": rows,
        "feasibility_rate": sum(r["found_tree"] for r in rows) / runs,
        "optimality_rate": sum(r["optimal"] for r in rows) / runs,
        "lowest_energy_tree_rate": sum(r["lowest_energy_is_tree"] for r in rows) / runs,
        "config": cfg.as_dict(),
    }


@main.command("bench")
@_apply(_common + _sampling)
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def bench_cmd(config_path, runs, out, **kw):
    """Repeated solves with derived seeds; feasibility and optimality rates vs the oracle."""
    if runs < 1:
        raise click.BadParameter("--runs must be at least 1")
    cfg = resolve_config(config_path, _flags(kw))
    g = load_instance(cfg.instance)
    _emit(json.dumps(bench(g, cfg, runs), indent=2) + "\n", out)


def entry() -> None:
    """Console entry point; usage and I/O problems exit with status 1."""
    try:
        main.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(EXIT_ERROR)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except (GraphError, DisconnectedTerminalsError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


__all__ = ["RunConfig", "bench", "entry", "main", "random_instance", "resolve_config", "solution_record", "solve"]
