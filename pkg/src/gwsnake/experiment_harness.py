"""Seeded Monte Carlo ensembles over trees and snakes.

Replica ``i`` at grid position ``k`` draws everything from
``SeedSequence(seed, spawn_key=(k, i))``, so results never depend on the
order in which replicas run.  Each finished replica can be checkpointed to
its own JSON file, which makes interrupted runs resumable.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import yaml

from . import gof
from .offspring_laws import OffspringLaw, normalization_for, parse_law
from .snake_stats import (
    branch_composition,
    extract_peaks,
    holder_statistic,
    inversions,
    uniform_vertex_progeny,
)
from .spatial_snake import DisplacementLaw, SpatialSnake, cutoff, decorate, default_cutoff, parse_displacement
from .tree_codec import PlaneTree, total_path_length
from .tree_sampler import SamplingFailure, sample_tree

__all__ = [
    "ExperimentSpec",
    "EnsembleResult",
    "Verdict",
    "ReplicaFailure",
    "STATISTICS",
    "replica_rng",
    "run_ensemble",
    "load_spec",
    "ks_test",
    "chi_square_uniform",
    "chi_square_two_sample",
    "tail_slope",
]

ks_test = gof.ks_test
chi_square_uniform = gof.chi_square_uniform
chi_square_two_sample = gof.chi_square_two_sample
tail_slope = gof.tail_slope


@dataclass
class ExperimentSpec:
    offspring: str
    n_grid: List[int]
    replicas: int
    seed: int
    stats: List[str]
    displacement: Optional[str] = None
    out_dir: Optional[str] = None
    params: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        self.n_grid = [int(n) for n in self.n_grid]
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or not self.n_grid:
            raise ValueError("n_grid must be a non-empty strictly increasing list")
        unknown = [s for s in self.stats if s.partition("@")[0] not in STATISTICS]
        if unknown:
            raise ValueError(f"unknown statistics {unknown}")

    def to_dict(self) -> dict:
        return asdict(self)


def load_spec(path) -> ExperimentSpec:
    """Read a YAML or JSON experiment file."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a mapping")
    allowed = {"offspring", "displacement", "n_grid", "replicas", "seed", "stats", "out_dir", "params", "name"}
    extra = set(raw) - allowed
    if extra:
        raise ValueError(f"{path}: unknown keys {sorted(extra)}")
    return ExperimentSpec(**raw)


def replica_rng(seed: int, grid_index: int, replica: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(grid_index, replica)))


class ReplicaContext:
    """Everything a statistic may need for one replica; the snake is drawn lazily."""

    def __init__(self, tree: PlaneTree, law: OffspringLaw, B_n: float, disp: Optional[DisplacementLaw], params: dict, rng):
        self.tree = tree
        self.law = law
        self.n = tree.n
        self.B_n = B_n
        self.disp = disp
        self.params = params
        self.rng = rng
        self.arrays: Dict[str, np.ndarray] = {}
        self._snake: Optional[SpatialSnake] = None

    @property
    def snake(self) -> SpatialSnake:
        if self._snake is None:
            if self.disp is None:
                raise ValueError("this statistic needs a displacement law")
            self._snake = decorate(self.tree, self.disp, self.rng)
        return self._snake

    @property
    def p(self) -> float:
        return float(self.params.get("p", 2.0))

    @property
    def t_n(self) -> float:
        return (self.n / self.B_n) ** (1.0 / self.p)


def _holder(ctx, arg):
    gamma = float(arg if arg is not None else ctx.params.get("gamma", 0.4))
    return holder_statistic(ctx.tree.depth, ctx.B_n, gamma)


def _max_step(ctx, arg):
    return math.sqrt(ctx.B_n / ctx.n) * float(np.abs(np.diff(ctx.snake.Hsp)).max())


def _peaks(ctx, arg):
    eta = float(arg if arg is not None else ctx.params.get("eta", 1.0))
    pk = extract_peaks(ctx.snake, ctx.t_n, eta)
    ctx.arrays["peak_x"] = pk.x
    ctx.arrays["peak_y"] = pk.y
    return float(len(pk))


def _small_jump_max(ctx, arg):
    eps = float(ctx.params.get("eps", 0.01))
    b = default_cutoff(ctx.n, ctx.B_n, ctx.law.alpha, ctx.p, eps)
    dec = cutoff(ctx.snake, b)
    ctx.arrays["E_n"] = np.array([float(dec.E_n)])
    return float(np.abs(dec.Hsp_small).max()) / ctx.t_n


def _inversion_fluct(ctx, arg):
    labels = ctx.rng.permutation(ctx.tree.degrees.size)
    I = inversions(ctx.tree, labels)
    lam = total_path_length(ctx.tree)
    return math.sqrt(ctx.B_n / (12.0 * ctx.n**3)) * (I - lam / 2)


def _branch(ctx, arg):
    return float(branch_composition(ctx.tree, ctx.law.mu0).violated)


def _noncentred_gap(ctx, arg):
    m = ctx.disp.mean
    return ctx.B_n / ctx.n * float(np.abs(ctx.snake.Hsp - m * ctx.tree.depth).max())


STATISTICS: Dict[str, Callable] = {
    "path_length": lambda ctx, a: float(total_path_length(ctx.tree)),
    "scaled_path_length": lambda ctx, a: ctx.B_n / ctx.n**2 * total_path_length(ctx.tree),
    "height": lambda ctx, a: ctx.B_n / max(ctx.n, 1) * float(ctx.tree.depth.max()),
    "holder": _holder,
    "max_step": _max_step,
    "snake_max": lambda ctx, a: math.sqrt(ctx.B_n / (ctx.n * ctx.disp.second_moment)) * float(np.abs(ctx.snake.Hsp).max()),
    "noncentred_gap": _noncentred_gap,
    "peaks": _peaks,
    "small_jump_max": _small_jump_max,
    "inversion_fluct": _inversion_fluct,
    "progeny": lambda ctx, a: uniform_vertex_progeny(ctx.tree, ctx.rng),
    "branch_violation": _branch,
}


@dataclass
class ReplicaRecord:
    scalars: Dict[str, float]
    arrays: Dict[str, List[float]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"scalars": self.scalars, "arrays": self.arrays}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReplicaRecord":
        d = json.loads(text)
        return cls(d["scalars"], d.get("arrays", {}))


class ReplicaFailure(RuntimeError):
    def __init__(self, n: int, replica: int, cause: SamplingFailure, partial: "EnsembleResult"):
        super().__init__(f"replica {replica} at n={n}: {cause}")
        self.n = n
        self.replica = replica
        self.cause = cause
        self.partial = partial


@dataclass
class Verdict:
    name: str
    passed: bool
    value: float
    criterion: str
    p_value: Optional[float] = None
    provenance: dict = field(default_factory=dict)


def _quantiles(v: np.ndarray) -> dict:
    qs = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)
    return {f"q{int(q * 100):02d}": float(x) for q, x in zip(qs, np.quantile(v, qs))}


@dataclass
class EnsembleResult:
    spec: ExperimentSpec
    records: Dict[Tuple[int, int], ReplicaRecord] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)

    def merge(self, other: "EnsembleResult") -> "EnsembleResult":
        if other.spec.to_dict() != self.spec.to_dict():
            raise ValueError("cannot merge results of different specs")
        clash = {k for k in set(self.records) & set(other.records) if self.records[k] != other.records[k]}
        if clash:
            raise ValueError(f"conflicting records for {sorted(clash)[:3]}")
        return EnsembleResult(self.spec, {**self.records, **other.records}, self.verdicts + other.verdicts)

    def replicas_at(self, n: int) -> List[int]:
        return sorted(i for (m, i) in self.records if m == n)

    def values(self, n: int, stat: str) -> np.ndarray:
        return np.array([self.records[(n, i)].scalars[stat] for i in self.replicas_at(n)])

    def pooled(self, n: int, key: str) -> np.ndarray:
        parts = [self.records[(n, i)].arrays.get(key, []) for i in self.replicas_at(n)]
        return np.array([x for p in parts for x in p], dtype=np.float64)

    @property
    def complete(self) -> bool:
        return len(self.records) == self.spec.replicas * len(self.spec.n_grid)

    def aggregates(self) -> dict:
        out = {}
        for n in self.spec.n_grid:
            per = {}
            for stat in self.spec.stats:
                v = self.values(n, stat)
                if v.size == 0:
                    continue
                finite = v[np.isfinite(v)]
                mean = math.fsum(finite) / finite.size if finite.size else math.nan
                var = math.fsum((finite - mean) ** 2) / (finite.size - 1) if finite.size > 1 else math.nan
                counts, edges = np.histogram(finite, bins=20) if finite.size else (np.zeros(0), np.zeros(0))
                per[stat] = {
                    "n_samples": int(v.size),
                    "mean": mean,
                    "variance": var,
                    "stderr": math.sqrt(var / finite.size) if finite.size > 1 else math.nan,
                    "quantiles": _quantiles(finite) if finite.size else {},
                    "histogram": {"edges": edges.tolist(), "counts": counts.astype(int).tolist()},
                }
            out[str(n)] = per
        return out

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "aggregates": self.aggregates(),
            "verdicts": [asdict(v) for v in self.verdicts],
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "results.json", json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n")
        for n in self.spec.n_grid:
            lines = ["replica," + ",".join(self.spec.stats)]
            for i in self.replicas_at(n):
                sc = self.records[(n, i)].scalars
                lines.append(f"{i}," + ",".join(repr(float(sc[s])) for s in self.spec.stats))
            _atomic_write(out / f"replicas_n{n}.csv", "\n".join(lines) + "\n")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _jsonable(x.item())
    return x


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _checkpoint_path(out_dir, n, i) -> Path:
    return Path(out_dir) / "checkpoints" / f"n{n}" / f"r{i:06d}.json"


def _resolve(spec: ExperimentSpec):
    law = parse_law(spec.offspring)
    norm = normalization_for(law, spec.params.get("normalization"))
    disp = parse_displacement(spec.displacement) if spec.displacement else None
    return law, norm, disp


def run_replica(spec: ExperimentSpec, k: int, i: int, tree_source=None) -> ReplicaRecord:
    law, norm, disp = _resolve(spec)
    n = spec.n_grid[k]
    rng = replica_rng(spec.seed, k, i)
    tree = tree_source(n, rng) if tree_source is not None else sample_tree(law, n, rng)
    n_eff = max(tree.n, 1)
    B_n = norm(n_eff)
    cal = disp.calibrate(n_eff, B_n, law.alpha) if disp is not None else None
    ctx = ReplicaContext(tree, law, B_n, cal, spec.params, rng)
    scalars = {}
    for stat in spec.stats:
        name, _, arg = stat.partition("@")
        scalars[stat] = float(STATISTICS[name](ctx, arg or None))
    return ReplicaRecord(scalars, {k2: np.asarray(v, float).tolist() for k2, v in ctx.arrays.items()})


def _worker(args):
    spec_dict, k, i = args
    spec = ExperimentSpec(**spec_dict)
    try:
        return k, i, run_replica(spec, k, i).to_json(), None
    except SamplingFailure as exc:
        return k, i, None, (str(exc), exc.diagnostics)


def run_ensemble(
    spec: ExperimentSpec,
    workers: int = 1,
    tree_source: Optional[Callable[[int, np.random.Generator], PlaneTree]] = None,
    resume: bool = True,
) -> EnsembleResult:
    """Run every (n, replica) pair of ``spec``.

    With ``spec.out_dir`` set, each replica is checkpointed and existing
    checkpoints are reused when ``resume`` is true; the aggregate files are
    written at the end.  ``tree_source(n, rng)`` replaces the tree sampler
    (single process only).
    """
    result = EnsembleResult(spec)
    todo = []
    for k, n in enumerate(spec.n_grid):
        for i in range(spec.replicas):
            cp = _checkpoint_path(spec.out_dir, n, i) if spec.out_dir else None
            if resume and cp is not None and cp.exists():
                result.records[(n, i)] = ReplicaRecord.from_json(cp.read_text())
            else:
                todo.append((k, i))

    def store(k, i, rec: ReplicaRecord):
        n = spec.n_grid[k]
        result.records[(n, i)] = rec
        if spec.out_dir:
            cp = _checkpoint_path(spec.out_dir, n, i)
            cp.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(cp, rec.to_json())

    if workers > 1 and tree_source is None and len(todo) > 1:
        failure = None
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = [(spec.to_dict(), k, i) for k, i in todo]
            for k, i, text, err in pool.map(_worker, jobs, chunksize=max(1, len(jobs) // (8 * workers))):
                if err is None:
                    store(k, i, ReplicaRecord.from_json(text))
                elif failure is None or (k, i) < failure[:2]:
                    failure = (k, i, err)
        if failure is not None:
            k, i, (msg, diag) = failure
            raise ReplicaFailure(spec.n_grid[k], i, SamplingFailure(msg, **diag), result)
    else:
        for k, i in todo:
            try:
                rec = run_replica(spec, k, i, tree_source)
            except SamplingFailure as exc:
                raise ReplicaFailure(spec.n_grid[k], i, exc, result) from exc
            # round-trip through JSON so fresh and resumed runs agree bit for bit
            store(k, i, ReplicaRecord.from_json(rec.to_json()))

    if spec.out_dir:
        result.write(spec.out_dir)
    return result
