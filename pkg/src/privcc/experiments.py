"""Instance generators, the release-solve-coarsen pipeline, and the matrix runner.

A pipeline run has three strictly separated stages:

* release: the only stage that reads the private graph;
* postprocess: solving and coarsening, which see the released graph only
  (their functions do not take the private graph as a parameter);
* evaluate: recomputes objectives on the true graph for reporting.  This
  read is evaluation-only and every emitted record carries
  ``nonprivate_eval: true`` to make that explicit.

Records are emitted twice: a CSV row with the plot-ready, deterministic
fields (identical bytes for identical seeds), and a JSONL record that
additionally carries wall time and the coarsening report.
"""

from __future__ import annotations

import itertools
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import make_rng, stream_id
from .graphs import (
    Clustering,
    ContractViolation,
    PrivacyParams,
    ReleaseOutput,
    SignedGraph,
    agreement,
    disagreement,
)
from .io import read_edge_list
from .release_unweighted import MergeConfig, UnweightedReleaseConfig, release_unweighted
from .release_weighted import release_weighted
from .solvers import SolverConfig, local_search, solve
from .transforms import (
    CoarsenReport,
    coarsen,
    contract_coupled,
    default_k_prime,
    split_transform,
    unsplit,
)
from .expmech import exponential_mechanism

__all__ = [
    "InstanceSpec",
    "PipelineConfig",
    "ExperimentRecord",
    "generate_instance",
    "run_pipeline",
    "release_stage",
    "postprocess_stage",
    "evaluate_stage",
    "run_matrix",
    "CSV_HEADER",
]


# ---------------------------------------------------------------------------
# Instances


@dataclass(frozen=True)
class InstanceSpec:
    kind: str  # planted | random-signs | path | weighted-random | file
    n: int = 0
    clusters: int = 2
    flip_prob: float = 0.0
    edge_weight: float = 1.0
    weight_dist: str = "unit"  # unit | uniform | exponential
    density: float = 1.0
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        kinds = ("planted", "random-signs", "path", "weighted-random", "file")
        if self.kind not in kinds:
            raise ContractViolation(f"instance kind must be one of {kinds}")
        if self.kind != "file" and self.n < 2:
            raise ContractViolation("need n >= 2")
        if not 0 <= self.flip_prob <= 1:
            raise ContractViolation("flip_prob must be in [0, 1]")
        if self.kind == "planted" and self.clusters < 1:
            raise ContractViolation("planted clusters must be >= 1")
        if self.weight_dist not in ("unit", "uniform", "exponential"):
            raise ContractViolation(f"unknown weight_dist {self.weight_dist!r}")
        if not 0 < self.density <= 1:
            raise ContractViolation("density must be in (0, 1]")
        if self.kind == "file" and not self.path:
            raise ContractViolation("file instances need a path")

    def label(self) -> str:
        if self.kind == "file":
            return f"file({os.path.basename(self.path or '')})"
        if self.kind == "planted":
            return f"planted(n={self.n},k={self.clusters},p={self.flip_prob},seed={self.seed})"
        if self.kind == "path":
            return f"path(n={self.n},w={self.edge_weight},seed={self.seed})"
        if self.kind == "weighted-random":
            return (
                f"weighted-random(n={self.n},dist={self.weight_dist},"
                f"density={self.density},seed={self.seed})"
            )
        return f"random-signs(n={self.n},seed={self.seed})"


def generate_instance(spec: InstanceSpec) -> tuple[SignedGraph, Clustering | None]:
    """Materialize an instance; planted instances also return the truth."""
    rng = make_rng(spec.seed, "instance", spec.kind, spec.n)
    if spec.kind == "file":
        return read_edge_list(spec.path), None
    n = spec.n
    if spec.kind == "planted":
        labels = (np.arange(n) * spec.clusters) // n
        truth = Clustering(labels)
        pu, pv = np.triu_indices(n, 1)
        agree = labels[pu] == labels[pv]
        flip = rng.random(pu.size) < spec.flip_prob
        positive = agree ^ flip
        pos = positive.astype(np.float64)
        return (
            SignedGraph(n, pu, pv, pos, 1.0 - pos, complete=True),
            truth,
        )
    if spec.kind == "random-signs":
        pu, pv = np.triu_indices(n, 1)
        pos = (rng.random(pu.size) < 0.5).astype(np.float64)
        return SignedGraph(n, pu, pv, pos, 1.0 - pos, complete=True), None
    if spec.kind == "path":
        sigma = (rng.integers(0, 2, size=n - 1) * 2 - 1).astype(np.int8)
        from .packing import path_graph

        return path_graph(sigma, spec.edge_weight), None
    # weighted-random
    pu, pv = np.triu_indices(n, 1)
    present = rng.random(pu.size) < spec.density
    pu, pv = pu[present], pv[present]
    if spec.weight_dist == "unit":
        w = np.full(pu.size, spec.edge_weight)
    elif spec.weight_dist == "uniform":
        w = rng.random(pu.size) * spec.edge_weight
    else:
        w = rng.exponential(spec.edge_weight, size=pu.size)
    positive = rng.random(pu.size) < 0.5
    keep = w > 0
    pu, pv, w, positive = pu[keep], pv[keep], w[keep], positive[keep]
    pos = np.where(positive, w, 0.0)
    neg = np.where(positive, 0.0, w)
    return SignedGraph(n, pu, pv, pos, neg), None


# ---------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class PipelineConfig:
    mechanism: str = "unweighted-laplace"  # | weighted-laplace | exponential
    solver: SolverConfig = field(default_factory=SolverConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)
    engine: str = "laplace"
    coarsen_enabled: bool = True
    coarsen_k: int | None = None  # None -> ceil(n^(1/4))
    refine_after_coarsen: bool = True
    zero_noise: bool = False  # non-private passthrough, pipeline tests only

    def __post_init__(self):
        if self.mechanism not in ("unweighted-laplace", "weighted-laplace", "exponential"):
            raise ContractViolation(f"unknown mechanism {self.mechanism!r}")

    def mechanism_id(self) -> str:
        return self.mechanism + ("+zero-noise" if self.zero_noise else "")

    def solver_id(self) -> str:
        cfg = self.solver
        k = f",k<={cfg.max_clusters}" if cfg.max_clusters else ""
        return f"{cfg.objective}(restarts={cfg.restarts}{k})"


@dataclass(frozen=True)
class ExperimentRecord:
    cell: int
    instance: str
    mechanism: str
    solver: str
    epsilon: float
    delta: float
    seed: int
    err: float
    agr: float
    k_out: int
    planted_cost: float | None
    err_on_released: float
    eta_hat: float
    lambda_residual: float | None
    wall_ms: float = 0.0
    coarsen_report: dict | None = None
    nonprivate_eval: bool = True

    def csv_row(self) -> str:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return repr(x)
            return str(x)

        return ",".join(
            fmt(v)
            for v in (
                self.cell,
                self.instance,
                self.mechanism,
                self.solver,
                self.epsilon,
                self.delta,
                self.seed,
                self.err,
                self.agr,
                self.k_out,
                self.planted_cost,
                self.err_on_released,
                self.eta_hat,
                self.lambda_residual,
            )
        )

    def to_json(self) -> str:
        payload = {
            "cell": self.cell,
            "instance": self.instance,
            "mechanism": self.mechanism,
            "solver": self.solver,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "seed": self.seed,
            "err": self.err,
            "agr": self.agr,
            "k_out": self.k_out,
            "planted_cost": self.planted_cost,
            "err_on_released": self.err_on_released,
            "eta_hat": self.eta_hat,
            "lambda_residual": self.lambda_residual,
            "wall_ms": self.wall_ms,
            "coarsen_report": self.coarsen_report,
            "nonprivate_eval": self.nonprivate_eval,
        }
        return json.dumps(payload, sort_keys=True)


CSV_HEADER = (
    "cell,instance,mechanism,solver,epsilon,delta,seed,err,agr,k_out,"
    "planted_cost,err_on_released,eta_hat,lambda_residual"
)


def release_stage(
    graph: SignedGraph, params: PrivacyParams, config: PipelineConfig, seed: int
) -> tuple[SignedGraph, ReleaseOutput]:
    """The only stage with access to the private graph."""
    rng = make_rng(seed, "release")
    if config.mechanism == "unweighted-laplace":
        rc = UnweightedReleaseConfig(
            merge=config.merge, unsafe_zero_noise=config.zero_noise, seed=seed
        )
        return release_unweighted(graph, params, rc, rng)
    if config.mechanism == "weighted-laplace":
        engine = "zero-noise-test" if config.zero_noise else config.engine
        return release_weighted(graph, params, engine, rng, seed=seed)
    raise ContractViolation(f"mechanism {config.mechanism!r} has no release stage")


def postprocess_stage(
    released: SignedGraph, config: PipelineConfig, seed: int
) -> tuple[Clustering, CoarsenReport | None]:
    """Solve and coarsen on the released graph; never sees the input."""
    solver_cfg = replace(config.solver, seed=seed)
    if config.mechanism == "weighted-laplace":
        h_split, mapping = split_transform(released)
        core = contract_coupled(h_split, mapping)
        meta = solve(core, solver_cfg)
        lifted = Clustering(np.concatenate([meta.assignment, meta.assignment]))
        clustering = unsplit(lifted, mapping)
    else:
        clustering = solve(released, solver_cfg)
    report: CoarsenReport | None = None
    if config.coarsen_enabled:
        kp = config.coarsen_k or default_k_prime(released.n)
        max_w = float(
            max(released.pos_w.max(initial=0.0), released.neg_w.max(initial=0.0))
        )
        clustering, report = coarsen(clustering, released.n, kp, max_w)
        if config.refine_after_coarsen and clustering.k < released.n:
            # polish within the coarsened cluster budget; an unrestricted
            # solution tends to overfit release noise, and its merged form
            # usually is not even locally optimal at its own cluster count
            polish = replace(
                config.solver, seed=seed, max_clusters=clustering.k
            )
            clustering = local_search(released, clustering, polish)
    return clustering, report


def evaluate_stage(
    graph: SignedGraph,
    clustering: Clustering,
    released: SignedGraph,
    truth: Clustering | None,
) -> dict:
    """Evaluation-only reads of the private graph, flagged in the record."""
    err = disagreement(clustering, graph)
    agr = agreement(clustering, graph)
    total = graph.total_weight
    if abs((err + agr) - total) > 1e-9 * max(total, 1.0):
        raise AssertionError("conservation violated in evaluation")
    err_h = disagreement(clustering, released)
    return {
        "err": err,
        "agr": agr,
        "k_out": clustering.k,
        "planted_cost": disagreement(truth, graph) if truth is not None else None,
        "err_on_released": err_h,
        "eta_hat": abs(err - err_h),
    }


def run_pipeline(
    graph: SignedGraph,
    params: PrivacyParams,
    config: PipelineConfig,
    seed: int,
    truth: Clustering | None = None,
    instance_label: str = "",
    cell: int = 0,
) -> tuple[Clustering, ExperimentRecord]:
    """Release, solve, coarsen, then evaluate against the true graph."""
    t0 = time.perf_counter()
    if config.mechanism == "exponential":
        rng = make_rng(seed, "exp-mech")
        clustering = exponential_mechanism(graph, params, config.solver.objective, rng)
        released = graph  # no synthetic graph in this route
        audit_lambda = None
        report = None
    else:
        released, audit = release_stage(graph, params, config, seed)
        clustering, report = postprocess_stage(released, config, seed)
        audit_lambda = audit.lambda_residual
    metrics = evaluate_stage(graph, clustering, released, truth)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    record = ExperimentRecord(
        cell=cell,
        instance=instance_label,
        mechanism=config.mechanism_id(),
        solver=config.solver_id(),
        epsilon=params.epsilon,
        delta=params.delta,
        seed=seed,
        err=metrics["err"],
        agr=metrics["agr"],
        k_out=metrics["k_out"],
        planted_cost=metrics["planted_cost"],
        err_on_released=metrics["err_on_released"],
        eta_hat=metrics["eta_hat"],
        lambda_residual=audit_lambda,
        wall_ms=wall_ms,
        coarsen_report=report.to_dict() if report is not None else None,
    )
    return clustering, record


# ---------------------------------------------------------------------------
# Matrix runner


def _pipeline_from_dict(d: dict) -> PipelineConfig:
    solver = SolverConfig(**d.get("solver", {}))
    merge = MergeConfig(**d.get("merge", {}))
    keys = {k: v for k, v in d.items() if k not in ("solver", "merge")}
    return PipelineConfig(solver=solver, merge=merge, **keys)


def run_matrix(
    matrix: dict,
    csv_path: str,
    jsonl_path: str | None = None,
    resume: bool = True,
) -> list[ExperimentRecord]:
    """Cartesian product of instances, epsilons, pipelines and seed replicates.

    Cells are enumerated in deterministic order and written as they
    finish through a single writer.  With ``resume``, cells whose ids
    already appear in the CSV are skipped, so an interrupted run picks up
    where it left off and converges to the same file.  Failures are
    reported per cell on stderr and do not stop the matrix.
    """
    master_seed = int(matrix.get("master_seed", 0))
    specs = [InstanceSpec(**s) for s in matrix["instances"]]
    epsilons = [float(e) for e in matrix["epsilons"]]
    delta = float(matrix.get("delta", 0.0))
    pipelines = [_pipeline_from_dict(p) for p in matrix["pipelines"]]
    replicates = [int(s) for s in matrix.get("seeds", [0])]

    done: set[int] = set()
    if resume and os.path.exists(csv_path):
        with open(csv_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("cell,"):
                    done.add(int(line.split(",", 1)[0]))
    mode = "a" if (resume and os.path.exists(csv_path)) else "w"
    records: list[ExperimentRecord] = []
    with open(csv_path, mode, encoding="utf-8") as csv_fh:
        jsonl_fh = open(jsonl_path, mode, encoding="utf-8") if jsonl_path else None
        try:
            if mode == "w":
                csv_fh.write(CSV_HEADER + "\n")
            cells = itertools.product(specs, epsilons, pipelines, replicates)
            for cell_index, (spec, eps, pipe, rep) in enumerate(cells):
                if cell_index in done:
                    continue
                try:
                    graph, truth = generate_instance(spec)
                    cell_seed = stream_id("cell", master_seed, cell_index) >> 1
                    _, record = run_pipeline(
                        graph,
                        PrivacyParams(eps, delta),
                        pipe,
                        cell_seed,
                        truth=truth,
                        instance_label=spec.label(),
                        cell=cell_index,
                    )
                except Exception as exc:  # surfaced per cell, matrix continues
                    print(f"cell {cell_index} failed: {exc}", file=sys.stderr)
                    continue
                csv_fh.write(record.csv_row() + "\n")
                csv_fh.flush()
                if jsonl_fh:
                    jsonl_fh.write(record.to_json() + "\n")
                    jsonl_fh.flush()
                records.append(record)
        finally:
            if jsonl_fh:
                jsonl_fh.close()
    return records
