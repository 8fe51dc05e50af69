"""Command-line front end.

Subcommands: generate, release, cluster, pipeline, matrix, verify-dp,
lowerbound, audit-cuts.  Exit codes: 0 ok, 1 check failed, 2 contract
violation, 3 refusal (size limits).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._rng import make_rng
from .graphs import (
    Clustering,
    ContractViolation,
    PrivacyParams,
    SizeRefusal,
    agreement,
    disagreement,
)
from .io import read_edge_list, write_edge_list
from .release_unweighted import MergeConfig, UnweightedReleaseConfig, release_unweighted
from .release_weighted import release_weighted, sampled_cut_distance
from .graphs import WeightedChannel
from .expmech import exact_output_distribution, exponential_mechanism
from .experiments import (
    CSV_HEADER,
    InstanceSpec,
    PipelineConfig,
    generate_instance,
    run_matrix,
    run_pipeline,
)
from .packing import PACKING_CSV_HEADER, brute_force_code, packing_experiment
from .solvers import (
    MAX_AGREEMENT,
    MIN_DISAGREEMENT,
    SolverConfig,
    local_search,
    pivot_kwikcluster,
    solve,
    solve_exact,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=str, default=None)


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", default="planted",
                   choices=["planted", "random-signs", "path", "weighted-random"])
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=2, help="planted cluster count")
    p.add_argument("--p", type=float, default=0.0, help="planted flip probability")
    p.add_argument("--weight-dist", default="unit",
                   choices=["unit", "uniform", "exponential"])
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--edge-weight", type=float, default=1.0)


def _spec_from_args(args) -> InstanceSpec:
    return InstanceSpec(
        kind=args.kind,
        n=args.n,
        clusters=args.k,
        flip_prob=args.p,
        weight_dist=args.weight_dist,
        density=args.density,
        edge_weight=args.edge_weight,
        seed=args.seed,
    )


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args) -> int:
    spec = _spec_from_args(args)
    graph, truth = generate_instance(spec)
    if args.output:
        write_edge_list(graph, args.output)
    else:
        from .io import format_edge_list

        sys.stdout.write(format_edge_list(graph))
    if args.truth_output and truth is not None:
        with open(args.truth_output, "w", encoding="utf-8") as fh:
            json.dump({"n": truth.n, "k": truth.k,
                       "assignment": truth.assignment.tolist()}, fh)
    return 0


def _cmd_release(args) -> int:
    graph = read_edge_list(args.input)
    params = PrivacyParams(args.epsilon, args.delta)
    rng = make_rng(args.seed, "release")
    if args.mechanism == "unweighted-laplace":
        cfg = UnweightedReleaseConfig(
            merge=MergeConfig(strategy=args.merge_strategy,
                              constraint_budget=args.constraint_budget,
                              iterations=args.merge_iterations),
            seed=args.seed,
        )
        released, audit = release_unweighted(graph, params, cfg, rng)
    else:
        released, audit = release_weighted(graph, params, args.engine, rng,
                                           seed=args.seed)
    if args.output:
        write_edge_list(released, args.output)
    report = json.dumps(audit.audit_dict(), sort_keys=True)
    if args.audit:
        with open(args.audit, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    else:
        print(report)
    return 0


def _cmd_cluster(args) -> int:
    graph = read_edge_list(args.input)
    cfg = SolverConfig(
        objective=MAX_AGREEMENT if args.objective == "max-agreement" else MIN_DISAGREEMENT,
        max_clusters=args.k,
        seed=args.seed,
        restarts=args.restarts,
    )
    if args.solver == "exact":
        clustering = solve_exact(graph, cfg)
    elif args.solver == "pivot":
        clustering = pivot_kwikcluster(graph, make_rng(args.seed, "pivot"))
    elif args.solver == "local-search":
        start = pivot_kwikcluster(graph, make_rng(args.seed, "pivot"))
        clustering = local_search(graph, start, cfg)
    else:
        clustering = solve(graph, cfg)
    payload = {
        "n": clustering.n,
        "k": clustering.k,
        "assignment": clustering.assignment.tolist(),
        "disagreement": disagreement(clustering, graph),
        "agreement": agreement(clustering, graph),
    }
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.output)
    return 0


def _cmd_pipeline(args) -> int:
    if args.input:
        graph, truth = read_edge_list(args.input), None
        label = f"file({args.input})"
    else:
        spec = _spec_from_args(args)
        graph, truth = generate_instance(spec)
        label = spec.label()
    config = PipelineConfig(
        mechanism=args.mechanism,
        solver=SolverConfig(max_clusters=args.k, restarts=args.restarts),
        engine=args.engine,
        coarsen_enabled=not args.no_coarsen,
        zero_noise=args.zero_noise,
    )
    params = PrivacyParams(args.epsilon, args.delta)
    _, record = run_pipeline(graph, params, config, args.seed, truth=truth,
                             instance_label=label)
    if args.format == "jsonl":
        _emit(record.to_json() + "\n", args.output)
    else:
        _emit(CSV_HEADER + "\n" + record.csv_row() + "\n", args.output)
    return 0


def _cmd_matrix(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        matrix = json.load(fh)
    records = run_matrix(matrix, args.output, jsonl_path=args.jsonl,
                         resume=not args.no_resume)
    print(f"wrote {len(records)} records to {args.output}", file=sys.stderr)
    return 0


def _cmd_verify_dp(args) -> int:
    """Exact neighbor-by-neighbor privacy check of the exponential mechanism."""
    n = args.n
    worst = 0.0
    for inst in range(args.instances):
        rng = make_rng(args.seed, "verify-dp", inst)
        pu, pv = np.triu_indices(n, 1)
        pos = (rng.random(pu.size) < 0.5).astype(np.float64)
        from .graphs import SignedGraph

        base = SignedGraph(n, pu, pv, pos, 1.0 - pos, complete=True)
        params = PrivacyParams(args.epsilon)
        dist = exact_output_distribution(base, params)
        for e in range(pu.size):
            flipped_pos = pos.copy()
            flipped_pos[e] = 1.0 - flipped_pos[e]
            other = SignedGraph(n, pu, pv, flipped_pos, 1.0 - flipped_pos, complete=True)
            dist2 = exact_output_distribution(other, params)
            for key, prob in dist.items():
                ratio = abs(np.log(prob) - np.log(dist2[key]))
                worst = max(worst, ratio)
    bound = args.epsilon + 1e-9
    worst = float(worst)
    print(json.dumps({"epsilon": args.epsilon, "instances": args.instances,
                      "max_log_ratio": worst, "bound": bound,
                      "ok": bool(worst <= bound)}))
    return 0 if worst <= bound else 1


def _cmd_lowerbound(args) -> int:
    rng = make_rng(args.seed, "lowerbound")
    codebook = brute_force_code(args.n, args.beta, args.target, rng,
                                budget=args.budget)
    params = PrivacyParams(args.epsilon)

    if args.mechanism == "exponential":
        def mech(graph, p, r):
            return exponential_mechanism(graph, p, MIN_DISAGREEMENT, r)
    else:  # non-private reference point
        def mech(graph, p, r):
            return solve(graph, SolverConfig())

    rows = packing_experiment(mech, params, args.edge_weight, codebook,
                              args.reps, rng)
    lines = [PACKING_CSV_HEADER]
    for row in rows:
        lines.append(f"{row['codeword']},{row['mean_err']!r},"
                     f"{row['frac_in_B']!r},{row['theory_bound']!r}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_audit_cuts(args) -> int:
    graph = read_edge_list(args.input)
    params = PrivacyParams(args.epsilon, args.delta)
    rng = make_rng(args.seed, "audit-cuts")
    released, audit = release_weighted(graph, params, args.engine, rng,
                                       seed=args.seed)
    report = {}
    for sign, name in ((1, "plus"), (-1, "minus")):
        a = WeightedChannel(graph.n, graph.channel_flat(sign))
        b = WeightedChannel(graph.n, released.channel_flat(sign))
        report[f"cut_distance_{name}"] = sampled_cut_distance(
            a, b, args.samples, make_rng(args.seed, "audit-cuts", name)
        )
    report["epsilon"] = args.epsilon
    report["delta"] = args.delta
    report["engine"] = args.engine
    _emit(json.dumps(report, sort_keys=True) + "\n", args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="privcc",
                                 description="Private correlation clustering toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance as an edge list")
    _add_common(p)
    _instance_args(p)
    p.add_argument("--truth-output", type=str, default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("release", help="privately release a graph")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--mechanism", default="unweighted-laplace",
                   choices=["unweighted-laplace", "weighted-laplace"])
    p.add_argument("--engine", default="laplace")
    p.add_argument("--merge-strategy", default="sampled-lp",
                   choices=["sampled-lp", "per-edge"])
    p.add_argument("--constraint-budget", type=int, default=None)
    p.add_argument("--merge-iterations", type=int, default=2000)
    p.add_argument("--audit", type=str, default=None)
    p.set_defaults(func=_cmd_release)

    p = sub.add_parser("cluster", help="cluster a graph (non-private)")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--solver", default="auto",
                   choices=["auto", "exact", "pivot", "local-search"])
    p.add_argument("--objective", default="min-disagreement",
                   choices=["min-disagreement", "max-agreement"])
    p.add_argument("--k", type=int, default=None, help="max cluster count")
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("pipeline", help="release then cluster then evaluate")
    _add_common(p)
    _instance_args(p)
    p.add_argument("--input", type=str, default=None)
    p.add_argument("--mechanism", default="unweighted-laplace",
                   choices=["unweighted-laplace", "weighted-laplace", "exponential"])
    p.add_argument("--engine", default="laplace")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--no-coarsen", action="store_true")
    p.add_argument("--zero-noise", action="store_true",
                   help="UNSAFE: disables privacy, for plumbing tests")
    p.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("matrix", help="run an experiment matrix from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True, help="CSV path")
    p.add_argument("--jsonl", type=str, default=None)
    p.add_argument("--no-resume", action="store_true")
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("verify-dp",
                       help="machine-check the exponential mechanism's privacy")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify_dp)

    p = sub.add_parser("lowerbound", help="packing experiment on path instances")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--target", type=int, default=16)
    p.add_argument("--budget", type=int, default=10**5)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--edge-weight", type=float, default=1.0)
    p.add_argument("--mechanism", default="exponential",
                   choices=["exponential", "nonprivate"])
    p.set_defaults(func=_cmd_lowerbound)

    p = sub.add_parser("audit-cuts",
                       help="release a weighted graph and audit cut distances")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--engine", default="laplace")
    p.add_argument("--samples", type=int, default=256)
    p.set_defaults(func=_cmd_audit_cuts)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2
    except SizeRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
