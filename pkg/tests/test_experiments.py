import json
import math

import numpy as np
import pytest

from privcc import (
    Clustering,
    ContractViolation,
    PrivacyParams,
    SignedGraph,
    disagreement,
    solve,
)
from privcc._rng import make_rng
from privcc.experiments import (
    CSV_HEADER,
    InstanceSpec,
    PipelineConfig,
    evaluate_stage,
    generate_instance,
    release_stage,
    run_matrix,
    run_pipeline,
)
from privcc.solvers import SolverConfig


class TestGenerate:
    def test_planted_p0_is_consistent(self):
        g, truth = generate_instance(InstanceSpec(kind="planted", n=20, clusters=3))
        assert disagreement(truth, g) == 0.0
        assert g.complete and g.is_unweighted

    def test_planted_flip_cost_expectation(self):
        # disagreement of the truth counts exactly the flipped pairs
        total, seeds = 0.0, 400
        pairs = 100 * 99 / 2
        for seed in range(seeds):
            g, truth = generate_instance(
                InstanceSpec(kind="planted", n=100, clusters=4, flip_prob=0.05, seed=seed)
            )
            total += disagreement(truth, g)
        mean = total / seeds
        sigma = math.sqrt(pairs * 0.05 * 0.95 / seeds)
        assert abs(mean - 0.05 * pairs) <= 3 * sigma

    def test_planted_half_flip_is_coin_toss(self):
        g, truth = generate_instance(
            InstanceSpec(kind="planted", n=60, clusters=2, flip_prob=0.5, seed=1)
        )
        pairs = 60 * 59 / 2
        dev = abs(disagreement(truth, g) - pairs / 2)
        assert dev <= 4 * math.sqrt(pairs) / 2

    def test_kinds_and_validation(self):
        g, _ = generate_instance(InstanceSpec(kind="random-signs", n=9, seed=2))
        assert g.complete
        g, _ = generate_instance(InstanceSpec(kind="path", n=9, seed=2))
        assert g.edge_count == 8
        g, _ = generate_instance(
            InstanceSpec(kind="weighted-random", n=9, weight_dist="exponential",
                         density=0.5, seed=2)
        )
        assert not g.complete
        with pytest.raises(ContractViolation):
            InstanceSpec(kind="nope", n=5)
        with pytest.raises(ContractViolation):
            InstanceSpec(kind="planted", n=1)
        with pytest.raises(ContractViolation):
            InstanceSpec(kind="planted", n=5, flip_prob=1.5)

    def test_file_roundtrip(self, tmp_path):
        from privcc.io import write_edge_list

        g, _ = generate_instance(InstanceSpec(kind="random-signs", n=7, seed=3))
        p = tmp_path / "g.txt"
        write_edge_list(g, p)
        g2, truth = generate_instance(InstanceSpec(kind="file", path=str(p)))
        assert truth is None and g2.n == 7

    def test_generation_deterministic(self):
        spec = InstanceSpec(kind="planted", n=30, clusters=3, flip_prob=0.2, seed=9)
        g1, _ = generate_instance(spec)
        g2, _ = generate_instance(spec)
        assert np.array_equal(g1.pos_w, g2.pos_w)


class TestPipeline:
    def test_zero_noise_exact_recovers_planted(self):
        g, truth = generate_instance(InstanceSpec(kind="planted", n=10, clusters=2))
        c, rec = run_pipeline(
            g,
            PrivacyParams(1.0),
            PipelineConfig(zero_noise=True, coarsen_enabled=False),
            seed=4,
            truth=truth,
        )
        assert rec.err == 0.0
        assert rec.planted_cost == 0.0

    def test_record_conservation_and_fields(self):
        spec = InstanceSpec(kind="planted", n=24, clusters=3, flip_prob=0.1, seed=5)
        g, truth = generate_instance(spec)
        c, rec = run_pipeline(
            g, PrivacyParams(1.0), PipelineConfig(), seed=6, truth=truth,
            instance_label=spec.label(),
        )
        assert rec.err + rec.agr == g.total_weight
        assert rec.nonprivate_eval is True
        assert rec.lambda_residual is not None
        assert rec.eta_hat == abs(rec.err - rec.err_on_released)
        assert rec.k_out == c.k
        assert rec.wall_ms > 0

    def test_split_route_transparency(self):
        # weighted route with the passthrough engine equals solving directly
        spec = InstanceSpec(kind="weighted-random", n=14, weight_dist="uniform",
                            density=0.7, seed=7)
        g, _ = generate_instance(spec)
        c, rec = run_pipeline(
            g,
            PrivacyParams(0.4, 0.1),
            PipelineConfig(mechanism="weighted-laplace", zero_noise=True,
                           coarsen_enabled=False),
            seed=8,
        )
        direct = solve(g, SolverConfig(seed=8))
        assert c == direct
        assert rec.err == disagreement(direct, g)

    def test_exponential_route(self):
        g, truth = generate_instance(InstanceSpec(kind="random-signs", n=8, seed=9))
        c, rec = run_pipeline(
            g, PrivacyParams(5.0), PipelineConfig(mechanism="exponential",
                                                  coarsen_enabled=False),
            seed=10,
        )
        assert rec.mechanism == "exponential"
        assert rec.err + rec.agr == g.total_weight

    def test_coarsening_caps_cluster_count(self):
        g, truth = generate_instance(
            InstanceSpec(kind="random-signs", n=40, seed=11)
        )
        c, rec = run_pipeline(
            g, PrivacyParams(0.5), PipelineConfig(coarsen_k=2), seed=12
        )
        assert rec.k_out <= 5  # 2k' + 1
        # the post-coarsen polish may drop clusters but never adds any
        assert rec.coarsen_report is None or rec.k_out <= rec.coarsen_report["k_after"]

    def test_deterministic_records(self):
        spec = InstanceSpec(kind="planted", n=20, clusters=2, flip_prob=0.1, seed=13)
        g, truth = generate_instance(spec)
        _, r1 = run_pipeline(g, PrivacyParams(1.0), PipelineConfig(), 14, truth=truth)
        _, r2 = run_pipeline(g, PrivacyParams(1.0), PipelineConfig(), 14, truth=truth)
        assert r1.csv_row() == r2.csv_row()


class CountingGraph(SignedGraph):
    """Counts every read of the payload arrays."""

    PAYLOAD = ("pair_u", "pair_v", "pos_w", "neg_w")

    def __init__(self, base: SignedGraph):
        super().__init__(
            base.n, base.pair_u, base.pair_v, base.pos_w, base.neg_w,
            complete=base.complete, parallel_ok=base.parallel_ok,
        )
        object.__setattr__(self, "reads", 0)

    def __getattribute__(self, name):
        if name in CountingGraph.PAYLOAD:
            object.__setattr__(self, "reads", object.__getattribute__(self, "reads") + 1)
        return object.__getattribute__(self, name)


class TestPrivacyHygiene:
    def test_postprocessing_never_touches_input(self):
        # every private-graph read of the full pipeline is accounted for by
        # the release stage plus the evaluation stage; the solving stage in
        # between reads nothing
        spec = InstanceSpec(kind="planted", n=16, clusters=2, flip_prob=0.1, seed=15)
        base, truth = generate_instance(spec)
        params = PrivacyParams(1.0)
        config = PipelineConfig()
        seed = 16

        g_release = CountingGraph(base)
        released, audit = release_stage(g_release, params, config, seed)

        g_eval = CountingGraph(base)
        from privcc.experiments import postprocess_stage

        clustering, _ = postprocess_stage(released, config, seed)
        evaluate_stage(g_eval, clustering, released, truth)

        g_full = CountingGraph(base)
        run_pipeline(g_full, params, config, seed, truth=truth)
        assert g_full.reads == g_release.reads + g_eval.reads


class TestMatrix:
    MATRIX = {
        "master_seed": 3,
        "instances": [
            {"kind": "planted", "n": 10, "clusters": 2, "flip_prob": 0.1, "seed": 1},
            {"kind": "random-signs", "n": 9, "seed": 2},
        ],
        "epsilons": [0.5, 2.0],
        "pipelines": [{"mechanism": "unweighted-laplace", "merge": {"iterations": 60}}],
        "seeds": [0, 1, 2],
    }

    def test_cell_count(self, tmp_path):
        csv = tmp_path / "out.csv"
        records = run_matrix(self.MATRIX, str(csv), str(tmp_path / "out.jsonl"))
        assert len(records) == 2 * 2 * 1 * 3
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 13

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_matrix(self.MATRIX, str(a), None)
        run_matrix(self.MATRIX, str(b), None)
        assert a.read_bytes() == b.read_bytes()

    def test_resume_completes_interrupted_run(self, tmp_path):
        full, partial = tmp_path / "full.csv", tmp_path / "partial.csv"
        run_matrix(self.MATRIX, str(full), None)
        lines = full.read_text().splitlines(keepends=True)
        partial.write_text("".join(lines[:5]))  # header + 4 cells
        run_matrix(self.MATRIX, str(partial), None, resume=True)
        assert partial.read_bytes() == full.read_bytes()

    def test_failures_surfaced_and_skipped(self, tmp_path, capsys):
        bad = dict(self.MATRIX)
        bad["instances"] = [
            {"kind": "weighted-random", "n": 8, "seed": 1},  # wrong mechanism
            {"kind": "planted", "n": 10, "clusters": 2, "seed": 2},
        ]
        bad["epsilons"] = [1.0]
        bad["seeds"] = [0]
        csv = tmp_path / "c.csv"
        records = run_matrix(bad, str(csv), None)
        assert len(records) == 1
        assert "failed" in capsys.readouterr().err

    def test_jsonl_carries_full_record(self, tmp_path):
        csv, jsonl = tmp_path / "d.csv", tmp_path / "d.jsonl"
        run_matrix(self.MATRIX, str(csv), str(jsonl))
        row = json.loads(jsonl.read_text().splitlines()[0])
        assert row["nonprivate_eval"] is True
        assert "wall_ms" in row and "wall_ms" not in CSV_HEADER
