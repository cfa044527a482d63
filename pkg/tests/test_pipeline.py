import numpy as np
import pytest

from helpers import complete_graph, cycle_graph, random_gnp, star_graph
from vcgap.exact_oracle import ExactResult, exact_vc
from vcgap.graph_core import CoverPartition, Graph, duplicate_join, verify_cover
from vcgap.pipeline import (
    STEP_ARBITRARY_PRIME,
    STEP_BASELINE,
    STEP_BIPARTITE,
    STEP_CUT_PRIME,
    STEP_EDGELESS,
    STEP_SDP_FALLBACK,
    STEP_THEOREM6_FALLBACK,
    PipelineConfig,
    RunTrace,
    _cut_copy,
    evaluate_ratio,
    mahdis_run,
    two_approx_baseline,
)
from vcgap.rounding_geometry import Thresholds
from vcgap.sdp_solve import SolverConfig, VectorEmbedding


def run_with_oracle(g: Graph, cfg: PipelineConfig = PipelineConfig()) -> RunTrace:
    return evaluate_ratio(mahdis_run(g, cfg), exact_vc(g), cfg.tau_ratio)


def trace_key(trace: RunTrace) -> dict:
    doc = trace.to_dict()
    doc.pop("timings")
    return doc


class TestMahdisRun:
    def test_star_kernelizes_to_center(self):
        trace = run_with_oracle(star_graph(3))
        assert trace.nt_used and trace.step_taken == STEP_EDGELESS
        assert trace.in_cover == (1,)
        assert trace.empirical_ratio == 1.0

    def test_k3_feasible_with_ratio_at_most_three_halves(self):
        trace = run_with_oracle(complete_graph(3))
        assert trace.z_lp == pytest.approx(1.5)
        assert not trace.nt_used
        assert 2 <= trace.cover_size <= 3
        assert trace.empirical_ratio <= 1.5

    def test_edgeless_ratio_defined_as_one(self):
        trace = run_with_oracle(Graph.build(range(4), []))
        assert trace.step_taken == STEP_EDGELESS
        assert trace.cover_size == 0 and trace.empirical_ratio == 1.0

    def test_empty_graph(self):
        trace = run_with_oracle(Graph.build([], []))
        assert trace.cover_size == 0 and trace.empirical_ratio == 1.0

    def test_cover_always_verifies_on_original(self):
        rng = np.random.default_rng(107)
        for _ in range(20):
            n = int(rng.integers(1, 13))
            g = random_gnp(n, float(rng.random() * 0.85 + 0.05), seed=int(rng.integers(1 << 30)))
            trace = mahdis_run(g)
            partition = CoverPartition.from_cover(g, trace.in_cover)
            ok, _ = verify_cover(g, partition)
            assert ok

    def test_kernelization_gate(self):
        # stars push the relaxation below n/2; the complete graph sits at n/2
        assert mahdis_run(star_graph(4)).nt_used
        assert not mahdis_run(complete_graph(4)).nt_used

    def test_deterministic_traces(self):
        g = random_gnp(10, 0.4, seed=303)
        assert trace_key(mahdis_run(g)) == trace_key(mahdis_run(g))

    def test_sdp_nonconvergence_falls_back_to_matching(self):
        cfg = PipelineConfig(sdp=SolverConfig(max_iter=3, check_every=3))
        trace = run_with_oracle(cycle_graph(5), cfg)
        assert trace.step_taken == STEP_SDP_FALLBACK
        assert "sdp_nonconverged" in trace.flags
        ok, _ = verify_cover(cycle_graph(5), CoverPartition.from_cover(cycle_graph(5), trace.in_cover))
        assert ok

    def test_theorem6_violation_path_on_widened_band(self):
        # The doubled five-cycle relaxes to uniform products around 0.553;
        # widening the band makes both conditions hold while the band
        # subgraph stays the odd cycle itself, so the probe must fire.
        cfg = PipelineConfig(
            thresholds=Thresholds(below_half_fraction=0.5, above_band_fraction=0.5, epsilon=0.1)
        )
        trace = run_with_oracle(cycle_graph(5), cfg)
        assert trace.step_taken == STEP_THEOREM6_FALLBACK
        assert "theorem6_violation" in trace.flags
        probe = trace.theorem6_probe
        assert probe is not None and not probe["bipartite"]
        assert len(probe["cycle"]) == 5
        assert len(probe["per_edge_defects"]) == 5
        assert trace.empirical_ratio <= 2.0

    def test_bipartite_step_on_widened_band(self):
        # The five-cycle with one chord solves to a product spread around
        # (0.60, 0.70, 0.50, 0.50, 0.70); a band topping out at 0.65 slices
        # off a bipartite subgraph whatever the sign noise at the 0.50
        # vertices, and generous fractions keep both conditions holding.
        cfg = PipelineConfig(
            thresholds=Thresholds(below_half_fraction=0.5, above_band_fraction=0.5, epsilon=0.15)
        )
        g = Graph.build(range(1, 6), [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (2, 5)])
        trace = run_with_oracle(g, cfg)
        assert trace.step_taken == STEP_BIPARTITE
        assert trace.empirical_ratio <= 2.0
        ok, _ = verify_cover(g, CoverPartition.from_cover(g, trace.in_cover))
        assert ok
        assert trace.certificates and trace.certificates[-1]["source"] == "theorem3"

    def test_arbitrary_step_carries_certificate(self):
        trace = run_with_oracle(complete_graph(3))
        assert trace.step_taken == STEP_ARBITRARY_PRIME
        assert trace.certificates
        cert = trace.certificates[0]
        assert cert["source"] == "theorem2"
        assert cert["claimed_ratio_bound"] < 2.0
        assert "theorem4_lower_bound" in cert["inputs"]

    def test_trace_serialization_roundtrip(self):
        import json

        trace = mahdis_run(complete_graph(3))
        doc = trace.to_dict()
        again = json.loads(json.dumps(doc))
        assert again == doc
        assert doc["schema_version"] == "1"
        assert doc["graph"]["n"] == 3


class TestCutRepair:
    def test_infeasible_cut_is_repaired_and_recorded(self):
        g = complete_graph(2)
        dg = duplicate_join(g)
        # both first-copy products below one half: the raw cut covers nothing
        vectors = np.zeros((5, 5))
        vectors[0, 0] = 1.0
        for idx, p in zip(range(1, 5), (0.4, 0.3, 0.5, 0.5)):
            vectors[idx, 0] = p
            vectors[idx, idx] = np.sqrt(1 - p * p)
        emb = VectorEmbedding(vectors, labels=dg.combined.vertices)
        trace = RunTrace("1", g, 2, 1, step_taken="")
        cfg = PipelineConfig()
        partition = _cut_copy(trace, STEP_CUT_PRIME, emb, dg, dg.copy_ids("prime"), g, cfg)
        ok, _ = verify_cover(g, partition)
        assert ok
        assert trace.repairs and trace.repairs[0]["step"] == STEP_CUT_PRIME
        assert "cut_repaired" in trace.flags
        # the higher-product endpoint (vertex 1 at 0.4) was chosen
        assert trace.repairs[0]["added"] == [1]


class TestEvaluateRatio:
    def test_exact_match_gives_one(self):
        trace = mahdis_run(complete_graph(3))
        trace.cover_size = 2
        evaluate_ratio(trace, exact_vc(complete_graph(3)))
        assert trace.empirical_ratio == 1.0

    def test_consistent_certificate_not_flagged(self):
        trace = mahdis_run(complete_graph(3))
        trace.cover_size = 3
        trace.certificates = [{"claimed_ratio_bound": 1.5, "source": "theorem2", "inputs": {}, "assumptions": []}]
        evaluate_ratio(trace, exact_vc(complete_graph(3)))
        assert trace.empirical_ratio == 1.5
        assert not trace.certificate_violated

    def test_violated_certificate_flagged(self):
        trace = mahdis_run(complete_graph(2))
        trace.cover_size = 2
        trace.certificates = [
            {"claimed_ratio_bound": 1.999998, "source": "theorem3", "inputs": {}, "assumptions": []}
        ]
        evaluate_ratio(trace, exact_vc(complete_graph(2)))
        assert trace.empirical_ratio == 2.0
        assert trace.certificate_violated
        assert "certificate_violated" in trace.flags

    def test_unknown_oracle_flagged(self):
        trace = mahdis_run(complete_graph(2))
        evaluate_ratio(trace, ExactResult("unknown", None, None, 10))
        assert trace.empirical_ratio is None
        assert "oracle_unknown" in trace.flags


class TestBaseline:
    @pytest.mark.parametrize("graph,size", [(complete_graph(2), 2), (complete_graph(3), 2), (cycle_graph(5), 4)])
    def test_sizes(self, graph, size):
        trace = two_approx_baseline(graph)
        assert trace.step_taken == STEP_BASELINE
        assert trace.cover_size == size
