import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcorr import (
    ClusterError,
    FilteredGraph,
    Partition,
    SynthSpec,
    adjusted_rand_index,
    generate_block_panel,
    location_proxy,
    louvain,
    misclassified_vs_reference,
    modularity,
    mst_from_correlation,
    ns_mapping,
    pearson,
    spectral_clustering,
    tune_clusters,
    with_correlation_weights,
)
from gridcorr.measures import CorrelationMatrix

from oracles import modularity_of_labels, set_partitions


def two_cliques_affinity(size=5):
    n = 2 * size
    M = np.zeros((n, n))
    M[:size, :size] = 1.0
    M[size:, size:] = 1.0
    np.fill_diagonal(M, 1.0)
    return CorrelationMatrix(M, "pearson")


def two_triangles():
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
             (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)]
    return FilteredGraph(n_vertices=6, edges=tuple(edges), kind="threshold")


class TestSpectralClustering:
    def test_disconnected_cliques_split_exactly(self):
        part = spectral_clustering(two_cliques_affinity(), k=2, seed=0)
        truth = Partition.from_labels([0] * 5 + [1] * 5)
        assert adjusted_rand_index(part, truth) == 1.0

    def test_k_equals_one(self, small_panel):
        part = spectral_clustering(pearson(small_panel), k=1, seed=0)
        assert part.k == 1

    def test_recovers_planted_blocks(self):
        hits = 0
        for seed in range(10):
            panel, truth = generate_block_panel(SynthSpec(seed=seed))
            part = spectral_clustering(pearson(panel), k=4, seed=seed)
            if adjusted_rand_index(part, truth) >= 0.9:
                hits += 1
        assert hits >= 8

    def test_k_larger_than_n_rejected(self, small_panel):
        with pytest.raises(ClusterError):
            spectral_clustering(pearson(small_panel), k=99, seed=0)

    def test_invalid_k_rejected(self, small_panel):
        with pytest.raises(ClusterError):
            spectral_clustering(pearson(small_panel), k=0, seed=0)

    def test_deterministic_for_fixed_seed(self):
        panel, _ = generate_block_panel(SynthSpec(nodes_per_block=8, T=500, seed=1))
        C = pearson(panel)
        a = spectral_clustering(C, k=4, seed=42)
        b = spectral_clustering(C, k=4, seed=42)
        assert np.array_equal(a.labels, b.labels)

    def test_node_order_invariance_up_to_relabeling(self):
        panel, _ = generate_block_panel(SynthSpec(nodes_per_block=8, T=1500, seed=2))
        C = pearson(panel).values
        rng = np.random.default_rng(5)
        perm = rng.permutation(C.shape[0])
        permuted = CorrelationMatrix(C[np.ix_(perm, perm)], "pearson")
        base = spectral_clustering(CorrelationMatrix(C, "pearson"), k=4, seed=3)
        shuffled = spectral_clustering(permuted, k=4, seed=3)
        restored = np.empty_like(shuffled.labels)
        restored[perm] = shuffled.labels
        assert adjusted_rand_index(base.labels, restored) == 1.0


class TestModularity:
    def test_two_triangles_standard(self):
        graph = two_triangles()
        part = Partition.from_labels([0, 0, 0, 1, 1, 1])
        assert modularity(graph, part) == pytest.approx(0.5)

    def test_single_cluster_is_zero(self, rng):
        n = 8
        W = rng.random((n, n))
        W = (W + W.T) / 2
        np.fill_diagonal(W, 0.0)
        edges = tuple(
            (i, j, float(W[i, j])) for i in range(n) for j in range(i + 1, n)
        )
        graph = FilteredGraph(n_vertices=n, edges=edges, kind="threshold")
        part = Partition.from_labels(np.zeros(n, dtype=int))
        assert modularity(graph, part) == pytest.approx(0.0, abs=1e-12)

    def test_unhalved_convention_doubles_default(self):
        graph = two_triangles()
        part = Partition.from_labels([0, 0, 0, 1, 1, 1])
        std = modularity(graph, part, convention="1/2m")
        assert modularity(graph, part, convention="1/m") == pytest.approx(2 * std)

    def test_matches_definition_oracle(self, rng):
        for _ in range(10):
            n = 7
            W = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
            W = (W + W.T) / 2
            np.fill_diagonal(W, 0.0)
            if W.sum() == 0:
                continue
            edges = tuple(
                (i, j, float(W[i, j]))
                for i in range(n) for j in range(i + 1, n) if W[i, j] > 0
            )
            graph = FilteredGraph(n_vertices=n, edges=edges, kind="threshold")
            labels = rng.integers(0, 3, size=n)
            part = Partition.from_labels(labels)
            assert modularity(graph, part) == pytest.approx(
                modularity_of_labels(graph.adjacency(), part.labels), abs=1e-12
            )

    def test_standard_value_stays_in_unit_interval(self, rng):
        graph = two_triangles()
        for labels in ([0, 1, 2, 3, 4, 5], [0, 0, 1, 1, 2, 2], [0] * 6):
            q = modularity(graph, Partition.from_labels(labels))
            assert -1.0 <= q <= 1.0


class TestLouvain:
    def test_two_triangles_found_exactly(self):
        graph = two_triangles()
        part = louvain(graph, seed=0)
        truth = Partition.from_labels([0, 0, 0, 1, 1, 1])
        assert adjusted_rand_index(part, truth) == 1.0
        assert modularity(graph, part) == pytest.approx(0.5)

    def test_two_triangles_is_global_optimum(self):
        # exhaustive search over all 203 partitions of 6 vertices
        graph = two_triangles()
        W = graph.adjacency()
        best_q, best_labels = -np.inf, None
        for labels in set_partitions(6):
            q = modularity_of_labels(W, labels)
            if q > best_q:
                best_q, best_labels = q, labels
        assert best_q == pytest.approx(0.5)
        assert adjusted_rand_index(best_labels, [0, 0, 0, 1, 1, 1]) == 1.0

    def test_complete_graph_collapses_to_one_cluster(self):
        n = 6
        edges = tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n))
        graph = FilteredGraph(n_vertices=n, edges=edges, kind="threshold")
        part = louvain(graph, seed=0)
        assert part.k == 1

    def test_never_below_singletons(self, rng):
        for trial in range(20):
            n = int(rng.integers(5, 15))
            mask = rng.random((n, n)) < 0.4
            W = rng.random((n, n)) * mask
            W = np.triu(W, k=1)
            edges = tuple(
                (i, j, float(W[i, j]))
                for i in range(n) for j in range(i + 1, n) if W[i, j] > 0
            )
            if not edges:
                continue
            graph = FilteredGraph(n_vertices=n, edges=edges, kind="threshold")
            part = louvain(graph, seed=trial)
            singletons = Partition.from_labels(np.arange(n))
            assert modularity(graph, part) >= modularity(graph, singletons) - 1e-12

    def test_recovers_resolution_sized_blocks_on_mst(self):
        # blocks small enough that the modularity optimum keeps them whole
        hits = 0
        for seed in range(10):
            spec = SynthSpec(n_blocks=4, nodes_per_block=7, T=2000,
                             intra_corr=0.8, seed=seed)
            panel, truth = generate_block_panel(spec)
            C = pearson(panel)
            tree = mst_from_correlation(C)
            part = louvain(with_correlation_weights(tree, C), seed=seed)
            if adjusted_rand_index(part, truth) >= 0.8:
                hits += 1
        assert hits >= 8

    def test_edgeless_graph_rejected(self):
        graph = FilteredGraph(n_vertices=3, edges=(), kind="threshold")
        with pytest.raises(ClusterError):
            louvain(graph, seed=0)

    def test_node_order_invariance_up_to_relabeling(self):
        graph = two_triangles()
        perm = np.array([4, 2, 0, 5, 1, 3])
        edges = tuple((int(perm[i]), int(perm[j]), w) for i, j, w in graph.edges)
        shuffled_graph = FilteredGraph(n_vertices=6, edges=edges, kind="threshold")
        base = louvain(graph, seed=1)
        shuffled = louvain(shuffled_graph, seed=1)
        restored = shuffled.labels[perm]
        assert adjusted_rand_index(base.labels, restored) == 1.0

    def test_deterministic_per_seed(self):
        graph = two_triangles()
        a = louvain(graph, seed=9)
        b = louvain(graph, seed=9)
        assert np.array_equal(a.labels, b.labels)


class TestNsMapping:
    def test_code_floor_branch(self):
        assert ns_mapping(100, 144) == 144

    def test_request_dominates_branch(self):
        assert ns_mapping(200, 144) == 200

    def test_boundary(self):
        assert ns_mapping(144, 144) == 144

    @given(st.integers(1, 400), st.integers(1, 400), st.integers(0, 50))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_request(self, n, codes, bump):
        assert ns_mapping(n + bump, codes) >= ns_mapping(n, codes)


class TestLocationProxy:
    def test_identical_names_collapse_to_one_cluster(self):
        nodes = ["SAME_X"] * 6
        part = location_proxy(nodes, n=3, p=3, seed=0)
        assert part.k == 1

    def test_two_disjoint_name_families(self):
        nodes = ["AAAA_X", "AABA_X", "ABAA_X", "ZZZZ_Y", "ZYZZ_Y", "ZZYZ_Y"]
        part = location_proxy(nodes, n=2, p=2, seed=0)
        truth = Partition.from_labels([0, 0, 0, 1, 1, 1])
        assert adjusted_rand_index(part, truth) == 1.0

    def test_synth_names_recover_blocks(self):
        # the block tag spans 5 characters, so 4-grams separate blocks
        # cleanly; ask for the planted number of location groups
        spec = SynthSpec(n_blocks=4, nodes_per_block=25, T=2, seed=0)
        names = spec.node_names()
        truth = np.repeat(np.arange(4), 25)
        part = location_proxy(names, n=4, p=4, seed=0, n_codes=4)
        assert adjusted_rand_index(part, truth) >= 0.9


class TestMisclassification:
    def test_aligned_partitions_have_no_flags(self):
        part = Partition.from_labels([0, 0, 1, 1])
        ref = Partition.from_labels([1, 1, 0, 0])
        assert not misclassified_vs_reference(part, ref).any()

    def test_minority_nodes_flagged(self):
        part = Partition.from_labels([0, 0, 0, 1, 1, 1])
        ref = Partition.from_labels([0, 0, 1, 1, 1, 1])
        flags = misclassified_vs_reference(part, ref)
        assert flags.tolist() == [False, False, True, False, False, False]


class TestTuneClusters:
    def test_curves_cover_requested_range(self):
        panel, _ = generate_block_panel(
            SynthSpec(n_blocks=3, nodes_per_block=5, T=400, seed=4)
        )
        curves = tune_clusters(panel, ["pearson"], range(1, 7), seed=0)
        assert len(curves) == 1
        curve = curves[0]
        assert curve.n_values == tuple(range(1, 7))
        assert len(curve.ari) == 6
        assert len(curve.disparity) == 6
        assert np.isnan(curve.disparity[0])  # single cluster has no disparity

    def test_ari_peaks_near_planted_count(self):
        peaks = []
        for seed in range(5):
            panel, _ = generate_block_panel(
                SynthSpec(n_blocks=4, nodes_per_block=6, T=1500,
                          intra_corr=0.7, seed=seed)
            )
            curve = tune_clusters(panel, ["pearson"], range(2, 9), seed=seed)[0]
            peaks.append(curve.n_values[int(np.argmax(curve.ari))])
        hits = sum(1 for p in peaks if abs(p - 4) <= 1)
        assert hits >= 3

    def test_out_of_range_rejected(self, small_panel):
        with pytest.raises(ClusterError):
            tune_clusters(small_panel, ["pearson"], range(1, 100), seed=0)
