import numpy as np
import pytest

from smoothprox import (
    GraphSimSpec,
    OverlapSimSpec,
    gen_graph_instance,
    gen_overlap_instance,
    overlap_groups,
    overlap_true_beta,
    threshold_correlation_graph,
)


class TestOverlapInstance:
    def test_default_dimensions(self):
        spec = OverlapSimSpec()
        assert spec.num_features == 910
        data, penalty, beta = gen_overlap_instance(spec)
        assert data.X.shape == (1000, 910)
        assert data.y.shape == (1000,)
        assert beta.shape == (910,)
        assert len(penalty.groups) == 10

    def test_group_layout(self):
        groups = overlap_groups(OverlapSimSpec())
        assert groups[0][:3] == (0, 1, 2)
        assert groups[1][0] == 90
        for a, b in zip(groups, groups[1:]):
            assert len(set(a) & set(b)) == 10
        assert sorted(set().union(*groups)) == list(range(910))

    def test_true_beta_values(self):
        beta = overlap_true_beta(910)
        assert beta[0] == pytest.approx(-1.0)
        assert beta[1] == pytest.approx(np.exp(-0.01))
        assert beta[2] == pytest.approx(-np.exp(-0.02))
        assert np.abs(beta[-1]) < np.abs(beta[0])
        assert (np.sign(beta) == (-1.0) ** np.arange(1, 911)).all()

    def test_seed_reproducibility(self):
        d1, _, _ = gen_overlap_instance(OverlapSimSpec(seed=7))
        d2, _, _ = gen_overlap_instance(OverlapSimSpec(seed=7))
        np.testing.assert_array_equal(d1.X, d2.X)
        np.testing.assert_array_equal(d1.y, d2.y)
        d3, _, _ = gen_overlap_instance(OverlapSimSpec(seed=8))
        assert not np.array_equal(d1.X, d3.X)

    def test_noise_added(self):
        data, _, beta = gen_overlap_instance(OverlapSimSpec(num_groups=2, seed=0))
        residual = data.y - data.X @ beta
        assert residual.std() == pytest.approx(1.0, abs=0.1)

    def test_invalid_overlap(self):
        with pytest.raises(ValueError):
            OverlapSimSpec(group_size=10, overlap=10)


class TestGraphInstance:
    def test_default_dimensions(self):
        prob, B, penalty = gen_graph_instance(GraphSimSpec())
        assert prob.X.shape == (100, 30)
        assert prob.Y.shape == (100, 10)
        assert B.shape == (30, 10)
        assert penalty.num_nodes == 10

    def test_planted_signal_amplitude(self):
        _, B, _ = gen_graph_instance(GraphSimSpec())
        values = np.unique(B)
        assert set(values) <= {0.0, 0.8}
        assert (B == 0.8).any()

    def test_block_supports_shared_within_block(self):
        spec = GraphSimSpec()
        _, B, _ = gen_graph_instance(spec)
        bounds = np.concatenate(([0], np.cumsum(spec.block_sizes)))
        for i in range(len(spec.block_sizes)):
            block = B[:, bounds[i] : bounds[i + 1]]
            # every output inside one block has the same support
            support = block != 0.0
            assert (support == support[:, :1]).all()

    def test_correlated_blocks_produce_edges(self):
        _, _, penalty = gen_graph_instance(GraphSimSpec())
        assert len(penalty.edges) > 0
        for m, l, r in penalty.edges:
            assert 0 <= m < l < 10
            assert abs(r) >= 0.3

    def test_seed_reproducibility(self):
        p1, B1, g1 = gen_graph_instance(GraphSimSpec(seed=3))
        p2, B2, g2 = gen_graph_instance(GraphSimSpec(seed=3))
        np.testing.assert_array_equal(p1.X, p2.X)
        np.testing.assert_array_equal(p1.Y, p2.Y)
        np.testing.assert_array_equal(B1, B2)
        assert g1 == g2

    def test_block_size_mismatch(self):
        with pytest.raises(ValueError):
            GraphSimSpec(block_sizes=(5, 6))


class TestThresholdCorrelationGraph:
    def test_identical_columns_get_unit_edge(self, rng):
        col = rng.standard_normal(50)
        Y = np.column_stack([col, col])
        penalty = threshold_correlation_graph(Y, 0.3)
        assert len(penalty.edges) == 1
        m, l, r = penalty.edges[0]
        assert (m, l) == (0, 1)
        assert r == pytest.approx(1.0)

    def test_threshold_above_max_correlation_gives_no_edges(self, rng):
        Y = rng.standard_normal((200, 4))
        max_abs = np.abs(np.corrcoef(Y, rowvar=False) - np.eye(4)).max()
        penalty = threshold_correlation_graph(Y, min(0.999, max_abs + 0.01))
        assert penalty.edges == ()

    def test_edges_match_manual_correlations(self, rng):
        Y = rng.standard_normal((80, 5))
        Y[:, 1] = Y[:, 0] + 0.1 * rng.standard_normal(80)
        rho = 0.5
        penalty = threshold_correlation_graph(Y, rho)
        corr = np.corrcoef(Y, rowvar=False)
        expected = {
            (m, l): corr[m, l]
            for m in range(5)
            for l in range(m + 1, 5)
            if abs(corr[m, l]) >= rho
        }
        got = {(m, l): r for m, l, r in penalty.edges}
        assert set(got) == set(expected)
        for key in got:
            assert got[key] == pytest.approx(expected[key], rel=1e-12)

    def test_anticorrelated_columns_get_negative_weight(self, rng):
        col = rng.standard_normal(50)
        Y = np.column_stack([col, -col])
        penalty = threshold_correlation_graph(Y, 0.3)
        assert penalty.edges[0][2] == pytest.approx(-1.0)

    def test_constant_column_excluded_with_warning(self, rng):
        Y = np.column_stack([rng.standard_normal(30), np.full(30, 2.0)])
        with pytest.warns(RuntimeWarning):
            penalty = threshold_correlation_graph(Y, 0.1)
        assert penalty.edges == ()

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            threshold_correlation_graph(np.ones((1, 3)), 0.3)
