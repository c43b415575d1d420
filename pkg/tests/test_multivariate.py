import numpy as np
import pytest

from smoothprox import (
    GraphPenaltySpec,
    GroupPenaltySpec,
    MultiProblem,
    Problem,
    SmoothedMatrixPenalty,
    SolverConfig,
    StructureError,
    multi_alpha_star,
    multi_penalty_value,
    smoothed_penalty,
    solve,
    solve_multivariate,
)
from conftest import central_difference_gradient


def toy_problem(rng, n=25, j=4, k=3, spec=None):
    X = rng.standard_normal((n, j))
    B = rng.standard_normal((j, k))
    Y = X @ B + 0.1 * rng.standard_normal((n, k))
    return MultiProblem(X, Y, spec)


class TestMultiProblem:
    def test_shape_validation(self):
        with pytest.raises(StructureError):
            MultiProblem(np.ones((3, 2)), np.ones((4, 2)))

    def test_penalty_dimension_checked_against_outputs(self):
        spec = GraphPenaltySpec(num_nodes=5, edges=((0, 1, 1.0),), gamma=1.0)
        with pytest.raises(StructureError):
            MultiProblem(np.ones((3, 2)), np.ones((3, 2)), spec)


class TestMultiPenaltyValue:
    def test_group_rows_sum_norms(self):
        # one group over both outputs; rows (3,4) and (0,0)
        spec = GroupPenaltySpec.with_unit_weights(((0, 1),), 1.0)
        prob = MultiProblem(np.ones((3, 2)), np.ones((3, 2)), spec)
        assert multi_penalty_value(prob, [[3.0, 4.0], [0.0, 0.0]]) == pytest.approx(5.0)

    def test_zero_matrix(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1), (1, 2)), 2.0)
        prob = toy_problem(rng, k=3, spec=spec)
        assert multi_penalty_value(prob, np.zeros((4, 3))) == 0.0

    def test_graph_sums_row_differences(self):
        spec = GraphPenaltySpec(num_nodes=2, edges=((0, 1, 1.0),), gamma=1.0)
        prob = MultiProblem(np.ones((3, 2)), np.ones((3, 2)), spec)
        B = np.array([[1.0, 3.0], [2.0, 2.0]])
        assert multi_penalty_value(prob, B) == pytest.approx(2.0)

    def test_single_output_reduces_to_vector_penalty(self, rng):
        from smoothprox import penalty_value_group

        spec = GroupPenaltySpec.with_unit_weights(((0,),), 1.5)
        prob = MultiProblem(
            rng.standard_normal((5, 3)), rng.standard_normal((5, 1)), spec
        )
        B = rng.standard_normal((3, 1))
        # the output-side group {0} couples nothing across inputs, so the
        # matrix penalty is the l1 norm of the single column
        assert multi_penalty_value(prob, B) == pytest.approx(
            1.5 * np.abs(B).sum(), rel=1e-12
        )
        vec_spec = GroupPenaltySpec.with_unit_weights(((0,), (1,), (2,)), 1.5)
        assert multi_penalty_value(prob, B) == pytest.approx(
            penalty_value_group(vec_spec, B[:, 0]), rel=1e-12
        )


class TestSmoothedMatrixPenalty:
    def test_alpha_feasible(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1), (1, 2)), 1.0)
        prob = toy_problem(rng, k=3, spec=spec)
        A = multi_alpha_star(prob, 0.3, rng.standard_normal((4, 3)) * 3)
        pen = SmoothedMatrixPenalty(spec, 4, 0.3).bind(3)
        for a, b in pen.coupling.row_blocks:
            assert (np.linalg.norm(A[a:b], axis=0) <= 1.0 + 1e-12).all()

    def test_graph_alpha_clipped(self, rng):
        spec = GraphPenaltySpec(
            num_nodes=3, edges=((0, 1, 1.0), (1, 2, 1.0)), gamma=1.0
        )
        prob = toy_problem(rng, k=3, spec=spec)
        A = multi_alpha_star(prob, 0.2, rng.standard_normal((4, 3)) * 5)
        assert (np.abs(A) <= 1.0 + 1e-12).all()

    def test_sandwich_bound(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1), (1, 2)), 1.0)
        prob = toy_problem(rng, k=3, spec=spec)
        mu = 0.05
        pen = SmoothedMatrixPenalty(spec, 4, mu).bind(3)
        for _ in range(20):
            B = rng.standard_normal((4, 3)) * rng.uniform(0.1, 4.0)
            exact = multi_penalty_value(prob, B)
            smooth = pen.value(B)
            assert smooth <= exact + 1e-10
            assert smooth >= exact - mu * pen.D - 1e-10

    def test_dual_bound_scales_with_inputs(self):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1), (1, 2)), 1.0)
        pen = SmoothedMatrixPenalty(spec, 7, 0.1).bind(3)
        assert pen.D == pytest.approx(7.0)

    def test_gradient_matches_finite_differences(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1), (1, 2)), 1.0)
        pen = SmoothedMatrixPenalty(spec, 4, 0.2).bind(3)
        B = rng.standard_normal((4, 3))
        flat_value = lambda v: pen.value(v.reshape(4, 3))
        fd = central_difference_gradient(flat_value, B.ravel(), 1e-6)
        np.testing.assert_allclose(
            pen.gradient(B).ravel(), fd, rtol=1e-5, atol=1e-8
        )

    def test_single_output_matches_vector_penalty(self, rng):
        # K=1 with group {0} equals the vector penalty with singleton groups
        spec = GroupPenaltySpec.with_unit_weights(((0,),), 1.0)
        mu = 0.1
        pen = SmoothedMatrixPenalty(spec, 5, mu).bind(1)
        vec_spec = GroupPenaltySpec.with_unit_weights(
            tuple((j,) for j in range(5)), 1.0
        )
        vec_pen = smoothed_penalty(vec_spec, mu, num_features=5)
        beta = rng.standard_normal(5)
        B = beta.reshape(5, 1)
        assert pen.value(B) == pytest.approx(vec_pen.value(beta), rel=1e-12)
        np.testing.assert_allclose(
            pen.gradient(B).ravel(), vec_pen.gradient(beta), atol=1e-14
        )


class TestSolveMultivariate:
    def test_unpenalized_matches_columnwise_lasso(self, rng):
        prob = toy_problem(rng, k=3)
        lam = 0.3
        B, trace = solve_multivariate(prob, SolverConfig(lam=lam, rel_tol=1e-12))
        assert trace.status == "converged"
        for k in range(3):
            col_prob = Problem.least_squares(prob.X, prob.Y[:, k])
            beta, _ = solve(col_prob, SolverConfig(lam=lam, rel_tol=1e-12))
            np.testing.assert_allclose(B[:, k], beta, atol=1e-6)

    def test_single_output_matches_vector_solver(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0,),), 1.0)
        X = rng.standard_normal((20, 5))
        y = rng.standard_normal(20)
        prob = MultiProblem(X, y.reshape(-1, 1), spec)
        config = SolverConfig(lam=0.2, mu=1e-3, rel_tol=1e-12)
        B, _ = solve_multivariate(prob, config)
        vec_spec = GroupPenaltySpec.with_unit_weights(
            tuple((j,) for j in range(5)), 1.0
        )
        beta, _ = solve(Problem.least_squares(X, y, vec_spec), config)
        np.testing.assert_allclose(B[:, 0], beta, atol=1e-12)

    def test_graph_penalty_fuses_output_columns(self, rng):
        X = rng.standard_normal((60, 4))
        bcol = rng.standard_normal(4)
        Y = np.column_stack([X @ bcol, X @ bcol]) + 0.01 * rng.standard_normal((60, 2))
        spec = GraphPenaltySpec(num_nodes=2, edges=((0, 1, 1.0),), gamma=20.0)
        prob = MultiProblem(X, Y, spec)
        B, _ = solve_multivariate(prob, SolverConfig(lam=0.0, mu=1e-5, rel_tol=1e-12))
        np.testing.assert_allclose(B[:, 0], B[:, 1], atol=1e-3)

    def test_exact_zero_entries(self, rng):
        spec = GroupPenaltySpec.with_unit_weights(((0, 1, 2),), 1.0)
        prob = toy_problem(rng, k=3, spec=spec)
        B, _ = solve_multivariate(prob, SolverConfig(lam=3.0, mu=1e-4))
        assert np.count_nonzero(B) < B.size

    def test_bad_warm_start_shape(self, rng):
        prob = toy_problem(rng, k=3)
        with pytest.raises(StructureError):
            solve_multivariate(prob, SolverConfig(lam=0.1), B0=np.zeros((2, 2)))
