import numpy as np
import pytest

from streamlearn.exceptions import ExpertError, InvalidInputError
from streamlearn.experts import (
    EnsembleHistory,
    EnsembleState,
    ExpertPool,
    OnlineExpertEnsemble,
    offline_best_weights,
    regret_check,
    squared_error_loss,
)


def make_pool():
    return ExpertPool(experts=(lambda x: 0.0, lambda x: 2.0), labels=("a", "b"))


def brute_force_grid_best(losses, eta, resolution=1e-3):
    """Grid search of the cumulative eta-weighted linear cost over the 2-simplex."""
    losses = np.asarray(losses)
    etas = np.broadcast_to(np.asarray(eta, dtype=float), (losses.shape[0],))
    total = etas @ losses
    grid = np.arange(0.0, 1.0 + resolution, resolution)
    candidates = np.column_stack([grid, 1.0 - grid])
    values = candidates @ total
    return candidates[np.argmin(values)]


class TestExpectedLoss:
    def test_uniform(self):
        state = EnsembleState.uniform(2)
        assert state.expected_loss([0.0, 2.0]) == pytest.approx(1.0)

    def test_point_mass(self):
        state = EnsembleState(weights=[0.0, 1.0])
        assert state.expected_loss([5.0, 3.0]) == pytest.approx(3.0)

    def test_matches_dot_product(self):
        rng = np.random.default_rng(0)
        w = rng.dirichlet(np.ones(5))
        losses = rng.uniform(0, 1, 5)
        state = EnsembleState(weights=w)
        assert state.expected_loss(losses) == pytest.approx(
            float(np.dot(w, losses)), abs=1e-15
        )

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            EnsembleState.uniform(3).expected_loss([1.0, 2.0])


class TestUpdateWeights:
    def test_equal_losses_leave_weights(self):
        state = EnsembleState(weights=[0.3, 0.7])
        out = state.update_weights([1.0, 1.0])
        assert np.allclose(out.weights, [0.3, 0.7])

    def test_hand_projection(self):
        state = EnsembleState(weights=[0.5, 0.5], eta=0.1)
        out = state.update_weights([0.0, 1.0])
        assert np.allclose(out.weights, [0.55, 0.45])

    def test_repeated_steps_concentrate(self):
        state = EnsembleState.uniform(2, eta=0.1)
        for _ in range(50):
            state = state.update_weights([0.0, 1.0])
        assert np.allclose(state.weights, [1.0, 0.0])

    def test_cumulative_accounting(self):
        state = EnsembleState.uniform(2, eta=0.1)
        state = state.update_weights([1.0, 3.0])
        assert np.allclose(state.cumulative_loss, [1.0, 3.0])
        assert state.cumulative_weighted_loss == pytest.approx(2.0)
        state = state.update_weights([1.0, 0.0])
        assert np.allclose(state.cumulative_loss, [2.0, 3.0])

    def test_weights_stay_on_simplex(self):
        rng = np.random.default_rng(1)
        state = EnsembleState.uniform(6, eta=0.1)
        for _ in range(200):
            state = state.update_weights(rng.uniform(0, 5, 6))
            assert abs(state.weights.sum() - 1.0) <= 1e-12
            assert state.weights.min() >= 0.0

    def test_monotone_dominance(self):
        # strictly smaller loss at every step keeps the weight at least as large
        rng = np.random.default_rng(2)
        for _ in range(20):
            state = EnsembleState.uniform(3, eta=0.05)
            for _ in range(50):
                base = rng.uniform(0.5, 2.0, 3)
                base[2] = base[0] + rng.uniform(0.1, 1.0)  # expert 2 worse than 0
                state = state.update_weights(base)
                assert state.weights[0] >= state.weights[2] - 1e-12


class TestPredictions:
    def test_weighted_point_mass(self):
        state = EnsembleState(weights=[0.0, 1.0])
        assert state.predict_weighted(make_pool(), np.zeros(1)) == pytest.approx(2.0)

    def test_weighted_uniform(self):
        state = EnsembleState.uniform(2)
        assert state.predict_weighted(make_pool(), np.zeros(1)) == pytest.approx(1.0)

    def test_weighted_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        consts = rng.normal(size=4)
        pool = ExpertPool(experts=tuple((lambda x, c=c: c) for c in consts))
        w = rng.dirichlet(np.ones(4))
        state = EnsembleState(weights=w)
        assert state.predict_weighted(pool, np.zeros(1)) == pytest.approx(
            float(w @ consts), abs=1e-12
        )

    def test_best_picks_max_weight(self):
        state = EnsembleState(weights=[0.2, 0.8])
        pred, idx = state.predict_best(make_pool(), np.zeros(1))
        assert idx == 1 and pred == pytest.approx(2.0)

    def test_best_tie_break_lowest_index(self):
        state = EnsembleState.uniform(2)
        _, idx = state.predict_best(make_pool(), np.zeros(1))
        assert idx == 0

    def test_expert_failure_carries_index(self):
        def boom(x):
            raise RuntimeError("nope")

        pool = ExpertPool(experts=(lambda x: 1.0, boom))
        with pytest.raises(ExpertError) as err:
            EnsembleState.uniform(2).predict_weighted(pool, np.zeros(1))
        assert err.value.index == 1


class TestLossClamp:
    def test_clamped(self):
        out = squared_error_loss([100.0, 1.0], 0.0, clip=10.0)
        assert np.allclose(out, [10.0, 1.0])


class TestRegret:
    def run_stream(self, losses, eta):
        state = EnsembleState.uniform(losses.shape[1], eta=eta)
        history = EnsembleHistory(initial_weights=state.weights.copy())
        for row in losses:
            state = state.update_weights(row)
            history.record(row, state)
        return history

    def test_single_step_at_optimum(self):
        losses = np.array([[0.0, 1.0]])
        g_star = np.array([1.0, 0.0])
        state = EnsembleState(weights=g_star, eta=0.1)
        after = state.update_weights(losses[0])
        check = regret_check(losses, after.weights[None, :], g_star, 0.1, g_star)
        assert check.lhs <= 0.0 + 1e-12
        assert check.rhs == 0.0
        assert check.holds

    def test_constant_losses_grid_oracle(self):
        losses = np.tile([0.0, 1.0], (100, 1))
        history = self.run_stream(losses, eta=0.1)
        g_star = brute_force_grid_best(losses, 0.1)
        check = history.check_regret(g_star=g_star)
        assert check.holds
        vertex = offline_best_weights(losses, 0.1)
        assert np.allclose(g_star, vertex, atol=1e-3)

    def test_ten_expert_replica_holds(self):
        rng = np.random.default_rng(4)
        losses = rng.uniform(0, 4, size=(100, 10))
        history = self.run_stream(losses, eta=0.1)
        check = history.check_regret()
        assert check.holds
        assert check.rhs_unsquared == pytest.approx(np.sqrt(check.rhs))

    def test_holds_on_random_streams(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(2, 11))
            t = int(rng.integers(2, 201))
            eta = float(rng.choice([0.01, 0.1]))
            losses = rng.uniform(0, 10, size=(t, n))
            history = self.run_stream(losses, eta=eta)
            assert history.check_regret().holds


class TestHistoryExport:
    def test_csv_columns(self, tmp_path):
        losses = np.array([[0.0, 1.0], [1.0, 0.0]])
        state = EnsembleState.uniform(2, eta=0.1)
        history = EnsembleHistory(initial_weights=state.weights.copy())
        for row in losses:
            state = state.update_weights(row)
            history.record(row, state)
        path = tmp_path / "weights.csv"
        history.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "step,expert_index,weight,cumulative_loss"
        assert len(lines) == 1 + 4


class TestEnsembleEstimator:
    def test_converges_to_best_expert(self):
        rng = np.random.default_rng(6)
        pool = ExpertPool(experts=(lambda x: x[0], lambda x: 3.0 * x[0]))
        X = rng.uniform(0.5, 1.5, size=(80, 1))
        y = 3.0 * X[:, 0] + rng.normal(0, 0.05, 80)
        est = OnlineExpertEnsemble(pool, eta=0.2).fit(X, y)
        assert est.weights_[1] > 0.95
        pred = est.predict(X[:3])
        assert np.allclose(pred, est.state_.weights @ np.vstack([X[:3, 0], 3 * X[:3, 0]]))

    def test_best_mode(self):
        pool = make_pool()
        est = OnlineExpertEnsemble(pool, prediction="best")
        est._init_state()
        assert est.predict(np.zeros((1, 1)))[0] == pytest.approx(0.0)
