import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamlearn.exceptions import (
    DegenerateFeatureError,
    InsufficientDataError,
    InvalidInputError,
)
from streamlearn.geometry import (
    RunningStandardizer,
    eigh_symmetric,
    project_psd,
    project_simplex,
    symmetrize,
)


def simplex_bisection_oracle(z, tol=1e-13):
    """Independent projection: solve sum(max(z - tau, 0)) = 1 by bisection."""
    z = np.asarray(z, dtype=float)
    lo, hi = z.min() - 1.0, z.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        mass = np.maximum(z - mid, 0.0).sum()
        if mass > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return np.maximum(z - 0.5 * (lo + hi), 0.0)


class TestEigh:
    def test_identity(self):
        w, v = eigh_symmetric(np.eye(3))
        assert np.allclose(w, [1.0, 1.0, 1.0])

    def test_diagonal_descending(self):
        w, _ = eigh_symmetric(np.diag([5.0, 2.0, -1.0]))
        assert np.allclose(w, [5.0, 2.0, -1.0])

    def test_reconstruction_random(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = symmetrize(rng.normal(size=(4, 4)))
            w, v = eigh_symmetric(m)
            recon = (v * w) @ v.T
            assert np.linalg.norm(recon - m) <= 1e-8 * (1 + np.linalg.norm(m))
            assert np.allclose(v.T @ v, np.eye(4), atol=1e-8)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            eigh_symmetric(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestProjectPsd:
    def test_identity_unchanged(self):
        assert np.allclose(project_psd(np.eye(2)), np.eye(2))

    def test_clips_negative_eigenvalue(self):
        out = project_psd(np.diag([1.0, -2.0]))
        assert np.allclose(out, np.diag([1.0, 0.0]))

    def test_idempotent_and_psd_random(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            m = symmetrize(rng.normal(size=(4, 4)))
            out = project_psd(m)
            assert np.linalg.eigvalsh(out)[0] >= -1e-10
            assert np.max(np.abs(project_psd(out) - out)) <= 1e-10

    def test_psd_input_is_fixed_point(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(4, 4))
        m = a @ a.T
        assert np.max(np.abs(project_psd(m) - m)) <= 1e-10

    def test_nearest_point_beats_random_candidates(self):
        rng = np.random.default_rng(3)
        m = symmetrize(rng.normal(size=(4, 4)) * 2.0)
        out = project_psd(m)
        d_out = np.linalg.norm(out - m)
        for _ in range(1000):
            a = rng.normal(size=(4, 4))
            candidate = a @ a.T * rng.uniform(0.0, 1.5)
            assert d_out <= np.linalg.norm(candidate - m) + 1e-12


class TestProjectSimplex:
    def test_already_on_simplex(self):
        z = np.array([0.2, 0.5, 0.3])
        assert np.allclose(project_simplex(z), z)

    def test_symmetric_zero(self):
        assert np.allclose(project_simplex([0.0, 0.0, 0.0]), np.ones(3) / 3)

    def test_clamps_to_vertex(self):
        assert np.allclose(project_simplex([1.2, -0.2]), [1.0, 0.0])

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            project_simplex([])

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            z = rng.normal(size=rng.integers(1, 8)) * 3.0
            got = project_simplex(z)
            want = simplex_bisection_oracle(z)
            assert np.max(np.abs(got - want)) <= 1e-9
            assert abs(got.sum() - 1.0) <= 1e-12
            assert got.min() >= 0.0

    @given(
        st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=1,
            max_size=10,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_kkt_property(self, z):
        w = project_simplex(z)
        z = np.asarray(z, dtype=float)
        assert abs(w.sum() - 1.0) <= 1e-9
        assert w.min() >= -1e-15
        # active coordinates share a common shift tau; inactive ones sit below it
        active = w > 0
        taus = z[active] - w[active]
        assert np.ptp(taus) <= 1e-9
        if np.any(~active):
            assert np.all(z[~active] <= taus.max() + 1e-9)


class TestRunningStandardizer:
    def test_first_sample(self):
        s = RunningStandardizer.empty(2).update([3.0, -1.0])
        assert np.allclose(s.mean, [3.0, -1.0])
        assert np.allclose(s.m2, 0.0)
        assert s.count == 1

    def test_two_point_variance(self):
        s = RunningStandardizer.empty(1).update([0.0]).update([2.0])
        assert np.allclose(s.mean, [1.0])
        assert np.allclose(s.variance(), [2.0])

    def test_matches_two_pass(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(1000, 3)) * np.array([1.0, 10.0, 0.1])
        s = RunningStandardizer.empty(3).update_many(X)
        assert np.max(np.abs(s.mean - X.mean(axis=0))) <= 1e-10
        assert np.max(np.abs(s.variance() - X.var(axis=0, ddof=1))) <= 1e-10

    def test_standardize_at_mean_is_zero(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(50, 2))
        s = RunningStandardizer.empty(2).update_many(X)
        assert np.allclose(s.standardize_row(s.mean), 0.0)

    def test_scaling(self):
        # mean 0, sample std exactly 2 -> x=4 standardizes to 2
        s = RunningStandardizer.empty(1)
        for v in (-np.sqrt(2.0), np.sqrt(2.0)):
            s = s.update([v])
        assert np.allclose(s.std(), [2.0])
        assert np.allclose(s.standardize_row([4.0]), [2.0])

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(100, 3))
        s = RunningStandardizer.empty(3).update_many(X)
        x = rng.normal(size=3)
        assert np.max(np.abs(s.destandardize_row(s.standardize_row(x)) - x)) <= 1e-12

    def test_intercept_passthrough(self):
        rng = np.random.default_rng(8)
        X = np.column_stack([np.ones(30), rng.normal(size=30)])
        s = RunningStandardizer.empty(2, intercept_col=0).update_many(X)
        row = s.standardize_row([1.0, 5.0])
        assert row[0] == 1.0

    def test_zero_std_feature_rejected(self):
        X = np.column_stack([np.ones(10), np.ones(10)])
        s = RunningStandardizer.empty(2, intercept_col=0).update_many(X)
        with pytest.raises(DegenerateFeatureError):
            s.standardize_row([1.0, 1.0])

    def test_too_few_samples(self):
        s = RunningStandardizer.empty(1).update([1.0])
        with pytest.raises(InsufficientDataError):
            s.standardize_row([1.0])

    def test_dimension_mismatch(self):
        s = RunningStandardizer.empty(2)
        with pytest.raises(InvalidInputError):
            s.update([1.0])

    @given(
        st.lists(
            st.lists(
                st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
                min_size=2,
                max_size=2,
            ),
            min_size=2,
            max_size=60,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_welford_matches_numpy(self, rows):
        X = np.asarray(rows)
        s = RunningStandardizer.empty(2).update_many(X)
        scale = 1.0 + np.abs(X).max()
        assert np.max(np.abs(s.mean - X.mean(axis=0))) <= 1e-9 * scale
        assert np.max(np.abs(s.variance() - X.var(axis=0, ddof=1))) <= 1e-7 * scale**2
