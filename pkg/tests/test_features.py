import numpy as np
import pytest

from streamlearn.exceptions import InvalidConfigError, InvalidInputError
from streamlearn.features import DictionaryExpander, DictionarySpec, expert_grid

EXPECTED_GRID_DIMS = [5, 11, 9, 9, 9, 15, 19, 23, 13]


class TestDimension:
    def test_intercept_only(self):
        assert DictionarySpec(base_dim=4).dimension() == 5

    def test_interactions(self):
        assert DictionarySpec(base_dim=4, interactions=True).dimension() == 11

    def test_all_augmentations(self):
        spec = DictionarySpec(
            base_dim=4, interactions=True, squares=True, sine=True, cosine=True
        )
        assert spec.dimension() == 23

    def test_bad_base_dim(self):
        with pytest.raises(InvalidConfigError):
            DictionarySpec(base_dim=0)


class TestTransform:
    def test_intercept_and_raw(self):
        out = DictionarySpec(base_dim=2).transform([3.0, 4.0])
        assert np.allclose(out, [1.0, 3.0, 4.0])

    def test_single_interaction(self):
        out = DictionarySpec(base_dim=2, interactions=True).transform([3.0, 4.0])
        assert np.allclose(out, [1.0, 3.0, 4.0, 12.0])

    def test_trig_at_zero(self):
        spec = DictionarySpec(
            base_dim=2, interactions=True, squares=True, sine=True, cosine=True
        )
        out = spec.transform([0.0, 0.0])
        assert np.allclose(out, [1, 0, 0, 0, 0, 0, 0, 0, 1, 1])

    def test_interaction_order_lexicographic(self):
        spec = DictionarySpec(base_dim=3, interactions=True, include_intercept=False)
        out = spec.transform([2.0, 3.0, 5.0])
        # raw then products (0,1), (0,2), (1,2)
        assert np.allclose(out, [2, 3, 5, 6, 10, 15])

    def test_length_always_matches_dimension(self):
        rng = np.random.default_rng(0)
        for spec in expert_grid(4):
            x = rng.normal(size=4)
            assert spec.transform(x).shape[0] == spec.dimension()

    def test_deterministic(self):
        spec = DictionarySpec(base_dim=3, squares=True, sine=True)
        x = np.array([0.3, -1.2, 2.0])
        assert np.array_equal(spec.transform(x), spec.transform(x))

    def test_wrong_length_rejected(self):
        with pytest.raises(InvalidInputError):
            DictionarySpec(base_dim=3).transform([1.0, 2.0])

    def test_all_flags_off_gives_one_x(self):
        spec = DictionarySpec(base_dim=3)
        x = np.array([1.5, -2.0, 0.25])
        assert np.allclose(spec.transform(x), np.concatenate([[1.0], x]))


class TestExpertGrid:
    def test_dimensions_match_reference_table(self):
        dims = [spec.dimension() for spec in expert_grid(4)]
        assert dims == EXPECTED_GRID_DIMS

    def test_fourth_spec_is_sine_only(self):
        spec = expert_grid(4)[3]
        assert spec.sine
        assert not (spec.interactions or spec.squares or spec.cosine)

    def test_all_specs_distinct(self):
        grid = expert_grid(4)
        assert len(set(grid)) == len(grid)


class TestSerialization:
    def test_json_round_trip(self):
        spec = DictionarySpec(base_dim=4, interactions=True, sine=True)
        assert DictionarySpec.from_json(spec.to_json()) == spec

    def test_bad_payload(self):
        with pytest.raises(InvalidConfigError):
            DictionarySpec.from_json('{"base_dim": 2, "bogus": true}')


class TestExpander:
    def test_sklearn_round_trip(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        tr = DictionaryExpander(squares=True).fit(X)
        out = tr.transform(X)
        assert out.shape == (2, 5)
        assert np.allclose(out[0], [1.0, 1.0, 2.0, 1.0, 4.0])
        names = tr.get_feature_names_out()
        assert list(names) == ["1", "x0", "x1", "x0^2", "x1^2"]

    def test_get_params(self):
        params = DictionaryExpander(sine=True).get_params()
        assert params["sine"] is True
