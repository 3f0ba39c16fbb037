"""Tests for exact enumeration and the Hoeffding decomposition oracle."""

import numpy as np
import pytest

from exboot.enumeration import LatentGrid, LatentLaw, is_below, nonzero_patterns
from exboot.exceptions import InvalidInputError, SupportTooLargeError
from exboot.separable import HoeffdingOracleInstance, hoeffding_oracle

BINARY = LatentLaw.uniform([0.0, 1.0])


def random_instance(rng: np.random.Generator, K: int) -> HoeffdingOracleInstance:
    patterns = nonzero_patterns(K)
    laws = []
    for _ in patterns:
        size = int(rng.integers(2, 4))
        probs = rng.dirichlet(np.ones(size))
        probs[-1] = 1.0 - probs[:-1].sum()
        laws.append(LatentLaw(tuple(rng.standard_normal(size)), tuple(probs)))
    p = int(rng.integers(1, 3))
    shape = tuple(len(law.support) for law in laws) + (p,)
    return HoeffdingOracleInstance(K=K, laws=tuple(laws), table=rng.standard_normal(shape))


class TestEnumeration:
    """Test latent laws, patterns and the latent grid."""

    def test_patterns_ordered_by_size(self):
        """Test pattern order for K = 2 and K = 3."""
        assert nonzero_patterns(2) == [(1, 0), (0, 1), (1, 1)]
        patterns = nonzero_patterns(3)
        assert len(patterns) == 7
        assert [sum(e) for e in patterns] == [1, 1, 1, 2, 2, 2, 3]

    def test_is_below(self):
        """Test the componentwise order on patterns."""
        assert is_below((1, 0), (1, 1))
        assert not is_below((1, 1), (1, 0))

    def test_law_probabilities_checked(self):
        """Test that probabilities must sum to one."""
        with pytest.raises(InvalidInputError):
            LatentLaw((0.0, 1.0), (0.3, 0.3))

    def test_expectation_keeps_axes(self):
        """Test that conditioning on an axis keeps its variation."""
        grid = LatentGrid([BINARY, BINARY])
        table = grid.tabulate(lambda point: [point[0] + 10 * point[1]])
        conditional = grid.expectation(table, {0})
        assert conditional[0, 0, 0] == pytest.approx(5.0)
        assert conditional[1, 1, 0] == pytest.approx(6.0)
        assert grid.mean(table).tolist() == pytest.approx([5.5])

    def test_budget(self):
        """Test that an oversized grid is refused."""
        with pytest.raises(SupportTooLargeError):
            LatentGrid([BINARY] * 5, budget=16)


class TestHoeffdingOracle:
    """Test hoeffding_oracle."""

    def test_constant_generator(self):
        """Test that a constant has no components."""
        instance = HoeffdingOracleInstance.from_function(2, {1: BINARY, 2: BINARY}, lambda u: [3.0])
        components = hoeffding_oracle(instance)
        assert components.mean.tolist() == [3.0]
        for component in components.components.values():
            assert np.all(component == 0.0)

    def test_additive_generator(self):
        """Test the main effects of u1 + u2 and the vanishing interaction."""
        instance = HoeffdingOracleInstance.from_function(
            2, {1: BINARY, 2: BINARY}, lambda u: [u[(1, 0)] + u[(0, 1)]]
        )
        components = hoeffding_oracle(instance).components
        first = components[(1, 0)][..., 0]
        second = components[(0, 1)][..., 0]

        assert np.allclose(first[0], -0.5) and np.allclose(first[1], 0.5)
        assert np.allclose(second[:, 0], -0.5) and np.allclose(second[:, 1], 0.5)
        assert np.allclose(components[(1, 1)], 0.0, atol=1e-12)

    def test_multiplicative_generator(self):
        """Test that u1 * u2 has an interaction and reconstructs exactly."""
        instance = HoeffdingOracleInstance.from_function(
            2, {1: BINARY, 2: BINARY}, lambda u: [u[(1, 0)] * u[(0, 1)]]
        )
        components = hoeffding_oracle(instance)
        assert np.max(np.abs(components.components[(1, 1)])) > 0.1
        assert components.reconstruction_error() <= 1e-12

    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_random_instances(self, K):
        """Test reconstruction and degenerate means on random instances."""
        rng = np.random.default_rng(100 + K)
        for _ in range(8):
            components = hoeffding_oracle(random_instance(rng, K))
            assert components.reconstruction_error() <= 1e-12
            assert components.degenerate_mean_error() <= 1e-12

    def test_component_per_pattern(self):
        """Test that every nonzero pattern gets a component."""
        rng = np.random.default_rng(0)
        components = hoeffding_oracle(random_instance(rng, 3)).components
        assert list(components) == nonzero_patterns(3)

    def test_support_too_large(self):
        """Test the enumeration budget."""
        with pytest.raises(SupportTooLargeError):
            HoeffdingOracleInstance.from_function(
                2, {1: BINARY, 2: BINARY}, lambda u: [0.0], budget=4
            )

    def test_missing_law(self):
        """Test that every pattern needs a law."""
        with pytest.raises(InvalidInputError):
            HoeffdingOracleInstance.from_function(2, {1: BINARY}, lambda u: [0.0])

    def test_table_shape_checked(self):
        """Test that the table must match the latent grid."""
        with pytest.raises(InvalidInputError):
            HoeffdingOracleInstance(K=1, laws=(BINARY,), table=np.zeros((3, 1)))
