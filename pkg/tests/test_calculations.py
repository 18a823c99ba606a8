"""Tests for calculations.py."""

import math

import pytest

from openmedium.utils.calculations import binomial_bounds, dominant, fnv1a64, shannon_diversity


def test_fnv_reference_values():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_shannon_even_split():
    assert shannon_diversity([5, 5]) == pytest.approx(math.log(2))


def test_shannon_single_or_empty():
    assert shannon_diversity([12]) == 0.0
    assert shannon_diversity([]) == 0.0
    assert shannon_diversity([0, 3]) == 0.0


def test_shannon_bounded_by_log_richness():
    assert shannon_diversity([1, 2, 3, 4]) <= math.log(4)


def test_dominant_breaks_ties_by_smaller_key():
    assert dominant({7: 3, 2: 3, 9: 1}) == 2
    assert dominant({}) is None


def test_binomial_bounds_bracket_mean():
    low, high = binomial_bounds(10000, 0.01)
    assert low < 100 < high
