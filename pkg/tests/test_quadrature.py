import math

import numpy as np
import pytest
from scipy.special import gamma

from spspec.quadrature import (
    MAX_NODES,
    gauss_hermite_rule,
    hermite_batch,
    hermite_function,
)

SQRT_PI = math.sqrt(math.pi)


def gaussian_moment(k: int) -> float:
    """Closed form for the integral of x^k e^{-x^2} over the line."""
    if k % 2:
        return 0.0
    return float(gamma((k + 1) / 2.0))


# ---------------------------------------------------------------- rules

def test_one_point_rule():
    rule = gauss_hermite_rule(1)
    assert rule.n == 1
    assert rule.nodes[0] == 0.0
    assert abs(rule.weights[0] - SQRT_PI) < 1e-14


def test_two_point_rule():
    rule = gauss_hermite_rule(2)
    assert np.allclose(rule.nodes, [-1.0 / math.sqrt(2), 1.0 / math.sqrt(2)], atol=1e-14)
    assert np.allclose(rule.weights, [SQRT_PI / 2] * 2, atol=1e-14)


def test_three_point_rule():
    rule = gauss_hermite_rule(3)
    r = math.sqrt(1.5)
    assert np.allclose(rule.nodes, [-r, 0.0, r], atol=1e-14)
    assert np.allclose(rule.weights, [SQRT_PI / 6, 2 * SQRT_PI / 3, SQRT_PI / 6], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13, 21, 34, 64, 128, 256])
def test_rule_shape_invariants(n):
    rule = gauss_hermite_rule(n)
    assert rule.n == n
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.max(np.abs(rule.nodes + rule.nodes[::-1])) < 1e-13
    assert np.all(rule.weights > 0)
    assert np.all(rule.scaled_weights > 0)
    assert abs(rule.weights.sum() - SQRT_PI) < 1e-12
    assert np.allclose(rule.weights, rule.scaled_weights * np.exp(-rule.nodes**2), rtol=1e-13)


@pytest.mark.parametrize("n", range(1, 21))
def test_rule_exactness_up_to_degree_2n_minus_1(n):
    rule = gauss_hermite_rule(n)
    for k in range(0, 2 * n):
        got = rule.integrate(rule.nodes**k)
        want = gaussian_moment(k)
        # odd moments vanish by symmetric cancellation, so measure those
        # against the magnitude of the terms being cancelled
        scale = max(want, gaussian_moment(k + 1), 1.0)
        assert abs(got - want) / scale < 1e-10


def test_rule_not_exact_beyond_its_degree():
    rule = gauss_hermite_rule(2)
    got = rule.integrate(rule.nodes**4)
    assert abs(got - gaussian_moment(4)) > 1e-3


def test_large_rules_stay_usable():
    # plain weights underflow towards the tails here; the scaled ones must not
    rule = gauss_hermite_rule(MAX_NODES)
    assert rule.n == MAX_NODES
    assert np.all(np.isfinite(rule.scaled_weights))
    assert np.all(rule.scaled_weights > 0)


def test_node_count_cap():
    with pytest.raises(ValueError, match="underflow"):
        gauss_hermite_rule(MAX_NODES + 1)
    with pytest.raises(ValueError):
        gauss_hermite_rule(0)


def test_rules_are_cached_and_read_only():
    a = gauss_hermite_rule(17)
    assert gauss_hermite_rule(17) is a
    with pytest.raises(ValueError):
        a.nodes[0] = 1.0


# ---------------------------------------------------------------- functions

def test_hermite_function_values_at_zero():
    assert abs(hermite_function(0, 0.0) - math.pi**-0.25) < 1e-16
    assert hermite_function(0, 0.0) == pytest.approx(0.7511255444649425, abs=1e-15)
    assert hermite_function(1, 0.0) == 0.0
    assert abs(hermite_function(2, 0.0) + math.pi**-0.25 / math.sqrt(2)) < 1e-15


def test_hermite_batch_examples():
    row = hermite_batch(0, np.array([1.0]))
    assert row.shape == (1, 1)
    assert abs(row[0, 0] - math.pi**-0.25 * math.exp(-0.5)) < 1e-15
    col = hermite_batch(2, np.array([0.0]))
    assert np.allclose(
        col[:, 0], [math.pi**-0.25, 0.0, -math.pi**-0.25 / math.sqrt(2)], atol=1e-15
    )


def test_batch_agrees_with_scalar_on_a_grid():
    xs = np.linspace(-5.0, 5.0, 21)
    table = hermite_batch(60, xs)
    for n in range(0, 61, 5):
        for i, x in enumerate(xs):
            assert abs(table[n, i] - hermite_function(n, float(x))) < 1e-14


def test_functions_decay_at_large_argument():
    assert hermite_function(40, 30.0) < 1e-100


def test_orthonormality():
    # integrate chi_m chi_n with the weight factored out: the scaled weights
    # absorb e^{x^2}, so the quadrature sees only the polynomial part
    for m in range(0, 61, 6):
        for n in range(m, 61, 6):
            rule = gauss_hermite_rule((m + n) // 2 + 1)
            table = hermite_batch(max(m, n), rule.nodes)
            got = float(np.dot(rule.scaled_weights, table[m] * table[n]))
            want = 1.0 if m == n else 0.0
            assert abs(got - want) < 1e-10


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        hermite_function(-1, 0.0)
