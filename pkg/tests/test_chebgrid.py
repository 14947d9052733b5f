import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import BarycentricInterpolator

from chebtrot.bounds import cheb_error_bound, cheb_node_error_bound, total_steps_bound
from chebtrot.chebgrid import fit, lebesgue_factor, make_grid, propagate_variance, weights_at_zero
from chebtrot.errors import InputError


def _lagrange_weights_at_zero(nodes):
    """Independent oracle: l_k(0) = prod_{j != k} (0 - s_j) / (s_k - s_j)."""
    out = []
    for k, sk in enumerate(nodes):
        others = np.delete(nodes, k)
        out.append(np.prod(-others / (sk - others)))
    return np.array(out)


def test_two_nodes():
    g = make_grid(2, 1)
    assert np.allclose(g.nodes, [math.sqrt(2) / 2, -math.sqrt(2) / 2], atol=1e-15)
    assert np.allclose(make_grid(2, 0.5).nodes, [math.sqrt(2) / 4, -math.sqrt(2) / 4], atol=1e-15)


def test_four_nodes():
    g = make_grid(4, 1)
    c1, c3 = math.cos(math.pi / 8), math.cos(3 * math.pi / 8)
    assert np.allclose(g.nodes, [c1, c3, -c3, -c1], atol=1e-15)


def test_odd_or_small_n_rejected():
    for n in (0, 1, 3, 7):
        with pytest.raises(InputError):
            make_grid(n)
    with pytest.raises(InputError):
        make_grid(4, 0.0)


@pytest.mark.parametrize("n", range(2, 65, 2))
def test_grid_invariants(n):
    g = make_grid(n, 0.7)
    assert np.max(np.abs(g.V.T @ g.V - np.eye(n))) <= 1e-12
    assert np.all(np.diff(g.nodes) < 0)
    assert np.array_equal(g.nodes, -g.nodes[::-1])
    assert not np.any(g.nodes == 0)
    d0 = weights_at_zero(g)
    assert np.max(np.abs(d0 - g.V @ g.basis(0.0)[0])) <= 1e-12
    assert abs(d0.sum() - 1.0) <= 1e-12
    assert np.sum(np.abs(d0)) < lebesgue_factor(n)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_weights_match_lagrange_oracle(n):
    g = make_grid(n, 1.3)
    assert np.allclose(weights_at_zero(g), _lagrange_weights_at_zero(g.nodes), atol=1e-13)


def test_four_node_weights():
    d0 = weights_at_zero(make_grid(4))
    # l_k(0) from the product formula, frozen
    assert np.allclose(d0, [-0.10355339059327376, 0.6035533905932737, 0.6035533905932737, -0.10355339059327376])
    assert np.sum(np.abs(d0)) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_lebesgue_factor_values():
    assert lebesgue_factor(1) == pytest.approx(1.4412712003053032, abs=1e-14)
    assert lebesgue_factor(2) == pytest.approx(1.6993983051321196, abs=1e-14)


def test_fit_constant():
    g = make_grid(6, 0.4)
    assert fit(g, np.ones(6)).estimate_at_zero == pytest.approx(1.0, abs=1e-14)


def test_fit_two_nodes_is_midpoint():
    g = make_grid(2, 1)
    assert fit(g, [3.0, 5.0]).estimate_at_zero == pytest.approx(4.0, abs=1e-14)


def test_fit_square():
    g = make_grid(4, 1)
    assert abs(fit(g, g.nodes ** 2).estimate_at_zero) <= 1e-12


def test_fit_length_mismatch():
    with pytest.raises(InputError):
        fit(make_grid(4), [1.0, 2.0])
    with pytest.raises(InputError):
        fit(make_grid(2), [1.0, np.nan])


def test_clenshaw_matches_barycentric_oracle():
    g = make_grid(10, 0.8)
    y = np.sin(3 * g.nodes) + g.nodes ** 3
    f = fit(g, y)
    xs = np.linspace(-1.2, 1.2, 41)
    oracle = BarycentricInterpolator(g.nodes, y)(xs)
    assert np.allclose(f(xs), oracle, atol=1e-10)
    assert np.allclose(f(g.nodes), y, atol=1e-10)
    assert f.extrapolating(1.0) and not f.extrapolating(0.5)


def test_variance_two_nodes():
    bound, exact = propagate_variance([0.3, 0.3], make_grid(2))
    assert exact == pytest.approx(0.3 / math.sqrt(2))
    assert bound == pytest.approx(0.3 * math.sqrt(2))


def test_variance_zero_and_negative():
    assert propagate_variance(np.zeros(4), make_grid(4)) == (0.0, 0.0)
    with pytest.raises(InputError):
        propagate_variance([-1.0, 1.0], make_grid(2))


def test_variance_monte_carlo():
    g = make_grid(6)
    sig = np.array([0.1, 0.3, 0.2, 0.2, 0.3, 0.1])
    rng = np.random.default_rng(7)
    est = (rng.standard_normal((20000, 6)) * sig) @ weights_at_zero(g)
    bound, exact = propagate_variance(sig, g)
    assert np.std(est) == pytest.approx(exact, rel=0.03)
    assert exact <= bound


def test_reciprocal_node_sum_bound():
    for n in range(2, 257, 2):
        g = make_grid(n)
        assert np.sum(1.0 / np.abs(g.nodes)) <= total_steps_bound(n, 1.0)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
@pytest.mark.parametrize("a", [0.5, 1.0])
def test_exp_interpolation_error_node_product_bound(n, a):
    g = make_grid(n, a)
    err = abs(fit(g, np.exp(g.nodes)).estimate_at_zero - 1.0)
    assert err <= cheb_node_error_bound(n, a, math.exp(a)).value
    # the product of |s_k| is exactly a^n 2^(1-n)
    assert np.prod(np.abs(g.nodes)) == pytest.approx(a ** n * 2.0 ** (1 - n), rel=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_bound_without_pi_factor_underestimates_exp_error(n):
    g = make_grid(n, 1.0)
    err = abs(fit(g, np.exp(g.nodes)).estimate_at_zero - 1.0)
    assert err > cheb_error_bound(n, 1.0, math.e).value


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from([2, 4, 6, 8, 12, 16]),
    st.floats(0.1, 5.0),
    st.lists(st.floats(-3, 3), min_size=16, max_size=16),
)
def test_polynomial_reproduction(n, a, coeffs):
    g = make_grid(n, a)
    poly = np.polynomial.Polynomial(coeffs[:n])
    est = fit(g, poly(g.nodes)).estimate_at_zero
    scale = max(1.0, float(np.sum(np.abs(coeffs[:n]) * np.maximum(a, 1.0) ** np.arange(n))))
    assert abs(est - poly(0.0)) <= 1e-10 * scale


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(list(range(2, 33, 2))), st.lists(st.floats(0, 2), min_size=32, max_size=32))
def test_variance_exact_below_bound(n, sig):
    bound, exact = propagate_variance(np.array(sig[:n]), make_grid(n))
    assert exact <= bound + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 4, 6, 8]), st.floats(1e-6, 1.0), st.lists(st.sampled_from([-1.0, 1.0]), min_size=8, max_size=8))
def test_bounded_perturbations_move_estimate_by_at_most_eps(n, eps, signs):
    g = make_grid(n)
    y = np.cos(g.nodes)
    delta = np.array(signs[:n]) * eps / lebesgue_factor(n)
    assert abs(fit(g, y + delta).estimate_at_zero - fit(g, y).estimate_at_zero) <= eps
