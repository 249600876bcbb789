import itertools
import math

import numpy as np
import pytest

from crashnet import equilibrium, hubo, network
from crashnet.errors import ParameterError, ParseError
from crashnet.hubo import (
    BinaryPolynomial,
    BitSpec,
    bit_variable_id,
    build_hubo,
    decode_bits,
    encode_value,
    legendre,
    legendre_at_zero,
    smoothed_theta,
    smoothed_theta_extended,
    theta_coefficients,
)
from crashnet.network import FailureSpec

from conftest import random_multilinear


# -- Legendre machinery ------------------------------------------------------

def test_legendre_known_values():
    assert legendre(0, 0.3) == 1.0
    assert legendre(1, 0.3) == 0.3
    assert abs(legendre(2, 0.5) - (-0.125)) < 1e-15  # (3x^2 - 1)/2
    assert legendre(3, 1.0) == 1.0
    assert legendre(4, -1.0) == 1.0


def test_legendre_domain_and_order_checks():
    with pytest.raises(ParameterError):
        legendre(2, 1.5)
    with pytest.raises(ParameterError):
        legendre(-1, 0.0)


@pytest.mark.parametrize("l", range(13))
def test_legendre_at_zero_matches_recurrence(l):
    assert abs(legendre_at_zero(l) - legendre(l, 0.0)) < 1e-15


def test_theta_coefficients_exact():
    assert theta_coefficients(1).coefficients == {1: 0.5}
    c3 = theta_coefficients(3).coefficients
    assert c3[1] == 0.5 and c3[3] == -0.125
    c5 = theta_coefficients(5).coefficients
    assert c5[5] == 0.0625
    for bad in (0, 2, 4, -3):
        with pytest.raises(ParameterError):
            theta_coefficients(bad)


def test_smoothed_theta_properties():
    for r in (1, 3, 7, 15):
        tp = theta_coefficients(r)
        assert smoothed_theta(tp, 0.0) == 0.5
        # reflection: T(x) + T(-x) = 1
        for x in np.linspace(-1, 1, 41):
            assert abs(smoothed_theta(tp, x) + smoothed_theta(tp, -x) - 1.0) < 1e-12
    with pytest.raises(ParameterError):
        smoothed_theta(theta_coefficients(3), 1.01)
    # the continuation variant accepts anything
    assert np.isfinite(smoothed_theta_extended(theta_coefficients(3), 2.5))


def test_smoothed_theta_extended_vectorizes():
    tp = theta_coefficients(5)
    xs = np.linspace(-1, 1, 7)
    batch = smoothed_theta_extended(tp, xs)
    for x, b in zip(xs, batch):
        assert abs(smoothed_theta(tp, float(x)) - b) < 1e-14


# -- Fixed-point encoding ----------------------------------------------------

def test_bitspec_basics():
    spec = BitSpec(0, 4)
    assert spec.num_bits == 5
    assert spec.v_max == 31.0
    np.testing.assert_array_equal(spec.weights(), [1, 2, 4, 8, 16])
    with pytest.raises(ParameterError):
        BitSpec(3, 2)


def test_encode_decode_round_trip():
    spec = BitSpec(0, 4)
    for v in range(32):
        bits = encode_value(spec, float(v))
        assert decode_bits(spec, bits) == float(v)
    with pytest.raises(ParameterError):
        encode_value(spec, 32.5)
    with pytest.raises(ParameterError):
        decode_bits(spec, [0, 1])


def test_encode_nonzero_alpha_min():
    spec = BitSpec(1, 3)  # representable: even multiples {0,2,...,14}
    assert decode_bits(spec, encode_value(spec, 6.0)) == 6.0
    assert decode_bits(spec, encode_value(spec, 7.0)) == 6.0  # floor to grid


# -- BinaryPolynomial --------------------------------------------------------

def test_polynomial_evaluate_and_degree():
    p = BinaryPolynomial({frozenset(): 1.0, frozenset({0}): 2.0,
                          frozenset({0, 1, 2}): -4.0})
    assert p.degree == 3
    assert p.num_variables == 3
    assert p.evaluate([1, 1, 1]) == -1.0
    assert p.evaluate([1, 0, 1]) == 3.0
    assert p.order_histogram() == {0: 1, 1: 1, 3: 1}
    with pytest.raises(ParameterError):
        p.evaluate([1, 1])  # missing variable 2


def test_polynomial_pruning_keeps_constant():
    p = BinaryPolynomial({frozenset(): 1e-30, frozenset({0}): 1.0,
                          frozenset({1}): 1e-20})
    kept = p.pruned()
    assert frozenset() in kept.terms
    assert frozenset({1}) not in kept.terms


def test_polynomial_text_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    p = random_multilinear(rng, 4, 3)
    q = BinaryPolynomial.from_text(p.to_text())
    assert set(q.terms) == set(p.terms)
    for key in p.terms:
        assert q.terms[key] == p.terms[key]  # 17 significant digits: exact
    with pytest.raises(ParseError):
        BinaryPolynomial.from_text("1.0 2 2\n")
    with pytest.raises(ParseError):
        BinaryPolynomial.from_text("abc 1\n")


# -- Objective expansion -----------------------------------------------------

def test_hand_expanded_square(single):
    # n = 1, u = D p = 3, two bits: (x0 + 2 x1 - 3)^2
    net = network.FinancialNetwork(
        np.array([[1.0]]), np.array([[0.0]]), np.array([1.0]), np.array([3.0])
    )
    poly = build_hubo(net, None, BitSpec(0, 1))
    expect = {
        frozenset(): 9.0,
        frozenset({0}): -5.0,
        frozenset({1}): -8.0,
        frozenset({0, 1}): 4.0,
    }
    assert set(poly.terms) == set(expect)
    for key, coef in expect.items():
        assert abs(poly.terms[key] - coef) < 1e-12


def test_linear_expansion_structure():
    net = network.generate_random_network(3, 5, 10.0, 40.0, 4)
    poly = build_hubo(net, None, BitSpec(0, 3))
    assert poly.num_variables == 12
    assert poly.degree == 2
    hist = poly.order_histogram()
    # per institution: C(4,2) cross terms; no coupling between institutions
    assert hist[2] == 3 * math.comb(4, 2)


def test_variable_ids_are_institution_major():
    assert bit_variable_id(0, 0, 5) == 0
    assert bit_variable_id(0, 4, 5) == 4
    assert bit_variable_id(2, 1, 5) == 11


def test_linear_expansion_evaluates_to_objective():
    net = network.generate_random_network(2, 4, 10.0, 40.0, 8)
    spec = BitSpec(0, 2)
    poly = build_hubo(net, None, spec)
    m = equilibrium.value_matrix(net)
    u = m @ net.asset_income()
    for bits in itertools.product((0, 1), repeat=6):
        v = [decode_bits(spec, bits[0:3]), decode_bits(spec, bits[3:6])]
        direct = float(np.sum((np.array(v) - u) ** 2))
        assert abs(poly.evaluate(list(bits)) - direct) < 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_nonlinear_expansion_evaluates_to_smoothed_objective(seed):
    net = network.generate_random_network(2, 4, 10.0, 40.0, seed)
    state = equilibrium.linear_equilibrium(net)
    fail = FailureSpec(0.8 * state.market_values, 0.3 * state.equity_values)
    spec = BitSpec(0, 2)
    poly = build_hubo(net, fail, spec, r=3)
    assert poly.degree > 2
    scale = max(abs(c) for c in poly.terms.values())
    for bits in itertools.product((0, 1), repeat=6):
        v = [decode_bits(spec, bits[0:3]), decode_bits(spec, bits[3:6])]
        direct = equilibrium.smoothed_objective(net, fail, v, 3, spec.v_max)
        assert abs(poly.evaluate(list(bits)) - direct) < 1e-9 * max(scale, 1.0)


def test_nonlinear_requires_odd_degree(toy2):
    fail = equilibrium.default_failure_spec(toy2)
    with pytest.raises(ParameterError):
        build_hubo(toy2, fail, BitSpec(0, 2), r=4)
    with pytest.raises(ParameterError):
        build_hubo(toy2, fail, BitSpec(0, 2), r=None)
