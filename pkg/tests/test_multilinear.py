from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from faabruno.errors import DimensionError, RingMismatchError
from faabruno.multilinear import (FLOAT, RATIONAL, DerivativeTower, Polynomial, SymMap,
                                  arrangements, infer_ring, multi_indices, tower_cos,
                                  tower_elementwise, tower_exp, tower_from_dict, tower_linear,
                                  tower_polynomial, tower_sin, tower_to_dict)

fractions = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def symmaps(draw, ring=RATIONAL):
    k = draw(st.integers(1, 3))
    p = draw(st.integers(1, 3))
    q = draw(st.integers(1, 2))
    coeffs = {}
    for key in multi_indices(p, k):
        if draw(st.booleans()):
            coeffs[key] = [draw(fractions) for _ in range(q)]
    return SymMap(k, p, q, coeffs, ring)


def test_multi_indices_counts():
    assert len(list(multi_indices(3, 2))) == 6
    assert arrangements((0, 0, 1)) == 3
    assert arrangements((0, 1, 2)) == 6


def test_key_validation():
    with pytest.raises(DimensionError):
        SymMap(2, 2, 1, {(1, 0): [1]})
    assert SymMap(2, 2, 1, {(1, 0): [1]}, sort_keys=True).coeff((0, 1))[0] == 1
    with pytest.raises(DimensionError):
        SymMap(2, 2, 1, {(0, 2): [1]})
    with pytest.raises(DimensionError):
        SymMap(0, 2, 1)


def test_coeff_is_order_independent():
    m = SymMap(3, 3, 1, {(0, 1, 2): [Fraction(5)]})
    for perm in permutations((0, 1, 2)):
        assert m.coeff(perm)[0] == 5


@given(symmaps(), st.data())
def test_eval_matches_dense_contraction(m, data):
    args = [np.array([data.draw(fractions) for _ in range(m.in_dim)], dtype=object)
            for _ in range(m.arity)]
    dense = m.to_dense()
    want = dense
    for a in args:
        want = np.tensordot(want, a, axes=([1], [0]))
    assert np.all(m.eval(args) == want)


@given(symmaps(), st.data())
def test_eval_symmetric(m, data):
    args = [np.array([data.draw(fractions) for _ in range(m.in_dim)], dtype=object)
            for _ in range(m.arity)]
    base = m.eval(args)
    for perm in permutations(range(m.arity)):
        assert np.all(m.eval([args[i] for i in perm]) == base)


@given(symmaps(), st.data())
def test_eval_multilinear(m, data):
    a = [np.array([data.draw(fractions) for _ in range(m.in_dim)], dtype=object)
         for _ in range(m.arity)]
    b = np.array([data.draw(fractions) for _ in range(m.in_dim)], dtype=object)
    c = data.draw(fractions)
    mixed = [a[0] * c + b] + a[1:]
    assert np.all(m.eval(mixed) == m.eval(a) * c + m.eval([b] + a[1:]))


def test_eval_coerces_arguments_to_ring():
    r = SymMap(1, 1, 1, {(0,): [Fraction(1, 3)]}, RATIONAL)
    assert r.eval([np.array([0.5])])[0] == Fraction(1, 6)


def test_tower_rejects_mixed_rings():
    with pytest.raises(RingMismatchError):
        DerivativeTower(np.array([0.0]), np.array([0.0]), [SymMap(1, 1, 1, {(0,): [1]})], FLOAT)


def test_infer_ring():
    assert infer_ring([Fraction(1), 2]) == RATIONAL
    assert infer_ring([1.5]) == FLOAT


def test_tower_polynomial_exact_values():
    # x -> (x^2, x) at x = 1
    f = Polynomial.from_terms(1, 2, [(1, (2,), 0), (1, (1,), 1)])
    t = tower_polynomial(f, [1], 3)
    assert t.ring == RATIONAL
    assert list(t.value) == [1, 1]
    assert list(t.deriv(1).coeff((0,))) == [2, 1]
    assert list(t.deriv(2).coeff((0, 0))) == [2, 0]
    assert t.deriv(3).is_zero()


def test_tower_polynomial_mixed_partials():
    # x0^2 x1^3 at (1, 2): d^2/dx0 dx1 = 2 x0 * 3 x1^2 = 24
    f = Polynomial.from_terms(2, 1, [(1, (2, 3), 0)])
    t = tower_polynomial(f, [1, 2], 4)
    assert t.deriv(2).coeff((0, 1))[0] == 24
    assert t.deriv(4).coeff((0, 0, 1, 1))[0] == 2 * 6 * 2
    assert t.deriv(4).coeff((0, 0, 0, 1))[0] == 0


def test_analytic_towers():
    assert np.allclose([tower_exp(0.3, 4).deriv(k).coeff((0,) * k)[0] for k in range(1, 5)],
                       np.exp(0.3))
    s = tower_sin(0.4, 4)
    c = tower_cos(0.4, 4)
    assert np.isclose(s.deriv(1).coeff((0,))[0], np.cos(0.4))
    assert np.isclose(s.deriv(2).coeff((0, 0))[0], -np.sin(0.4))
    assert np.isclose(c.deriv(3).coeff((0, 0, 0))[0], np.sin(0.4))
    e = tower_elementwise("exp", [0.1, 0.2], 2)
    assert e.deriv(2).coeff((0, 1))[0] == 0 and np.isclose(e.deriv(2).coeff((1, 1))[1], np.exp(0.2))


def test_tower_linear():
    A = [[1, 2], [3, Fraction(1, 2)]]
    t = tower_linear(A, [1, 1], 3)
    assert list(t.value) == [3, Fraction(7, 2)]
    assert list(t.deriv(1).coeff((1,))) == [2, Fraction(1, 2)]
    assert t.deriv(2).is_zero() and t.deriv(3).is_zero()


def test_tower_validation():
    with pytest.raises(DimensionError):
        DerivativeTower(np.array([Fraction(0)], dtype=object), np.array([Fraction(0)], dtype=object),
                        [SymMap(2, 1, 1)], RATIONAL)


@pytest.mark.parametrize("tower", [
    tower_polynomial(Polynomial.from_terms(2, 2, [(Fraction(1, 3), (2, 1), 0), (-2, (0, 1), 1)]),
                     [Fraction(1, 2), 3], 3),
    tower_exp(0.25, 4),
    tower_elementwise("sin", [0.1, -0.7], 3),
])
def test_json_round_trip(tower):
    import json
    data = json.loads(json.dumps(tower_to_dict(tower)))
    back = tower_from_dict(data)
    assert back == tower
    assert tower_to_dict(back) == data


def test_json_rational_strings():
    t = tower_polynomial(Polynomial.from_terms(1, 1, [(Fraction(1, 3), (2,), 0)]), [1], 2)
    d = tower_to_dict(t)
    assert d["value"] == ["1/3"]
    assert d["derivs"][0]["entries"] == [{"index": [0], "value": ["2/3"]}]


def test_polynomial_spec_round_trip():
    spec = {"kind": "polynomial", "in": 2, "out": 1,
            "terms": [{"coeff": "3/2", "exponents": [1, 2], "out_index": 0}]}
    poly = Polynomial.from_spec(spec)
    assert Polynomial.from_spec(poly.to_spec()) == poly
    assert poly([2, 1]) == [3]
