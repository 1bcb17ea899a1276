import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from faabruno import _kernels
from faabruno.chain_rule import compose_chain, compose_eval, compose_towers
from faabruno.errors import BasePointError, DimensionError, OrderError, RingMismatchError
from faabruno.multilinear import (FLOAT, Polynomial, tower_elementwise, tower_exp, tower_linear,
                                  tower_polynomial, tower_sin)
from faabruno.partitions import bell
from faabruno.verify import make_rng, random_point, random_polynomial, random_vector

BACKENDS = ["numpy", "generic"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])


def test_scalar_power_composite():
    # g(y) = y^3, f(x) = x^2 at x = 1: (x^6)' = 6, '' = 30, ''' = 120, '''' = 360
    f = tower_polynomial(Polynomial.from_terms(1, 1, [(1, (2,), 0)]), [1], 4)
    g = tower_polynomial(Polynomial.from_terms(1, 1, [(1, (3,), 0)]), f.value, 4)
    h = compose_towers(g, f, 4)
    assert [h.deriv(k).coeff((0,) * k)[0] for k in range(1, 5)] == [6, 30, 120, 360]


def test_product_of_square_and_identity():
    # (a, b) -> ab after x -> (x^2, x): x^3 at 1
    f = tower_polynomial(Polynomial.from_terms(1, 2, [(1, (2,), 0), (1, (1,), 1)]), [1], 3)
    g = tower_polynomial(Polynomial.from_terms(2, 1, [(1, (1, 1), 0)]), f.value, 3)
    h = compose_towers(g, f, 3)
    assert h.value[0] == 1
    assert [h.deriv(k).coeff((0,) * k)[0] for k in (1, 2, 3)] == [3, 6, 6]


@pytest.mark.parametrize("backend", BACKENDS)
def test_exp_exp_gives_bell_numbers(backend):
    h = compose_towers(tower_exp(1.0, 8), tower_exp(0.0, 8), 8, backend=backend)
    for k in range(1, 9):
        assert math.isclose(h.deriv(k).coeff((0,) * k)[0], bell(k) * math.e, rel_tol=1e-12)


def test_float_backends_agree_multivariate():
    f = tower_elementwise("sin", [0.3, -0.2, 0.5], 4)
    g = tower_linear([[1.0, 2.0, 0.5], [0.0, -1.0, 1.5]], f.value, 4)
    rng = np.random.default_rng(1)
    dirs = [rng.normal(size=3) for _ in range(4)]
    inner = compose_towers(g, f, 4)
    g2 = tower_elementwise("exp", inner.value, 4)
    results = [compose_eval(g2, inner, dirs, backend=b) for b in BACKENDS]
    for r in results[1:]:
        assert np.allclose(r, results[0], rtol=1e-12)


def test_partition_count_in_stats():
    f = tower_sin(0.1, 5)
    g = tower_exp(float(np.sin(0.1)), 5)
    stats = {}
    compose_eval(g, f, [np.ones(1)] * 5, stats=stats)
    assert stats["partitions"] == bell(5)


def _rational_pair(seed, order=3):
    rng = make_rng(seed, 0)
    p, q, r = (int(rng.integers(1, 4)) for _ in range(3))
    f = tower_polynomial(random_polynomial(rng, p, q), random_point(rng, p), order)
    g = tower_polynomial(random_polynomial(rng, q, r), f.value, order)
    return rng, f, g


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_symmetric_in_directions(seed, n):
    rng, f, g = _rational_pair(seed)
    dirs = [random_vector(rng, f.in_dim) for _ in range(n)]
    base = compose_eval(g, f, dirs)
    for perm in permutations(range(n)):
        assert np.all(compose_eval(g, f, [dirs[i] for i in perm]) == base)


@given(st.integers(0, 10 ** 6))
def test_multilinear_in_first_direction(seed):
    rng, f, g = _rational_pair(seed)
    a, b, c = (random_vector(rng, f.in_dim) for _ in range(3))
    s = Fraction(2, 3)
    left = compose_eval(g, f, [[s * x + y for x, y in zip(a, b)], c])
    assert np.all(left == s * compose_eval(g, f, [a, c]) + compose_eval(g, f, [b, c]))


@given(st.integers(0, 10 ** 6))
def test_identity_outer_and_inner(seed):
    rng, f, _ = _rational_pair(seed)
    eye_out = tower_linear(np.eye(f.out_dim, dtype=int).tolist(), f.value, 3)
    assert compose_towers(eye_out, f, 3) == f
    eye_in = tower_linear(np.eye(f.in_dim, dtype=int).tolist(), f.base_point, 3)
    assert compose_towers(f, eye_in, 3) == f


@given(st.integers(0, 10 ** 6))
def test_composite_order_zero_is_value(seed):
    _, f, g = _rational_pair(seed)
    assert np.all(compose_eval(g, f, []) == g.value)


def test_chain_association_and_validation():
    rng = make_rng(5, 0)
    towers, point = [], random_point(rng, 2)
    for a, b in [(2, 3), (3, 1), (1, 2)]:
        t = tower_polynomial(random_polynomial(rng, a, b), point, 3)
        towers.append(t)
        point = list(t.value)
    assert compose_chain(towers, 3, associate="left") == compose_chain(towers, 3, associate="right")
    with pytest.raises(ValueError):
        compose_chain(towers, 3, associate="middle")
    with pytest.raises(ValueError):
        compose_chain([], 3)


def test_contract_errors():
    f = tower_polynomial(Polynomial.from_terms(1, 2, [(1, (1,), 0), (1, (1,), 1)]), [1], 2)
    g1 = tower_polynomial(Polynomial.from_terms(3, 1, [(1, (1, 0, 0), 0)]), [1, 1, 1], 2)
    with pytest.raises(DimensionError):
        compose_eval(g1, f, [[1]])
    g_bad = tower_polynomial(Polynomial.from_terms(2, 1, [(1, (1, 0), 0)]), [2, 1], 2)
    with pytest.raises(BasePointError):
        compose_eval(g_bad, f, [[1]])
    g = tower_polynomial(Polynomial.from_terms(2, 1, [(1, (1, 0), 0)]), [1, 1], 2)
    with pytest.raises(OrderError):
        compose_eval(g, f, [[1]] * 3)
    gf = tower_elementwise("exp", [1.0, 1.0], 2)
    with pytest.raises(RingMismatchError):
        compose_eval(gf, f, [[1]])
    with pytest.raises(DimensionError):
        compose_eval(g, f, [[1, 2]])


def test_float_base_point_tolerance():
    f = tower_exp(0.0, 2)
    compose_eval(tower_exp(1.0 + 1e-13, 2), f, [[1.0]])
    with pytest.raises(BasePointError):
        compose_eval(tower_exp(1.0 + 1e-9, 2), f, [[1.0]])
    compose_eval(tower_exp(1.0 + 1e-9, 2), f, [[1.0]], atol=1e-8)
