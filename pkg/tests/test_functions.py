import math
from fractions import Fraction

import numpy as np
import pytest

from faabruno.errors import DimensionError
from faabruno.functions import (ComposeNode, ElementaryNode, LinearNode, parse_point, parse_spec)
from faabruno.multilinear import FLOAT, RATIONAL

SPECS = [
    {"kind": "polynomial", "in": 2, "out": 1,
     "terms": [{"coeff": "1/2", "exponents": [1, 1], "out_index": 0}]},
    {"kind": "exp", "dim": 1},
    {"kind": "sin", "dim": 2},
    {"kind": "linear", "matrix": [["1", "1/3"], ["0", "2"]]},
    {"kind": "compose", "outer": {"kind": "cos", "dim": 1},
     "inner": {"kind": "polynomial", "in": 1, "out": 1,
               "terms": [{"coeff": "2", "exponents": [2], "out_index": 0}]}},
]


@pytest.mark.parametrize("spec", SPECS)
def test_spec_round_trip(spec):
    node = parse_spec(spec)
    assert parse_spec(node.to_spec()).to_spec() == node.to_spec()


def test_rings():
    assert parse_spec(SPECS[0]).exact
    assert not parse_spec(SPECS[1]).exact
    assert parse_spec(SPECS[3]).exact
    assert not parse_spec(SPECS[4]).exact


def test_compose_tower_and_call():
    node = parse_spec(SPECS[4])  # cos(2 x^2)
    t = node.tower([0.5], 2)
    assert t.ring == FLOAT
    assert math.isclose(t.value[0], math.cos(0.5))
    assert math.isclose(t.deriv(1).coeff((0,))[0], -math.sin(0.5) * 2.0)
    assert np.allclose(node([0.5]), [math.cos(0.5)])


def test_rational_linear_tower():
    node = parse_spec(SPECS[3])
    t = node.tower(parse_point("3, 3", RATIONAL), 2)
    assert t.ring == RATIONAL and list(t.value) == [4, 6]
    assert list(node([3.0, 3.0])) == [4.0, 6.0]


def test_elementary_has_no_rational_tower():
    with pytest.raises(ValueError):
        ElementaryNode("exp").tower([Fraction(0)], 2, RATIONAL)


def test_bad_specs():
    for bad in [{}, {"kind": "tan"}, {"kind": "linear", "matrix": []}, [1, 2]]:
        with pytest.raises(ValueError):
            parse_spec(bad)
    with pytest.raises(DimensionError):
        LinearNode([[1, 2], [3]])
    with pytest.raises(DimensionError):
        ComposeNode(ElementaryNode("exp", 2), ElementaryNode("exp", 1))


def test_parse_point():
    assert list(parse_point("1/2, 3", RATIONAL)) == [Fraction(1, 2), 3]
    assert list(parse_point("0.25,1/4", FLOAT)) == [0.25, 0.25]
    with pytest.raises(ValueError):
        parse_point(" , ", FLOAT)


def test_black_box_counts_calls():
    box = parse_spec(SPECS[2]).black_box()
    box([0.0, 1.0])
    assert box.calls == 1
