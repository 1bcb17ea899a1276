"""JSON function-spec vocabulary: polynomials, exp/sin/cos, linear maps, composition.

Spec forms::

    {"kind": "polynomial", "in": p, "out": q,
     "terms": [{"coeff": "a/b", "exponents": [...], "out_index": j}, ...]}
    {"kind": "exp" | "sin" | "cos", "dim": d}          # "dim" defaults to 1
    {"kind": "linear", "matrix": [[...], ...]}
    {"kind": "compose", "outer": {...}, "inner": {...}}

Every node can produce a derivative tower at a point and a float black box.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain_rule import compose_towers
from .errors import DimensionError
from .multilinear import (FLOAT, RATIONAL, DerivativeTower, Polynomial, as_vector, infer_ring,
                          tower_elementwise, tower_linear, tower_polynomial)
from .strict_diff import BlackBoxMap

_NUMPY_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


class FunctionNode:
    in_dim: int
    out_dim: int

    @property
    def exact(self) -> bool:
        """Whether a rational tower can be built."""
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def tower(self, x, order: int, ring: str | None = None) -> DerivativeTower:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def black_box(self) -> BlackBoxMap:
        return BlackBoxMap(self.in_dim, self.out_dim, self.__call__)

    def default_ring(self, x) -> str:
        if not self.exact:
            return FLOAT
        return infer_ring(list(x))


@dataclass
class PolynomialNode(FunctionNode):
    poly: Polynomial

    @property
    def in_dim(self):
        return self.poly.in_dim

    @property
    def out_dim(self):
        return self.poly.out_dim

    @property
    def exact(self):
        return True

    def __call__(self, x):
        return np.array(self.poly([float(v) for v in x]), dtype=np.float64)

    def tower(self, x, order, ring=None):
        return tower_polynomial(self.poly, x, order, ring or self.default_ring(x))

    def to_spec(self):
        return self.poly.to_spec()


@dataclass
class ElementaryNode(FunctionNode):
    kind: str
    dim: int = 1

    @property
    def in_dim(self):
        return self.dim

    @property
    def out_dim(self):
        return self.dim

    @property
    def exact(self):
        return False

    def __call__(self, x):
        return _NUMPY_FUNCS[self.kind](np.asarray(x, dtype=np.float64))

    def tower(self, x, order, ring=None):
        if ring == RATIONAL:
            raise ValueError(f"{self.kind} has no rational tower")
        return tower_elementwise(self.kind, x, order)

    def to_spec(self):
        return {"kind": self.kind, "dim": self.dim}


@dataclass
class LinearNode(FunctionNode):
    matrix: list

    def __post_init__(self):
        if not self.matrix or any(len(r) != len(self.matrix[0]) for r in self.matrix):
            raise DimensionError("linear map needs a non-empty rectangular matrix")

    @property
    def in_dim(self):
        return len(self.matrix[0])

    @property
    def out_dim(self):
        return len(self.matrix)

    @property
    def exact(self):
        return infer_ring(self.matrix) == RATIONAL

    def __call__(self, x):
        m = np.array([[float(Fraction(a)) if isinstance(a, str) else float(a) for a in r]
                      for r in self.matrix])
        return m @ np.asarray(x, dtype=np.float64)

    def tower(self, x, order, ring=None):
        return tower_linear(self.matrix, x, order, ring or self.default_ring(x))

    def to_spec(self):
        return {"kind": "linear",
                "matrix": [[str(a) if isinstance(a, Fraction) else a for a in r] for r in self.matrix]}


@dataclass
class ComposeNode(FunctionNode):
    outer: FunctionNode
    inner: FunctionNode

    def __post_init__(self):
        if self.inner.out_dim != self.outer.in_dim:
            raise DimensionError(
                f"inner map has out_dim {self.inner.out_dim}, outer map has in_dim {self.outer.in_dim}")

    @property
    def in_dim(self):
        return self.inner.in_dim

    @property
    def out_dim(self):
        return self.outer.out_dim

    @property
    def exact(self):
        return self.outer.exact and self.inner.exact

    def __call__(self, x):
        return self.outer(self.inner(x))

    def tower(self, x, order, ring=None):
        ring = ring or self.default_ring(x)
        inner = self.inner.tower(x, order, ring)
        outer = self.outer.tower(inner.value, order, ring)
        return compose_towers(outer, inner, order)

    def to_spec(self):
        return {"kind": "compose", "outer": self.outer.to_spec(), "inner": self.inner.to_spec()}


def parse_spec(spec: dict) -> FunctionNode:
    """Build a :class:`FunctionNode` from its JSON spec; raises ``ValueError`` if malformed."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("function spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "polynomial":
        return PolynomialNode(Polynomial.from_spec(spec))
    if kind in _NUMPY_FUNCS:
        return ElementaryNode(kind, int(spec.get("dim", 1)))
    if kind == "linear":
        rows = spec.get("matrix")
        if not isinstance(rows, list) or not rows:
            raise ValueError("linear spec needs a non-empty 'matrix'")
        return LinearNode([[Fraction(a) if isinstance(a, (str, int)) else float(a) for a in r]
                           for r in rows])
    if kind == "compose":
        return ComposeNode(parse_spec(spec["outer"]), parse_spec(spec["inner"]))
    raise ValueError(f"unknown function kind {kind!r}")


def parse_point(text: str, ring: str) -> np.ndarray:
    """Comma-separated coordinates; rationals may be written ``a/b``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty point")
    if ring == RATIONAL:
        return as_vector([Fraction(p) for p in parts], RATIONAL)
    return as_vector([float(Fraction(p)) if "/" in p else float(p) for p in parts], FLOAT)

