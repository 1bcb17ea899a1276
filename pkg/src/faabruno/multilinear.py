"""Symmetric multilinear maps and derivative towers.

A :class:`SymMap` of arity ``k`` from ``(R^p)^k`` to ``R^q`` is stored by its
values on sorted basis tuples ``(i1 <= ... <= ik)``. The stored value is the
plain pairing ``<T, e_i1 x ... x e_ik>``, i.e. the honest partial derivative
when the map is a derivative tensor; no multinomial weight is folded in.

Two scalar rings are supported, exact rationals (``Fraction`` entries in
object arrays) and ``float64``. A tower or a composition never mixes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, RingMismatchError

RATIONAL = "rational"
FLOAT = "float"
RINGS = (RATIONAL, FLOAT)


def to_scalar(x, ring: str):
    if ring == RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, (float, np.floating)):
            if not math.isfinite(x):
                raise ValueError(f"non-finite scalar {x!r} in rational ring")
            return Fraction(float(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to a rational")
    if ring == FLOAT:
        if isinstance(x, str):
            return float(Fraction(x))
        return float(x)
    raise ValueError(f"unknown ring {ring!r}")


def as_vector(values, ring: str, length: int | None = None) -> np.ndarray:
    if ring == FLOAT:
        vec = np.array([to_scalar(v, ring) for v in np.ravel(np.asarray(values, dtype=object))],
                       dtype=np.float64)
    else:
        vec = np.array([to_scalar(v, ring) for v in np.ravel(np.asarray(values, dtype=object))],
                       dtype=object)
    if length is not None and vec.shape[0] != length:
        raise DimensionError(f"expected vector of length {length}, got {vec.shape[0]}")
    return vec


def zeros(length: int, ring: str) -> np.ndarray:
    if ring == FLOAT:
        return np.zeros(length)
    return np.array([Fraction(0)] * length, dtype=object)


def infer_ring(*collections) -> str:
    """``FLOAT`` if any float appears anywhere in the arguments, else ``RATIONAL``."""

    def has_float(obj) -> bool:
        if isinstance(obj, (float, np.floating)):
            return True
        if isinstance(obj, np.ndarray):
            if obj.dtype.kind == "f":
                return True
            return obj.dtype == object and any(has_float(v) for v in obj.ravel())
        if isinstance(obj, (list, tuple)):
            return any(has_float(v) for v in obj)
        return False

    return FLOAT if any(has_float(c) for c in collections) else RATIONAL


def multi_indices(dim: int, arity: int) -> Iterable[tuple[int, ...]]:
    """All nondecreasing index tuples of length ``arity`` over ``range(dim)``."""
    return combinations_with_replacement(range(dim), arity)


def arrangements(key: Sequence[int]) -> int:
    """Number of distinct orderings of the multiset ``key``."""
    out = math.factorial(len(key))
    for i in set(key):
        out //= math.factorial(key.count(i))
    return out


class SymMap:
    """Symmetric ``k``-linear map ``(R^p)^k -> R^q`` in sorted-key storage.

    Missing keys are zero. ``coeffs`` may be given with unsorted keys only if
    ``sort_keys=True``; otherwise every key must already be nondecreasing.
    """

    __slots__ = ("arity", "in_dim", "out_dim", "ring", "coeffs")

    def __init__(self, arity: int, in_dim: int, out_dim: int, coeffs=None,
                 ring: str = RATIONAL, sort_keys: bool = False):
        if arity < 1:
            raise DimensionError("SymMap arity must be >= 1")
        if ring not in RINGS:
            raise ValueError(f"unknown ring {ring!r}")
        self.arity = arity
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.ring = ring
        self.coeffs: dict[tuple[int, ...], np.ndarray] = {}
        for key, val in (coeffs or {}).items():
            key = tuple(int(i) for i in key)
            if sort_keys:
                key = tuple(sorted(key))
            if len(key) != arity:
                raise DimensionError(f"key {key} has arity {len(key)}, expected {arity}")
            if any(a > b for a, b in zip(key, key[1:])):
                raise DimensionError(f"key {key} is not nondecreasing")
            if key and (key[0] < 0 or key[-1] >= in_dim):
                raise DimensionError(f"key {key} out of range for in_dim {in_dim}")
            vec = as_vector(val, ring, out_dim)
            if key in self.coeffs:
                self.coeffs[key] = self.coeffs[key] + vec
            else:
                self.coeffs[key] = vec

    @classmethod
    def zero(cls, arity: int, in_dim: int, out_dim: int, ring: str = RATIONAL) -> "SymMap":
        return cls(arity, in_dim, out_dim, {}, ring)

    def coeff(self, index: Sequence[int]) -> np.ndarray:
        """Value on the basis tuple ``index`` (any order)."""
        key = tuple(sorted(index))
        if len(key) != self.arity:
            raise DimensionError("index arity mismatch")
        val = self.coeffs.get(key)
        return zeros(self.out_dim, self.ring) if val is None else val.copy()

    def eval(self, args: Sequence) -> np.ndarray:
        """Evaluate ``<T, args[0] x ... x args[k-1]>``.

        Arguments are contracted one at a time. After ``r`` contractions the
        partial result is again stored by sorted keys of length ``k - r``, so
        the cost is polynomial in ``C(p + k - 1, k)`` rather than ``p**k``.
        """
        if len(args) != self.arity:
            raise DimensionError(f"expected {self.arity} arguments, got {len(args)}")
        vecs = [as_vector(a, self.ring, self.in_dim) for a in args]
        partial = self.coeffs
        for vec in vecs:
            nxt: dict[tuple[int, ...], np.ndarray] = {}
            for key, val in partial.items():
                prev = None
                for pos, j in enumerate(key):
                    if j == prev:
                        continue
                    prev = j
                    w = vec[j]
                    if w == 0:
                        continue
                    rest = key[:pos] + key[pos + 1:]
                    if rest in nxt:
                        nxt[rest] = nxt[rest] + w * val
                    else:
                        nxt[rest] = w * val
            partial = nxt
        out = partial.get(())
        return zeros(self.out_dim, self.ring) if out is None else out

    def to_dense(self) -> np.ndarray:
        """Full array of shape ``(q, p, ..., p)`` with every permutation filled in."""
        dtype = np.float64 if self.ring == FLOAT else object
        shape = (self.out_dim,) + (self.in_dim,) * self.arity
        dense = np.zeros(shape, dtype=dtype)
        if self.ring == RATIONAL:
            dense[...] = Fraction(0)
        for key, val in self.coeffs.items():
            for perm in set(permutations(key)):
                dense[(slice(None),) + perm] = val
        return dense

    def items(self):
        """Stored entries in sorted key order."""
        return sorted(self.coeffs.items())

    def is_zero(self) -> bool:
        return all(not np.any(v != 0) for v in self.coeffs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMap):
            return NotImplemented
        if (self.arity, self.in_dim, self.out_dim, self.ring) != (
                other.arity, other.in_dim, other.out_dim, other.ring):
            return False
        for key in set(self.coeffs) | set(other.coeffs):
            if np.any(self.coeff(key) != other.coeff(key)):
                return False
        return True

    def __repr__(self) -> str:
        return (f"SymMap(arity={self.arity}, in_dim={self.in_dim}, out_dim={self.out_dim}, "
                f"ring={self.ring!r}, nnz={len(self.coeffs)})")


@dataclass(eq=False)
class DerivativeTower:
    """Value and derivative tensors of orders ``1..N`` of one map at one point."""

    base_point: np.ndarray
    value: np.ndarray
    derivs: list[SymMap] = field(default_factory=list)
    ring: str = RATIONAL

    def __post_init__(self):
        self.base_point = as_vector(self.base_point, self.ring)
        self.value = as_vector(self.value, self.ring)
        for k, d in enumerate(self.derivs, start=1):
            if d.arity != k:
                raise DimensionError(f"derivs[{k - 1}] has arity {d.arity}, expected {k}")
            if d.ring != self.ring:
                raise RingMismatchError("tensor ring differs from tower ring")
            if d.in_dim != self.in_dim or d.out_dim != self.out_dim:
                raise DimensionError(f"order-{k} tensor dimensions inconsistent with tower")

    @property
    def in_dim(self) -> int:
        return self.base_point.shape[0]

    @property
    def out_dim(self) -> int:
        return self.value.shape[0]

    @property
    def order(self) -> int:
        return len(self.derivs)

    def deriv(self, k: int) -> SymMap:
        """The order-``k`` tensor, ``k >= 1``."""
        return self.derivs[k - 1]

    def truncate(self, order: int) -> "DerivativeTower":
        if order > self.order:
            raise ValueError(f"tower has order {self.order}, cannot truncate to {order}")
        return DerivativeTower(self.base_point.copy(), self.value.copy(),
                               list(self.derivs[:order]), self.ring)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DerivativeTower):
            return NotImplemented
        return (self.ring == other.ring
                and self.base_point.shape == other.base_point.shape
                and self.value.shape == other.value.shape
                and bool(np.all(self.base_point == other.base_point))
                and bool(np.all(self.value == other.value))
                and self.derivs == other.derivs)


@dataclass(frozen=True)
class Polynomial:
    """Vector polynomial ``R^p -> R^q`` as a list of monomial terms.

    Each term is ``(coeff, exponents, out_index)``: it contributes
    ``coeff * prod(x[i] ** exponents[i])`` to output component ``out_index``.
    """

    in_dim: int
    out_dim: int
    terms: tuple[tuple[Fraction, tuple[int, ...], int], ...]

    def __post_init__(self):
        for coeff, exps, j in self.terms:
            if len(exps) != self.in_dim:
                raise ValueError(f"exponent vector {exps} does not match in_dim {self.in_dim}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            if not 0 <= j < self.out_dim:
                raise ValueError(f"out_index {j} out of range")
            if not isinstance(coeff, Fraction):
                raise ValueError("polynomial coefficients must be Fractions")

    @classmethod
    def from_terms(cls, in_dim: int, out_dim: int, terms) -> "Polynomial":
        return cls(in_dim, out_dim, tuple(
            (to_scalar(c, RATIONAL), tuple(int(e) for e in exps), int(j)) for c, exps, j in terms))

    @classmethod
    def from_spec(cls, spec: dict) -> "Polynomial":
        try:
            p, q = int(spec["in"]), int(spec["out"])
            terms = [(t["coeff"], t["exponents"], t.get("out_index", 0)) for t in spec["terms"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial spec: {exc}") from exc
        return cls.from_terms(p, q, terms)

    def to_spec(self) -> dict:
        return {"kind": "polynomial", "in": self.in_dim, "out": self.out_dim,
                "terms": [{"coeff": str(c), "exponents": list(e), "out_index": j}
                          for c, e, j in self.terms]}

    @property
    def degree(self) -> int:
        return max((sum(e) for c, e, _ in self.terms if c != 0), default=0)

    def __call__(self, x):
        out = [0] * self.out_dim
        for coeff, exps, j in self.terms:
            term = coeff if not isinstance(x[0], (float, np.floating)) else float(coeff)
            for xi, e in zip(x, exps):
                if e:
                    term = term * xi ** e
            out[j] = out[j] + term
        return out


def tower_polynomial(poly: Polynomial, x, order: int, ring: str | None = None) -> DerivativeTower:
    """Exact derivative tower of a polynomial at ``x``.

    Each monomial is differentiated symbolically: for a sorted key with
    index counts ``c``, ``d^c x^e = prod(e_i! / (e_i - c_i)!) x^(e - c)``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    ring = ring or infer_ring(list(x))
    xv = as_vector(x, ring, poly.in_dim)
    p, q = poly.in_dim, poly.out_dim

    def monomial_value(exps, counts):
        factor = 1
        val = to_scalar(1, ring)
        for i in range(p):
            e, c = exps[i], counts[i]
            if c > e:
                return None
            factor *= math.factorial(e) // math.factorial(e - c)
            if e - c:
                val = val * xv[i] ** (e - c)
        return factor * val

    value = zeros(q, ring)
    for coeff, exps, j in poly.terms:
        v = monomial_value(exps, (0,) * p)
        value[j] = value[j] + to_scalar(coeff, ring) * v

    derivs = []
    for k in range(1, order + 1):
        coeffs = {}
        for key in multi_indices(p, k):
            counts = [key.count(i) for i in range(p)]
            vec = zeros(q, ring)
            hit = False
            for coeff, exps, j in poly.terms:
                v = monomial_value(exps, counts)
                if v is not None:
                    vec[j] = vec[j] + to_scalar(coeff, ring) * v
                    hit = True
            if hit and np.any(vec != 0):
                coeffs[key] = vec
        derivs.append(SymMap(k, p, q, coeffs, ring))
    return DerivativeTower(xv, value, derivs, ring)


_ELEMENTARY = {
    # k-th derivative of each function as a function of x
    "exp": lambda x, k: math.exp(x),
    "sin": lambda x, k: (math.sin(x), math.cos(x), -math.sin(x), -math.cos(x))[k % 4],
    "cos": lambda x, k: (math.cos(x), -math.sin(x), -math.cos(x), math.sin(x))[k % 4],
}


def _tower_scalar(kind: str, x, order: int) -> DerivativeTower:
    x = float(x)
    d = _ELEMENTARY[kind]
    derivs = [SymMap(k, 1, 1, {(0,) * k: [d(x, k)]}, FLOAT) for k in range(1, order + 1)]
    return DerivativeTower(np.array([x]), np.array([d(x, 0)]), derivs, FLOAT)


def tower_exp(x, order: int) -> DerivativeTower:
    return _tower_scalar("exp", x, order)


def tower_sin(x, order: int) -> DerivativeTower:
    return _tower_scalar("sin", x, order)


def tower_cos(x, order: int) -> DerivativeTower:
    return _tower_scalar("cos", x, order)


def tower_elementwise(kind: str, x, order: int) -> DerivativeTower:
    """Tower of ``exp``, ``sin`` or ``cos`` applied to each coordinate of ``x``.

    Only diagonal keys ``(i, ..., i)`` are nonzero.
    """
    if kind not in _ELEMENTARY:
        raise ValueError(f"unknown elementary function {kind!r}")
    xv = as_vector(x, FLOAT)
    d = _ELEMENTARY[kind]
    dim = xv.shape[0]
    value = np.array([d(xi, 0) for xi in xv])
    derivs = []
    for k in range(1, order + 1):
        coeffs = {}
        for i in range(dim):
            vec = np.zeros(dim)
            vec[i] = d(xv[i], k)
            coeffs[(i,) * k] = vec
        derivs.append(SymMap(k, dim, dim, coeffs, FLOAT))
    return DerivativeTower(xv, value, derivs, FLOAT)


def tower_linear(A, x, order: int, ring: str | None = None) -> DerivativeTower:
    """Tower of ``x -> A x``: first tensor ``A``, higher tensors zero."""
    rows = [list(r) for r in A]
    q = len(rows)
    if q == 0:
        raise DimensionError("matrix must have at least one row")
    p = len(rows[0])
    if any(len(r) != p for r in rows):
        raise DimensionError("ragged matrix")
    ring = ring or infer_ring(rows, list(x))
    xv = as_vector(x, ring, p)
    mat = np.array([[to_scalar(a, ring) for a in r] for r in rows],
                   dtype=np.float64 if ring == FLOAT else object)
    value = zeros(q, ring)
    for j in range(q):
        for i in range(p):
            value[j] = value[j] + mat[j, i] * xv[i]
    derivs = []
    if order >= 1:
        derivs.append(SymMap(1, p, q, {(i,): mat[:, i] for i in range(p) if np.any(mat[:, i] != 0)},
                             ring))
    for k in range(2, order + 1):
        derivs.append(SymMap.zero(k, p, q, ring))
    return DerivativeTower(xv, value, derivs, ring)


# JSON tower schema -----------------------------------------------------------

def _scalar_json(v, ring):
    return str(v) if ring == RATIONAL else float(v)


def tower_to_dict(tower: DerivativeTower) -> dict:
    """Serialize in the documented tower schema; rationals become ``"a/b"`` strings."""
    r = tower.ring
    return {
        "in_dim": tower.in_dim,
        "out_dim": tower.out_dim,
        "ring": r,
        "base_point": [_scalar_json(v, r) for v in tower.base_point],
        "value": [_scalar_json(v, r) for v in tower.value],
        "derivs": [
            {"order": d.arity,
             "entries": [{"index": list(key), "value": [_scalar_json(v, r) for v in val]}
                         for key, val in d.items()]}
            for d in tower.derivs
        ],
    }


def tower_from_dict(data: dict) -> DerivativeTower:
    ring = data.get("ring")
    if ring is None:
        ring = RATIONAL if all(isinstance(v, str) for v in data["value"]) else FLOAT
    p, q = int(data["in_dim"]), int(data["out_dim"])
    derivs = []
    for k, d in enumerate(sorted(data["derivs"], key=lambda d: d["order"]), start=1):
        if int(d["order"]) != k:
            raise ValueError(f"tower orders must be contiguous from 1, found {d['order']}")
        derivs.append(SymMap(k, p, q, {tuple(e["index"]): e["value"] for e in d["entries"]}, ring))
    return DerivativeTower(as_vector(data["base_point"], ring, p), as_vector(data["value"], ring, q),
                           derivs, ring)
