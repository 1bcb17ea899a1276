"""Truncated formal power series over the rationals and their functionals.

A :class:`TruncatedSeries` is a polynomial in ``T_0..T_{n-1}`` with every
monomial of total degree above ``cap`` thrown away. Maps between formal
neighbourhoods of the origin are :class:`GermMap` objects, tuples of series
without constant term, acting on series by substitution.

Tangent vectors act as directional derivatives, and a product
``v_1 * ... * v_k`` of them acts on ``F`` as the constant term of
``D_{v_1} ... D_{v_k} F``, i.e. ``<F^(k)(0), v_1 x ... x v_k>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .errors import DimensionError
from .partitions import partitions_of, subsets_of

DEFAULT_CAP = 8


class TruncationError(ValueError):
    """The requested quantity depends on coefficients above the degree cap."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class TruncatedSeries:
    """Element of ``Q[[T_0..T_{n-1}]]`` modulo monomials of degree ``> cap``."""

    __slots__ = ("num_vars", "cap", "coeffs")

    def __init__(self, num_vars: int, cap: int = DEFAULT_CAP, coeffs=None):
        if num_vars < 0 or cap < 0:
            raise ValueError("num_vars and cap must be non-negative")
        self.num_vars = num_vars
        self.cap = cap
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, c in (coeffs or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars or any(e < 0 for e in exps):
                raise DimensionError(f"bad exponent vector {exps} for {num_vars} variables")
            if sum(exps) > cap:
                continue
            c = _frac(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
        self.coeffs = {k: v for k, v in sorted(clean.items()) if v}

    # constructors -------------------------------------------------------------

    @classmethod
    def constant(cls, num_vars: int, cap: int, value) -> "TruncatedSeries":
        return cls(num_vars, cap, {(0,) * num_vars: value})

    @classmethod
    def one(cls, num_vars: int, cap: int = DEFAULT_CAP) -> "TruncatedSeries":
        return cls.constant(num_vars, cap, 1)

    @classmethod
    def variable(cls, index: int, num_vars: int, cap: int = DEFAULT_CAP) -> "TruncatedSeries":
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, cap, {tuple(exps): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], cap: int = DEFAULT_CAP, coeff=1) -> "TruncatedSeries":
        return cls(len(exps), cap, {tuple(exps): coeff})

    # structure ----------------------------------------------------------------

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError("operand is not a TruncatedSeries")
        if (self.num_vars, self.cap) != (other.num_vars, other.cap):
            raise DimensionError(
                f"series mismatch: vars {self.num_vars}/{other.num_vars}, cap {self.cap}/{other.cap}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return TruncatedSeries(self.num_vars, self.cap, out)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.num_vars, self.cap, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, c) -> "TruncatedSeries":
        c = _frac(c)
        return TruncatedSeries(self.num_vars, self.cap, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        out: dict[tuple[int, ...], Fraction] = {}
        cap = self.cap
        for ka, va in self.coeffs.items():
            da = sum(ka)
            for kb, vb in other.coeffs.items():
                if da + sum(kb) > cap:
                    continue
                key = tuple(a + b for a, b in zip(ka, kb))
                out[key] = out.get(key, Fraction(0)) + va * vb
        return TruncatedSeries(self.num_vars, cap, out)

    __rmul__ = scale

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            raise ValueError("negative power")
        result = TruncatedSeries.one(self.num_vars, self.cap)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.num_vars, self.cap, self.coeffs) == (other.num_vars, other.cap, other.coeffs)

    def __hash__(self):
        return hash((self.num_vars, self.cap, tuple(self.coeffs.items())))

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"TruncatedSeries(0; vars={self.num_vars}, cap={self.cap})"
        terms = []
        for exps, c in self.coeffs.items():
            mono = "*".join(f"T{i}^{e}" if e > 1 else f"T{i}" for i, e in enumerate(exps) if e)
            terms.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"TruncatedSeries({' + '.join(terms)}; cap={self.cap})"

    def constant_term(self) -> Fraction:
        return self.coeffs.get((0,) * self.num_vars, Fraction(0))

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self.coeffs.get(tuple(exps), Fraction(0))

    def truncate(self, cap: int) -> "TruncatedSeries":
        """Re-cap at ``cap <= self.cap``."""
        if cap > self.cap:
            raise TruncationError("cannot raise the cap of a truncated series")
        return TruncatedSeries(self.num_vars, cap, self.coeffs)

    def partial(self, index: int) -> "TruncatedSeries":
        """``dF/dT_index``. The result is exact only up to degree ``cap - 1``."""
        out = {}
        for exps, c in self.coeffs.items():
            e = exps[index]
            if e:
                key = exps[:index] + (e - 1,) + exps[index + 1:]
                out[key] = c * e
        return TruncatedSeries(self.num_vars, self.cap, out)

    def directional(self, v: Sequence) -> "TruncatedSeries":
        """The action ``v * F`` of a tangent vector: ``sum_j v_j dF/dT_j``."""
        if len(v) != self.num_vars:
            raise DimensionError("tangent vector length differs from number of variables")
        out = TruncatedSeries(self.num_vars, self.cap)
        for j, vj in enumerate(v):
            vj = _frac(vj)
            if vj:
                out = out + self.partial(j).scale(vj)
        return out

    def to_dict(self) -> dict:
        return {"num_vars": self.num_vars, "cap": self.cap,
                "coeffs": [{"exponents": list(k), "coeff": str(v)} for k, v in self.coeffs.items()]}


# convenience wrappers matching the operation names elsewhere in the package
def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def scalar_mul(c, a: TruncatedSeries) -> TruncatedSeries:
    return a.scale(c)


@dataclass(frozen=True)
class GermMap:
    """Germ of a map ``(Q^n, 0) -> (Q^m, 0)`` given by ``m`` component series."""

    components: tuple[TruncatedSeries, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise DimensionError("a germ map needs at least one component")
        n, cap = comps[0].num_vars, comps[0].cap
        for c in comps:
            if (c.num_vars, c.cap) != (n, cap):
                raise DimensionError("germ components must share variables and cap")
            if c.constant_term() != 0:
                raise ValueError("germ map components must have zero constant term")

    @property
    def source_vars(self) -> int:
        return self.components[0].num_vars

    @property
    def target_vars(self) -> int:
        return len(self.components)

    @property
    def cap(self) -> int:
        return self.components[0].cap

    @classmethod
    def identity(cls, n: int, cap: int = DEFAULT_CAP) -> "GermMap":
        return cls(tuple(TruncatedSeries.variable(i, n, cap) for i in range(n)))

    @classmethod
    def linear(cls, matrix, cap: int = DEFAULT_CAP) -> "GermMap":
        """Germ of ``T -> M T``; ``matrix`` has one row per target variable."""
        rows = [[_frac(a) for a in r] for r in matrix]
        n = len(rows[0])
        comps = []
        for r in rows:
            comps.append(TruncatedSeries(n, cap, {
                tuple(1 if k == i else 0 for k in range(n)): a for i, a in enumerate(r)}))
        return cls(tuple(comps))


def substitute(F: TruncatedSeries, phi: GermMap) -> TruncatedSeries:
    """``F(phi_0(T), ..., phi_{m-1}(T))``, truncated at the common cap."""
    if F.num_vars != phi.target_vars:
        raise DimensionError(f"series has {F.num_vars} variables, germ targets {phi.target_vars}")
    if F.cap != phi.cap:
        raise DimensionError(f"cap mismatch: series {F.cap}, germ {phi.cap}")
    n, cap = phi.source_vars, phi.cap
    powers: list[list[TruncatedSeries]] = [[TruncatedSeries.one(n, cap)] for _ in phi.components]

    def power(i: int, e: int) -> TruncatedSeries:
        cache = powers[i]
        while len(cache) <= e:
            cache.append(cache[-1] * phi.components[i])
        return cache[e]

    out: dict[tuple[int, ...], Fraction] = {}
    for exps, c in F.coeffs.items():
        term = TruncatedSeries.constant(n, cap, c)
        for i, e in enumerate(exps):
            if e:
                term = term * power(i, e)
        for k, v in term.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
    return TruncatedSeries(n, cap, out)


def derivative_functional(vs: Sequence[Sequence], F: TruncatedSeries) -> Fraction:
    """``(v_1 * ... * v_k)(F)``: apply each directional derivative, take the constant term."""
    k = len(vs)
    if k > F.cap:
        raise TruncationError(f"order {k} functional needs cap >= {k}, series has cap {F.cap}")
    G = F
    for v in vs:
        G = G.directional(v)
    return G.constant_term()


def _restrict(vs, idx):
    return [vs[i] for i in idx]


def leibniz_check(vs: Sequence[Sequence], F: TruncatedSeries, G: TruncatedSeries) -> bool:
    """Check ``(*_I v)(FG) = sum_{S subset I} (*_S v)(F) (*_{I-S} v)(G)`` exactly."""
    k = len(vs)
    lhs = derivative_functional(vs, F * G)
    rhs = Fraction(0)
    for S in subsets_of(k):
        rest = [i for i in range(k) if i not in S]
        rhs += derivative_functional(_restrict(vs, S), F) * derivative_functional(_restrict(vs, rest), G)
    return lhs == rhs


def multifactor_split_check(vs: Sequence[Sequence], factors: Sequence[TruncatedSeries]) -> bool:
    """Check ``(*_I v)(F_1...F_j) = sum over maps I -> {1..j} of prod_r (*_{S_r} v)(F_r)``."""
    if not factors:
        raise ValueError("need at least one factor")
    k, j = len(vs), len(factors)
    prod_series = factors[0]
    for F in factors[1:]:
        prod_series = prod_series * F
    lhs = derivative_functional(vs, prod_series)
    rhs = Fraction(0)
    for assignment in product(range(j), repeat=k):
        term = Fraction(1)
        for r, F in enumerate(factors):
            idx = [i for i in range(k) if assignment[i] == r]
            term *= derivative_functional(_restrict(vs, idx), F)
            if not term:
                break
        rhs += term
    return lhs == rhs


def pushforward(phi: GermMap, vs: Sequence[Sequence]) -> list[Fraction]:
    """Components ``derivative_functional(vs, phi_j)``: the vector ``<f^(k)(0), (x) vs>``."""
    return [derivative_functional(vs, c) for c in phi.components]


def verify_alg7(phi: GermMap, vs: Sequence[Sequence], probes: Sequence[TruncatedSeries]) -> bool:
    """Compare both sides of the partition formula for the image of ``*_I v`` under ``phi``.

    Left side: the functional applied to ``substitute(F, phi)``. Right side:
    for every partition of ``I``, the product of the pushed-forward vectors
    ``w_S = <f^(|S|)(0), (x)_{i in S} v_i>`` applied to ``F``.
    """
    k = len(vs)
    if k > phi.cap:
        raise TruncationError(f"order {k} exceeds germ cap {phi.cap}")
    pushed = {}
    for S in subsets_of(k):
        if S:
            pushed[S] = pushforward(phi, _restrict(vs, S))
    for F in probes:
        if F.num_vars != phi.target_vars:
            raise DimensionError("probe lives in the wrong algebra")
        lhs = derivative_functional(vs, substitute(F, phi))
        rhs = Fraction(0)
        for pi in partitions_of(k):
            rhs += derivative_functional([pushed[S] for S in pi.blocks], F)
        if lhs != rhs:
            return False
    return True


def monomial_probes(num_vars: int, max_degree: int, cap: int) -> list[TruncatedSeries]:
    """All monomials of total degree ``<= max_degree`` in ``num_vars`` variables."""
    out = []
    for exps in product(range(max_degree + 1), repeat=num_vars):
        if sum(exps) <= max_degree:
            out.append(TruncatedSeries.monomial(exps, cap))
    return out


def series_from_polynomial(poly, x, cap: int, component: int) -> TruncatedSeries:
    """Series of ``T -> poly(x + T)[component]`` by exact binomial expansion."""
    n = poly.in_dim
    x = [_frac(v) for v in x]
    out: dict[tuple[int, ...], Fraction] = {}
    for coeff, exps, j in poly.terms:
        if j != component:
            continue
        # (x_i + T_i)^e = sum_a C(e, a) x_i^(e-a) T_i^a
        per_var = [[(a, math.comb(e, a) * x[i] ** (e - a)) for a in range(e + 1)]
                   for i, e in enumerate(exps)]
        for choice in product(*per_var):
            key = tuple(a for a, _ in choice)
            if sum(key) > cap:
                continue
            c = coeff
            for _, w in choice:
                c *= w
            out[key] = out.get(key, Fraction(0)) + c
    return TruncatedSeries(n, cap, out)


def germ_from_polynomial(poly, x, cap: int) -> GermMap:
    """Germ of ``T -> poly(x + T) - poly(x)``."""
    comps = []
    for j in range(poly.out_dim):
        s = series_from_polynomial(poly, x, cap, j)
        comps.append(s - TruncatedSeries.constant(poly.in_dim, cap, s.constant_term()))
    return GermMap(tuple(comps))


def normalized_coefficient(F: TruncatedSeries, key: Sequence[int]) -> Fraction:
    """``alpha! * [T^alpha] F`` for the exponent vector ``alpha`` counted from a sorted key."""
    exps = [0] * F.num_vars
    for i in key:
        exps[i] += 1
    weight = 1
    for e in exps:
        weight *= math.factorial(e)
    return weight * F.coeff(exps)
