"""Integer group algebras over formal sums of the symbols ``vbar, v_1 .. v_n``.

Level 1 is the group algebra ``E X`` of the additive monoid ``X`` generated
by the symbols: a basis element ``E x`` per point ``x`` (a multiplicity
vector, ``vbar`` at index 0), with ``E x * E y = E(x + y)``. Level 2 is the
group algebra over the additive group of level-1 sums: basis elements
``E[p]`` for canonical level-1 sums ``p``, with ``E[p] * E[q] = E[p + q]``.

``E`` of a point and ``E[...]`` of a level-1 sum are different constructors
(:func:`E` and :func:`promote`); nothing converts between levels implicitly.
"""

from __future__ import annotations

import json
from collections import defaultdict
from typing import Iterable, Sequence

from . import _kernels
from .partitions import CapacityError, covers_of, mask_to_subset, subsets_of

MAX_LEMMA2_N = 4

Point = tuple[int, ...]


def _nonzero(d: dict) -> dict:
    return {k: v for k, v in sorted(d.items()) if v}


class Level1Sum:
    """Integer combination of points; ``alphabet`` is the point length ``n + 1``."""

    __slots__ = ("alphabet", "terms", "_key")

    def __init__(self, alphabet: int, terms: dict | None = None):
        self.alphabet = alphabet
        clean = {}
        for pt, c in (terms or {}).items():
            pt = tuple(int(m) for m in pt)
            if len(pt) != alphabet or any(m < 0 for m in pt):
                raise ValueError(f"bad point {pt} for alphabet of size {alphabet}")
            clean[pt] = clean.get(pt, 0) + int(c)
        self.terms = _nonzero(clean)
        self._key = None

    @property
    def key(self) -> tuple:
        """Canonical hashable form: sorted ``(point, coeff)`` pairs."""
        if self._key is None:
            self._key = tuple(self.terms.items())
        return self._key

    @classmethod
    def from_key(cls, alphabet: int, key: tuple) -> "Level1Sum":
        return cls(alphabet, dict(key))

    def _check(self, other):
        if not isinstance(other, Level1Sum):
            raise TypeError("operand is not a Level1Sum")
        if other.alphabet != self.alphabet:
            raise ValueError(f"alphabet mismatch: {self.alphabet} vs {other.alphabet}")

    def __add__(self, other: "Level1Sum") -> "Level1Sum":
        self._check(other)
        out = dict(self.terms)
        for pt, c in other.terms.items():
            out[pt] = out.get(pt, 0) + c
        return Level1Sum(self.alphabet, out)

    def __neg__(self) -> "Level1Sum":
        return Level1Sum(self.alphabet, {pt: -c for pt, c in self.terms.items()})

    def __sub__(self, other: "Level1Sum") -> "Level1Sum":
        return self + (-other)

    def __mul__(self, other: "Level1Sum") -> "Level1Sum":
        self._check(other)
        out: dict[Point, int] = defaultdict(int)
        for pa, ca in self.terms.items():
            for pb, cb in other.terms.items():
                out[tuple(a + b for a, b in zip(pa, pb))] += ca * cb
        return Level1Sum(self.alphabet, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Level1Sum):
            return NotImplemented
        return self.alphabet == other.alphabet and self.key == other.key

    def __hash__(self):
        return hash((self.alphabet, self.key))

    def __repr__(self) -> str:
        return f"Level1Sum({format_level1(self.key)})"


class Level2Sum:
    """Integer combination of basis elements ``E[p]``, keyed by canonical level-1 sums."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: int, terms: dict | None = None):
        self.alphabet = alphabet
        clean: dict[tuple, int] = {}
        for k, c in (terms or {}).items():
            if isinstance(k, Level1Sum):
                k = k.key
            clean[k] = clean.get(k, 0) + int(c)
        self.terms = _nonzero(clean)

    def _check(self, other):
        if not isinstance(other, Level2Sum):
            raise TypeError("operand is not a Level2Sum")
        if other.alphabet != self.alphabet:
            raise ValueError(f"alphabet mismatch: {self.alphabet} vs {other.alphabet}")

    def __add__(self, other: "Level2Sum") -> "Level2Sum":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return Level2Sum(self.alphabet, out)

    def __neg__(self) -> "Level2Sum":
        return Level2Sum(self.alphabet, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Level2Sum") -> "Level2Sum":
        return self + (-other)

    def __mul__(self, other: "Level2Sum") -> "Level2Sum":
        self._check(other)
        out: dict[tuple, int] = defaultdict(int)
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                out[_add_keys(ka, kb)] += ca * cb
        return Level2Sum(self.alphabet, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Level2Sum):
            return NotImplemented
        return self.alphabet == other.alphabet and self.terms == other.terms

    def __hash__(self):
        return hash((self.alphabet, tuple(self.terms.items())))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        inner = " + ".join(f"{c}*E[{format_level1(k)}]" for k, c in self.terms.items())
        return f"Level2Sum({inner or '0'})"

    def canonical(self) -> "Level2Sum":
        return Level2Sum(self.alphabet, self.terms)

    def serialize(self) -> bytes:
        """Canonical bytes; equal sums serialize identically."""
        doc = {"alphabet": self.alphabet,
               "terms": [[[[list(pt), c1] for pt, c1 in k], c] for k, c in self.terms.items()]}
        return json.dumps(doc, separators=(",", ":")).encode()


def _add_keys(ka: tuple, kb: tuple) -> tuple:
    out = dict(ka)
    for pt, c in kb:
        v = out.get(pt, 0) + c
        if v:
            out[pt] = v
        else:
            del out[pt]
    return tuple(sorted(out.items()))


def format_level1(key: tuple) -> str:
    if not key:
        return "0"
    parts = []
    for pt, c in key:
        sym = "+".join(
            (f"{m}*" if m > 1 else "") + ("vbar" if i == 0 else f"v{i}")
            for i, m in enumerate(pt) if m) or "0"
        parts.append(f"{c}*E({sym})")
    return " + ".join(parts)


# constructors ---------------------------------------------------------------

def point(alphabet: int, *symbols: int) -> Point:
    """Point with multiplicity one for each listed symbol index (0 is ``vbar``)."""
    pt = [0] * alphabet
    for s in symbols:
        pt[s] += 1
    return tuple(pt)


def E(pt: Point) -> Level1Sum:
    """Level-1 basis element ``E x``."""
    return Level1Sum(len(pt), {tuple(pt): 1})


def l1_unit(alphabet: int) -> Level1Sum:
    return E((0,) * alphabet)


def promote(p: Level1Sum) -> Level2Sum:
    """Level-2 basis element ``E[p]`` for a level-1 sum ``p``."""
    return Level2Sum(p.alphabet, {p.key: 1})


def EE(pt: Point) -> Level2Sum:
    return promote(E(pt))


def l2_unit(alphabet: int) -> Level2Sum:
    return promote(Level1Sum(alphabet))


def l1_add(a, b):
    return a + b


def l1_neg(a):
    return -a


def l1_mul(a, b):
    return a * b


def l2_add(a, b):
    return a + b


def l2_neg(a):
    return -a


def l2_mul(a, b):
    return a * b


# the identity ----------------------------------------------------------------

def _check_n(n: int) -> None:
    if not 0 <= n <= MAX_LEMMA2_N:
        raise CapacityError(f"the cover identity is implemented for 0 <= n <= {MAX_LEMMA2_N}, got {n}")


def lemma2_lhs(n: int) -> Level2Sum:
    """``sum_{S subset I} (-1)^(|I|-|S|) EE(vbar + sum_{i in S} v_i)``."""
    _check_n(n)
    size = n + 1
    out = Level2Sum(size)
    for S in subsets_of(n):
        term = EE(point(size, 0, *(i + 1 for i in S)))
        out = out + (term if (n - len(S)) % 2 == 0 else -term)
    return out


def block_sum(n: int, block: Iterable[int]) -> Level1Sum:
    """Level-1 sum ``E vbar * prod_{i in block} (E v_i - 1)``."""
    size = n + 1
    one = l1_unit(size)
    acc = E(point(size, 0))
    for i in block:
        acc = acc * (E(point(size, i + 1)) - one)
    return acc


def lemma2_rhs(n: int, method: str = "auto") -> Level2Sum:
    """Right side of the cover identity.

    ``method="expand"`` walks :func:`covers_of` and multiplies the factors
    ``E[block_sum(A)] - 1`` out in the level-2 algebra for every cover.
    ``method="kernel"`` performs the same expansion but groups terms by the
    set of factors contributing ``E[...]``, via the compiled signed-count
    kernel, before building level-2 keys. ``"auto"`` expands for ``n <= 3``
    and uses the kernel at ``n = 4``.
    """
    _check_n(n)
    if method == "auto":
        method = "expand" if n <= 3 else "kernel"
    size = n + 1
    base = EE(point(size, 0))
    if n == 0:
        return base
    if method == "expand":
        unit = l2_unit(size)
        factors = {}
        out = Level2Sum(size)
        for cover in covers_of(n):
            term = base
            for A in cover:
                if A not in factors:
                    factors[A] = promote(block_sum(n, A)) - unit
                term = term * factors[A]
            out = out + term
        return out
    if method == "kernel":
        return _rhs_from_counts(n, _kernels.get_backend().cover_coefficients(n))
    raise ValueError(f"unknown method {method!r}")


def _rhs_from_counts(n: int, counts) -> Level2Sum:
    size = n + 1
    m = (1 << n) - 1
    blocks = [block_sum(n, mask_to_subset(j + 1)) for j in range(m)]
    vbar = E(point(size, 0))
    out: dict[tuple, int] = defaultdict(int)
    for sel in range(len(counts)):
        c = int(counts[sel])
        if not c:
            continue
        acc = vbar
        j, s = 0, sel
        while s:
            if s & 1:
                acc = acc + blocks[j]
            s >>= 1
            j += 1
        out[acc.key] += c
    return Level2Sum(size, out)


def lemma2_verify(n: int, method: str = "auto") -> bool:
    return lemma2_lhs(n) == lemma2_rhs(n, method)


# independent check by substituting integer vectors for the symbols -----------

def _c1_mul(a: dict, b: dict) -> dict:
    out: dict = defaultdict(int)
    for x, ca in a.items():
        for y, cb in b.items():
            out[tuple(u + v for u, v in zip(x, y))] += ca * cb
    return {k: v for k, v in out.items() if v}


def _c1_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _c2_key(c1: dict) -> frozenset:
    return frozenset(c1.items())


def _c2_mul(a: dict, b: dict) -> dict:
    out: dict = defaultdict(int)
    for ka, ca in a.items():
        for kb, cb in b.items():
            out[_c2_key(_c1_add(dict(ka), dict(kb)))] += ca * cb
    return {k: v for k, v in out.items() if v}


def concrete_image(s: Level2Sum, vectors: Sequence[Sequence[int]]) -> dict:
    """Image of a level-2 sum when symbol ``i`` is replaced by ``vectors[i]``."""
    dim = len(vectors[0])
    out: dict = defaultdict(int)
    for key, c in s.terms.items():
        c1: dict = defaultdict(int)
        for pt, m in key:
            vec = tuple(sum(mult * vectors[i][d] for i, mult in enumerate(pt)) for d in range(dim))
            c1[vec] += m
        out[_c2_key({k: v for k, v in c1.items() if v})] += c
    return {k: v for k, v in out.items() if v}


def concrete_sides(n: int, vectors: Sequence[Sequence[int]]) -> tuple[dict, dict]:
    """Both sides of the identity built directly over concrete integer vectors.

    This shares no code with :class:`Level1Sum`/:class:`Level2Sum`: points
    are vectors in ``Z^d`` and cover enumeration is a plain bitmask scan.
    """
    dim = len(vectors[0])
    zero = (0,) * dim
    vbar = tuple(vectors[0])
    vs = [tuple(v) for v in vectors[1:n + 1]]

    def vec_sum(items):
        acc = list(vbar)
        for v in items:
            acc = [a + b for a, b in zip(acc, v)]
        return tuple(acc)

    lhs: dict = defaultdict(int)
    for mask in range(1 << n):
        S = [vs[i] for i in range(n) if mask >> i & 1]
        lhs[_c2_key({vec_sum(S): 1})] += (-1) ** (n - len(S))
    lhs = {k: v for k, v in lhs.items() if v}

    unit2 = {_c2_key({}): 1}
    subsets = list(range(1, 1 << n))
    factor = {}
    for A in subsets:
        acc = {vbar: 1}
        for i in range(n):
            if A >> i & 1:
                acc = _c1_mul(acc, _c1_add({vs[i]: 1}, {zero: 1}, -1))
        factor[A] = _c1_add({_c2_key(acc): 1}, unit2, -1)
    rhs: dict = {}
    full = (1 << n) - 1
    for sel in range(1 << len(subsets)):
        union = 0
        chosen = []
        for j, A in enumerate(subsets):
            if sel >> j & 1:
                union |= A
                chosen.append(A)
        if union != full:
            continue
        term = {_c2_key({vbar: 1}): 1}
        for A in chosen:
            term = _c2_mul(term, factor[A])
        for k, v in term.items():
            rhs[k] = rhs.get(k, 0) + v
    rhs = {k: v for k, v in rhs.items() if v}
    return lhs, rhs


def substitution_check(n: int, vectors: Sequence[Sequence[int]]) -> bool:
    """Engine sides mapped to concrete vectors agree with the direct concrete build."""
    if n > 3:
        raise CapacityError("the concrete re-expansion is only run for n <= 3")
    lhs_c, rhs_c = concrete_sides(n, vectors)
    return (lhs_c == rhs_c
            and concrete_image(lemma2_lhs(n), vectors) == lhs_c
            and concrete_image(lemma2_rhs(n, "expand"), vectors) == rhs_c)
