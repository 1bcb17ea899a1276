"""Seeded verification suites, shared by the CLI ``verify-all`` command and the tests.

Random cases come from ``numpy.random.Generator(PCG64(seed))`` (the PCG64
XSL-RR 128/64 generator). Every suite derives its own stream from
``SeedSequence([seed, suite_index])`` so suites can be rerun in isolation.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import chain_rule, free_algebra, germ_algebra, partitions, strict_diff
from .functions import ComposeNode, ElementaryNode, LinearNode, PolynomialNode
from .multilinear import FLOAT, Polynomial, multi_indices, tower_exp, tower_linear, tower_polynomial

BELL_EXPECTED = [1, 1, 2, 5, 15, 52, 203, 877, 4140]
NUMERIC_RTOL_RICHARDSON = 1e-4
NUMERIC_RTOL_PLAIN = 5e-2
BELL_COMPOSITE_RTOL = 1e-9
SWEEP_HS = (0.01, 0.005, 0.0025, 0.00125)
MIN_EXACT_MAGNITUDE = 0.25
SWEEP_MIN_ORDER = 0.8


@dataclass
class RunReport:
    suite: str
    cases: int = 0
    failures: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, case, expected, actual) -> None:
        self.failures.append({"case": str(case), "expected": _jsonable(expected),
                              "actual": _jsonable(actual)})

    def to_dict(self, timings: bool = False) -> dict:
        d = asdict(self)
        if not timings:
            d.pop("wall_time")
        return d


def _jsonable(x):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def make_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


# random objects -------------------------------------------------------------

def random_fraction(rng, num: int = 3, den: int = 3) -> Fraction:
    return Fraction(int(rng.integers(-num, num + 1)), int(rng.integers(1, den + 1)))


def random_nonzero_fraction(rng, num: int = 3, den: int = 3) -> Fraction:
    while True:
        c = random_fraction(rng, num, den)
        if c:
            return c


def random_exponents(rng, dim: int, max_degree: int, min_degree: int = 0) -> tuple[int, ...]:
    deg = int(rng.integers(min_degree, max_degree + 1))
    exps = [0] * dim
    for _ in range(deg):
        exps[int(rng.integers(0, dim))] += 1
    return tuple(exps)


def random_polynomial(rng, in_dim: int, out_dim: int, degree: int = 3,
                      terms_per_output: int = 3) -> Polynomial:
    terms = []
    for j in range(out_dim):
        for _ in range(int(rng.integers(1, terms_per_output + 1))):
            terms.append((random_nonzero_fraction(rng), random_exponents(rng, in_dim, degree), j))
    return Polynomial.from_terms(in_dim, out_dim, terms)


def random_point(rng, dim: int):
    return [random_fraction(rng, 2, 2) for _ in range(dim)]


def random_vector(rng, dim: int):
    return [random_fraction(rng) for _ in range(dim)]


def random_matrix(rng, rows: int, cols: int):
    return [[random_fraction(rng) for _ in range(cols)] for _ in range(rows)]


def random_series(rng, num_vars: int, cap: int, max_degree: int | None = None,
                  n_terms: int = 4, constant: bool = True) -> germ_algebra.TruncatedSeries:
    max_degree = cap if max_degree is None else min(max_degree, cap)
    coeffs = {}
    for _ in range(n_terms):
        exps = random_exponents(rng, num_vars, max_degree, 0 if constant else 1)
        coeffs[exps] = coeffs.get(exps, Fraction(0)) + random_fraction(rng)
    return germ_algebra.TruncatedSeries(num_vars, cap, coeffs)


def random_germ(rng, source: int, target: int, cap: int, max_degree: int = 3):
    comps = [random_series(rng, source, cap, max_degree, constant=False) for _ in range(target)]
    return germ_algebra.GermMap(tuple(comps))


# suites -----------------------------------------------------------------------

def suite_partitions(seed: int) -> RunReport:
    report = RunReport("partitions_bell")
    for n, expected in enumerate(BELL_EXPECTED):
        report.cases += 1
        count = sum(1 for _ in partitions.partitions_of(n))
        b = partitions.bell(n)
        if not count == b == expected:
            report.fail(f"n={n}", expected, [count, b])
    return report


def suite_lemma2(seed: int, max_n: int = 4) -> RunReport:
    report = RunReport("lemma2")
    for n in range(max_n + 1):
        report.cases += 1
        if not free_algebra.lemma2_verify(n):
            report.fail(f"n={n}", True, False)
    return report


def exact_oracle_case(rng, order: int):
    """One random composite checked against exact series substitution.

    Returns a list of mismatches ``(k, key, component, engine, oracle)``.
    """
    p, q, r = (int(rng.integers(1, 4)) for _ in range(3))
    f = random_polynomial(rng, p, q)
    g = random_polynomial(rng, q, r)
    x = random_point(rng, p)
    tf = tower_polynomial(f, x, order)
    tg = tower_polynomial(g, tf.value, order)
    h = chain_rule.compose_towers(tg, tf, order)

    phi = germ_algebra.germ_from_polynomial(f, x, order)
    y = f(x)
    composite = [germ_algebra.substitute(germ_algebra.series_from_polynomial(g, y, order, l), phi)
                 for l in range(r)]
    basis = np.eye(p, dtype=int).tolist()
    bad = []
    for l in range(r):
        if h.value[l] != composite[l].constant_term():
            bad.append((0, (), l, h.value[l], composite[l].constant_term()))
    for k in range(1, order + 1):
        for key in multi_indices(p, k):
            engine = h.deriv(k).coeff(key)
            for l in range(r):
                oracle = germ_algebra.derivative_functional([basis[i] for i in key], composite[l])
                if engine[l] != oracle or oracle != germ_algebra.normalized_coefficient(
                        composite[l], key):
                    bad.append((k, key, l, engine[l], oracle))
    return bad


def suite_exact_oracle(seed: int, cases: int = 50) -> RunReport:
    report = RunReport("exact_oracle")
    rng = make_rng(seed, 3)
    for i in range(cases):
        order = 1 + i % 5
        report.cases += 1
        bad = exact_oracle_case(rng, order)
        if bad:
            k, key, l, engine, oracle = bad[0]
            report.fail(f"case={i} order={order} k={k} key={key} out={l}", oracle, engine)
    return report


def numeric_suite_maps():
    """Ten fixed smooth composites ``(name, outer, inner, x)`` with dimensions at most 3."""
    P = Polynomial.from_terms
    h = Fraction(1, 2)
    third = Fraction(1, 3)
    return [
        ("exp.exp", ElementaryNode("exp"), ElementaryNode("exp"), [0.3]),
        ("sin.poly", ElementaryNode("sin"),
         PolynomialNode(P(1, 1, [(1, (2,), 0), (-h, (1,), 0)])), [0.7]),
        ("exp.poly2", ElementaryNode("exp"),
         PolynomialNode(P(2, 1, [(1, (1, 1), 0), (h, (1, 0), 0)])), [0.4, -0.3]),
        ("poly22.sin2", PolynomialNode(P(2, 2, [(1, (2, 0), 0), (1, (1, 1), 0), (1, (0, 2), 1),
                                                (-1, (1, 0), 1)])),
         ElementaryNode("sin", 2), [0.5, 1.1]),
        ("exp3.linear", ElementaryNode("exp", 3),
         LinearNode([[h, 1, 0], [0, h, -h], [third, 0, 1]]), [0.1, 0.2, -0.1]),
        ("cos.poly3", ElementaryNode("cos"),
         PolynomialNode(P(3, 1, [(1, (2, 0, 0), 0), (1, (0, 1, 1), 0), (-1, (0, 0, 1), 0)])),
         [0.3, -0.6, 0.8]),
        ("poly31.cos3", PolynomialNode(P(3, 1, [(1, (1, 1, 1), 0), (1, (2, 0, 0), 0)])),
         ElementaryNode("cos", 3), [0.2, 0.9, -0.4]),
        ("sin2.poly12", ElementaryNode("sin", 2),
         PolynomialNode(P(1, 2, [(1, (2,), 0), (1, (3,), 1), (-1, (1,), 1)])), [0.6]),
        ("exp.sin", ElementaryNode("exp"), ElementaryNode("sin"), [1.2]),
        ("poly21.exp2", PolynomialNode(P(2, 1, [(1, (2, 1), 0), (-third, (0, 3), 0)])),
         ElementaryNode("exp", 2), [-0.2, 0.3]),
    ]


def unit_directions(rng, dim: int, n: int) -> list[np.ndarray]:
    out = []
    for _ in range(n):
        v = rng.normal(size=dim)
        out.append(v / np.linalg.norm(v))
    return out


def suite_numeric_oracle(seed: int, max_order: int = 3) -> RunReport:
    """Chain-rule values against difference-sum estimates of the black-box composite."""
    report = RunReport("numeric_oracle")
    rng = make_rng(seed, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", strict_diff.CancellationWarning)
        for name, outer, inner, x in numeric_suite_maps():
            tf = inner.tower(x, max_order, FLOAT)
            tg = outer.tower(tf.value, max_order, FLOAT)
            box = ComposeNode(outer, inner).black_box()
            for n in range(1, max_order + 1):
                # relative error is meaningless near a zero of the derivative,
                # so redraw directions until the exact value is well away from it
                while True:
                    dirs = unit_directions(rng, inner.in_dim, n)
                    exact = chain_rule.compose_eval(tg, tf, dirs)
                    if np.max(np.abs(exact)) >= MIN_EXACT_MAGNITUDE:
                        break
                report.cases += 1
                rich = strict_diff.estimate_derivative(box, x, dirs, richardson=True)
                err = strict_diff.relative_error(rich.value, exact)
                if not err <= NUMERIC_RTOL_RICHARDSON:
                    report.fail(f"{name} n={n} richardson", f"relerr<={NUMERIC_RTOL_RICHARDSON}", err)
                plain = strict_diff.estimate_derivative(box, x, dirs)
                err = strict_diff.relative_error(plain.value, exact)
                if not err <= NUMERIC_RTOL_PLAIN:
                    report.fail(f"{name} n={n} plain", f"relerr<={NUMERIC_RTOL_PLAIN}", err)
                sweep = strict_diff.h_sweep(box, x, dirs, exact, SWEEP_HS)
                errs = [e for _, e in sweep]
                # observed order over the finest halving; coarser steps may be pre-asymptotic
                observed = math.log2(errs[-2] / errs[-1])
                if not (errs[-1] < errs[0] and observed >= SWEEP_MIN_ORDER):
                    report.fail(f"{name} n={n} h-sweep", f"shrinking, order>={SWEEP_MIN_ORDER}",
                                [errs, observed])
    return report


def suite_bell_composite(seed: int, max_order: int = 8) -> RunReport:
    report = RunReport("bell_composite")
    t = chain_rule.compose_towers(tower_exp(1.0, max_order), tower_exp(0.0, max_order), max_order)
    for k in range(1, max_order + 1):
        report.cases += 1
        got = float(t.deriv(k).coeff((0,) * k)[0])
        want = partitions.bell(k) * math.e
        if not abs(got - want) <= BELL_COMPOSITE_RTOL * want:
            report.fail(f"k={k}", want, got)
    return report


def suite_degeneracy(seed: int, cases: int = 10, max_order: int = 4) -> RunReport:
    """Linear outer map and linear inner map laws, exact."""
    report = RunReport("degeneracy")
    rng = make_rng(seed, 6)
    for i in range(cases):
        p, q, r = (int(rng.integers(1, 4)) for _ in range(3))
        f = tower_polynomial(random_polynomial(rng, p, q), random_point(rng, p), max_order)
        A = random_matrix(rng, r, q)
        g = tower_linear(A, f.value, max_order)
        h = chain_rule.compose_towers(g, f, max_order)
        Am = np.array(A, dtype=object)
        for k in range(1, max_order + 1):
            report.cases += 1
            for key in multi_indices(p, k):
                want = Am.dot(f.deriv(k).coeff(key))
                if np.any(h.deriv(k).coeff(key) != want):
                    report.fail(f"outer case={i} k={k} key={key}", want, h.deriv(k).coeff(key))
                    break

        B = random_matrix(rng, q, p)
        fl = tower_linear(B, random_point(rng, p), max_order)
        g2 = tower_polynomial(random_polynomial(rng, q, r), fl.value, max_order)
        Bm = np.array(B, dtype=object)
        for n in range(1, max_order + 1):
            report.cases += 1
            dirs = [random_vector(rng, p) for _ in range(n)]
            got = chain_rule.compose_eval(g2, fl, dirs)
            want = g2.deriv(n).eval([Bm.dot(np.array(d, dtype=object)) for d in dirs])
            if np.any(got != want):
                report.fail(f"inner case={i} n={n}", want, got)
    return report


def chain_case(rng, order: int):
    dims = [int(rng.integers(1, 4)) for _ in range(4)]
    x = random_point(rng, dims[0])
    towers = []
    point = x
    for a, b in zip(dims, dims[1:]):
        poly = random_polynomial(rng, a, b, degree=3, terms_per_output=2)
        t = tower_polynomial(poly, point, order)
        towers.append(t)
        point = list(t.value)
    return towers


def suite_associativity(seed: int, cases: int = 20) -> RunReport:
    report = RunReport("associativity")
    rng = make_rng(seed, 7)
    for i in range(cases):
        order = 1 + i % 4
        towers = chain_case(rng, order)
        report.cases += 1
        left = chain_rule.compose_chain(towers, order, associate="left")
        right = chain_rule.compose_chain(towers, order, associate="right")
        if left != right:
            report.fail(f"case={i} order={order}", "left == right", "differ")
    return report


def _series_text(F) -> str:
    return str({k: str(c) for k, c in sorted(F.coeffs.items())})


def run_series_suite(kind: str, seed: int, trials: int, num_vars: int | None = None,
                     cap: int | None = None, report: RunReport | None = None) -> RunReport:
    """Seeded trials of one functional-calculus identity.

    ``kind`` is ``"leibniz"``, ``"split"`` or ``"alg7"``. ``num_vars`` and
    ``cap`` default to fresh draws from ``1..3`` and ``1..6`` per trial.
    Failures record the full inputs so a counterexample can be replayed.
    """
    if kind not in ("leibniz", "split", "alg7"):
        raise ValueError(f"unknown series suite {kind!r}")
    report = report or RunReport(f"series_{kind}")
    rng = make_rng(seed, {"leibniz": 81, "split": 82, "alg7": 83}[kind])
    for i in range(trials):
        nv = num_vars or int(rng.integers(1, 4))
        D = cap or int(rng.integers(1, 7))
        report.cases += 1
        if kind == "leibniz":
            k = int(rng.integers(0, min(D, 4) + 1))
            vs = [random_vector(rng, nv) for _ in range(k)]
            F, G = random_series(rng, nv, D), random_series(rng, nv, D)
            ok = germ_algebra.leibniz_check(vs, F, G)
            inputs = f"F={_series_text(F)} G={_series_text(G)}"
        elif kind == "split":
            k = int(rng.integers(0, min(D, 3) + 1))
            j = int(rng.integers(1, 4))
            vs = [random_vector(rng, nv) for _ in range(k)]
            factors = [random_series(rng, nv, D) for _ in range(j)]
            ok = germ_algebra.multifactor_split_check(vs, factors)
            inputs = "factors=" + ";".join(_series_text(F) for F in factors)
        else:
            m = int(rng.integers(1, 4))
            k = int(rng.integers(1, min(D, 3) + 1))
            phi = random_germ(rng, nv, m, D)
            vs = [random_vector(rng, nv) for _ in range(k)]
            ok = germ_algebra.verify_alg7(phi, vs, germ_algebra.monomial_probes(m, k, D))
            inputs = "phi=" + ";".join(_series_text(F) for F in phi.components)
        if not ok:
            vtext = [[str(c) for c in v] for v in vs]
            report.fail(f"{kind} trial={i} vars={nv} cap={D} vs={vtext} {inputs}", True, False)
    return report


def suite_functional_calculus(seed: int, trials: int = 100) -> RunReport:
    report = RunReport("functional_calculus")
    for kind in ("leibniz", "split", "alg7"):
        run_series_suite(kind, seed, trials, report=report)
    return report


def lemma1_cases():
    """``(name, black box, point, declared order, steps, hs)``.

    The quadratic uses dyadic points and steps so its sums vanish exactly in
    floating point.
    """
    dyadic = (0.5, 0.25, 0.125, 0.0625)
    quad = Polynomial.from_terms(1, 1, [(1, (2,), 0), (3, (1,), 0)])
    return [
        ("exp n=2 m=3", ElementaryNode("exp").black_box(), [0.2], 2, 3, strict_diff.DEFAULT_SWEEP),
        ("sin n=1 m=2", ElementaryNode("sin").black_box(), [0.4], 1, 2, strict_diff.DEFAULT_SWEEP),
        ("cos n=3 m=4", ElementaryNode("cos").black_box(), [0.1], 3, 4, strict_diff.DEFAULT_SWEEP),
        ("exp2 n=2 m=3", ElementaryNode("exp", 2).black_box(), [0.1, -0.3], 2, 3,
         strict_diff.DEFAULT_SWEEP),
        ("quadratic n=2 m=3", PolynomialNode(quad).black_box(), [0.5], 2, 3, dyadic),
    ]


def suite_lemma1(seed: int) -> RunReport:
    report = RunReport("lemma1")
    for name, box, x, n, m, hs in lemma1_cases():
        report.cases += 1
        res = strict_diff.lemma1_check(box, x, n, m, hs=hs)
        if not res.passed:
            report.fail(name, f"slope>{n + 0.5}", res.slope)
    return report


SUITES = [
    ("partitions_bell", suite_partitions),
    ("lemma2", suite_lemma2),
    ("exact_oracle", suite_exact_oracle),
    ("numeric_oracle", suite_numeric_oracle),
    ("bell_composite", suite_bell_composite),
    ("degeneracy", suite_degeneracy),
    ("associativity", suite_associativity),
    ("functional_calculus", suite_functional_calculus),
    ("lemma1", suite_lemma1),
]


def run_suite(name: str, fn, seed: int) -> RunReport:
    t0 = time.perf_counter()
    report = fn(seed)
    report.wall_time = time.perf_counter() - t0
    return report


def verify_all(seed: int = 42) -> list[RunReport]:
    return [run_suite(name, fn, seed) for name, fn in SUITES]
