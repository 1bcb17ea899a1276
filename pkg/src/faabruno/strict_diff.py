"""Alternating-sign difference sums over parallelepiped vertices.

``difference_sum(f, xbar, [v_1..v_n])`` is

    sum over S subset {1..n} of (-1)^(n-|S|) f(xbar + sum_{i in S} v_i)

and dividing by ``h**n`` for steps ``h * d_i`` estimates
``<f^(n)(x), d_1 x ... x d_n>`` with first-order error in ``h``. Everything
here is float64; exact checks live in :mod:`faabruno.germ_algebra`.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, EvaluationError
from .partitions import subsets_of

EPS = float(np.finfo(np.float64).eps)
CANCELLATION_WARN_DIGITS = 6.0
DEFAULT_SWEEP = (0.1, 0.05, 0.025, 0.0125)


class CancellationWarning(UserWarning):
    pass


@dataclass
class BlackBoxMap:
    """Deterministic ``R^in_dim -> R^out_dim`` callable with an evaluation counter."""

    in_dim: int
    out_dim: int
    fn: Callable
    reentrant: bool = False
    calls: int = field(default=0, compare=False)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.in_dim,):
            raise DimensionError(f"expected input of shape ({self.in_dim},), got {x.shape}")
        self.calls += 1
        y = np.atleast_1d(np.asarray(self.fn(x), dtype=np.float64))
        if y.shape != (self.out_dim,):
            raise DimensionError(f"black box returned shape {y.shape}, expected ({self.out_dim},)")
        if not np.all(np.isfinite(y)):
            raise EvaluationError(f"non-finite value {y} at {x}")
        return y


def default_step(n: int) -> float:
    """``eps ** (1 / (n + 2))``."""
    return EPS ** (1.0 / (n + 2))


def _vertices(x_bar: np.ndarray, steps: np.ndarray):
    # fsum rounds each coordinate once, so vertices do not depend on step order
    n = len(steps)
    for S in subsets_of(n):
        v = np.array([math.fsum([x_bar[j], *steps[list(S), j]]) for j in range(len(x_bar))])
        yield (-1) ** (n - len(S)), v


def _vertex_values(f: BlackBoxMap, x_bar, steps):
    x_bar = np.asarray(x_bar, dtype=np.float64)
    if x_bar.shape != (f.in_dim,):
        raise DimensionError(f"base point has shape {x_bar.shape}, expected ({f.in_dim},)")
    steps = np.asarray(steps, dtype=np.float64).reshape(-1, f.in_dim) if len(steps) else \
        np.zeros((0, f.in_dim))
    signs, points = zip(*_vertices(x_bar, steps))
    if f.reentrant and len(points) > 1:
        with ThreadPoolExecutor() as pool:
            values = list(pool.map(f, points))
    else:
        values = [f(p) for p in points]
    return signs, values


def difference_sum(f: BlackBoxMap, x_bar, steps: Sequence) -> np.ndarray:
    """Exact-rounded alternating sum over the ``2**n`` vertices.

    Vertex coordinates and each output component are accumulated with
    :func:`math.fsum`, so the result is exactly invariant under reordering
    of ``steps`` and does not depend on evaluation order for a reentrant
    black box.
    """
    signs, values = _vertex_values(f, x_bar, steps)
    return np.array([math.fsum(s * v[j] for s, v in zip(signs, values)) for j in range(f.out_dim)])


@dataclass
class Estimate:
    value: np.ndarray
    order: int
    h: float
    richardson: bool
    cancellation_digits: float
    warnings: list[str] = field(default_factory=list)


def _estimate_once(f, x, dirs, h):
    n = len(dirs)
    steps = [h * np.asarray(d, dtype=np.float64) for d in dirs]
    signs, values = _vertex_values(f, x, steps)
    total = np.array([math.fsum(s * v[j] for s, v in zip(signs, values)) for j in range(f.out_dim)])
    scale = max(float(np.max(np.abs(v))) for v in values)
    net = float(np.max(np.abs(total)))
    if scale == 0.0:
        digits = 0.0
    elif net == 0.0:
        digits = math.inf
    else:
        digits = max(0.0, math.log10(scale / net))
    return total / h ** n, digits


def estimate_derivative(f: BlackBoxMap, x, dirs: Sequence, h: float | None = None,
                        richardson: bool = False) -> Estimate:
    """Estimate ``<f^(n)(x), dirs[0] x ... x dirs[n-1]>`` from one difference sum.

    With ``richardson=True`` the estimates at ``h`` and ``h/2`` are combined
    as ``2 D(h/2) - D(h)``, removing the first-order term. The metadata
    records the worst cancellation (decimal digits lost between the largest
    vertex value and the net sum); above 6 digits a warning is attached and
    a :class:`CancellationWarning` emitted.
    """
    n = len(dirs)
    if h is None:
        h = default_step(n)
    if not h > 0:
        raise ValueError("step scale h must be positive")
    for d in dirs:
        if not np.any(np.asarray(d, dtype=np.float64)):
            raise ValueError("directions must be nonzero")
    value, digits = _estimate_once(f, x, dirs, h)
    if richardson and n > 0:
        half, digits_half = _estimate_once(f, x, dirs, h / 2)
        value = 2.0 * half - value
        digits = max(digits, digits_half)
    notes = []
    if n > 0 and digits > CANCELLATION_WARN_DIGITS:
        msg = f"difference sum lost {digits:.1f} decimal digits to cancellation"
        notes.append(msg)
        warnings.warn(msg, CancellationWarning, stacklevel=2)
    return Estimate(value, n, h, richardson, digits, notes)


def relative_error(estimate, exact) -> float:
    """``max|est - exact| / max|exact|`` (absolute error when ``exact`` is zero)."""
    estimate = np.asarray(estimate, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    denom = float(np.max(np.abs(exact)))
    err = float(np.max(np.abs(estimate - exact)))
    return err / denom if denom > 0 else err


def h_sweep(f: BlackBoxMap, x, dirs, exact, hs: Sequence[float], richardson: bool = False):
    """Relative errors of :func:`estimate_derivative` for each step in ``hs``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CancellationWarning)
        return [(h, relative_error(estimate_derivative(f, x, dirs, h, richardson).value, exact))
                for h in hs]


def loglog_slope(hs: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log values`` against ``log hs``."""
    lx = np.log(np.asarray(hs, dtype=np.float64))
    ly = np.log(np.asarray(values, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])


def alternating_coefficient_sum(k: int) -> int:
    """``sum over S subset K of (-1)^(|K|-|S|)`` for ``|K| = k``, by enumeration."""
    return sum((-1) ** (k - len(S)) for S in subsets_of(k))


@dataclass
class Lemma1Report:
    passed: bool
    declared_order: int
    steps: int
    hs: list[float]
    magnitudes: list[float]
    slope: float
    identity_ok: bool
    identity_sizes: list[int]


def lemma1_check(f: BlackBoxMap, x, declared_order: int, steps: int, dirs: Sequence | None = None,
                 hs: Sequence[float] = DEFAULT_SWEEP, max_identity_size: int = 10) -> Lemma1Report:
    """Check that difference sums with more steps than the derivative order decay fast.

    For ``steps > declared_order`` the sum with all steps scaled by ``h``
    must shrink faster than ``h**declared_order``: the fitted log-log slope
    over ``hs`` must exceed ``declared_order + 0.5``. A sweep in which every
    sum is exactly zero passes with infinite slope. Independently, the
    integer identity ``sum_{S subset K} (-1)^(|K|-|S|) = 0`` is checked for
    ``1 <= |K| <= max_identity_size``.
    """
    if steps <= declared_order:
        raise ValueError("lemma1_check needs more steps than the declared order")
    if dirs is None:
        dirs = [np.eye(f.in_dim)[i % f.in_dim] for i in range(steps)]
    if len(dirs) != steps:
        raise DimensionError(f"expected {steps} directions, got {len(dirs)}")
    x = np.asarray(x, dtype=np.float64)
    mags = []
    for h in hs:
        d = difference_sum(f, x, [h * np.asarray(v, dtype=np.float64) for v in dirs])
        mags.append(float(np.max(np.abs(d))))
    if all(m == 0.0 for m in mags):
        slope = math.inf
    elif any(m == 0.0 for m in mags):
        slope = math.nan
    else:
        slope = loglog_slope(hs, mags)
    sizes = list(range(1, max_identity_size + 1))
    identity_ok = all(alternating_coefficient_sum(k) == 0 for k in sizes)
    passed = identity_ok and (slope == math.inf or slope > declared_order + 0.5)
    return Lemma1Report(passed, declared_order, steps, list(hs), mags, slope, identity_ok, sizes)
