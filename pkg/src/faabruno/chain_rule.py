"""Higher-order chain rule for derivative towers.

For ``h = g o f`` and directions ``v_0..v_{n-1}``::

    <h^(n)(x), v_0 x ... x v_{n-1}>
        = sum over partitions pi of {0..n-1} of
          <g^(|pi|)(f(x)), (x) over blocks S of <f^(|S|)(x), (x)_{i in S} v_i>>

Rational towers go through the generic :class:`~faabruno.multilinear.SymMap`
evaluation. Float towers are densified once and handed to the compiled
partition-sum kernel in :mod:`faabruno._kernels`.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BasePointError, DimensionError, OrderError, RingMismatchError
from .multilinear import FLOAT, DerivativeTower, SymMap, as_vector, multi_indices
from .partitions import partitions_of, restricted_growth_strings

BASE_POINT_ATOL = 1e-12


def _check_pair(g: DerivativeTower, f: DerivativeTower, n: int, atol: float) -> None:
    if g.ring != f.ring:
        raise RingMismatchError(f"cannot compose a {g.ring} tower with a {f.ring} tower")
    if f.out_dim != g.in_dim:
        raise DimensionError(f"inner map has out_dim {f.out_dim}, outer map has in_dim {g.in_dim}")
    if g.ring == FLOAT:
        if np.any(np.abs(g.base_point - f.value) > atol):
            raise BasePointError(
                f"outer base point {g.base_point} differs from inner value {f.value} beyond {atol}")
    elif np.any(g.base_point != f.value):
        raise BasePointError(f"outer base point {g.base_point} != inner value {f.value}")
    if n > f.order or n > g.order:
        raise OrderError(f"order {n} exceeds tower orders (inner {f.order}, outer {g.order})")


class _Composer:
    """Evaluates the partition sum for one ``(g, f)`` pair.

    Float towers are flattened to dense ``(out_dim, dim**k)`` blocks on first
    use; partition label arrays are built once per order within this object.
    """

    def __init__(self, g: DerivativeTower, f: DerivativeTower, backend: str | None = None):
        self.g = g
        self.f = f
        self.ring = g.ring
        use_kernels = self.ring == FLOAT and backend != "generic"
        self.kernels = _kernels.get_backend(backend) if use_kernels else None
        self._labels: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._partitions: dict[int, list] = {}
        self._dense_f: dict[int, np.ndarray] = {}
        self._g_buf = None
        self.partitions_processed = 0

    # float path pieces ------------------------------------------------------

    def _flat(self, t: SymMap) -> np.ndarray:
        return np.ascontiguousarray(t.to_dense().reshape(t.out_dim, -1))

    def _outer_buffer(self, n: int):
        if self._g_buf is None or len(self._g_buf[1]) < n + 2:
            parts = [np.zeros(0)]
            for k in range(1, n + 1):
                parts.append(self._flat(self.g.deriv(k)).ravel())
            offsets = np.zeros(n + 2, dtype=np.int64)
            offsets[1:] = np.cumsum([p.size for p in parts])
            self._g_buf = (np.ascontiguousarray(np.concatenate(parts)), offsets)
        return self._g_buf

    def _label_arrays(self, n: int):
        if n not in self._labels:
            rows = list(restricted_growth_strings(n))
            labels = np.array(rows, dtype=np.int64).reshape(len(rows), n)
            nblocks = (labels.max(axis=1) + 1).astype(np.int64)
            self._labels[n] = (labels, nblocks)
        return self._labels[n]

    def _eval_float(self, vecs: list[np.ndarray]) -> np.ndarray:
        n = len(vecs)
        kern = self.kernels
        f = self.f
        block_vals = np.zeros((1 << n, f.out_dim))
        dirs = np.array(vecs).reshape(n, f.in_dim)
        # one inner contraction per nonempty block, shared by all partitions
        for mask in range(1, 1 << n):
            idx = [i for i in range(n) if mask >> i & 1]
            k = len(idx)
            if k not in self._dense_f:
                self._dense_f[k] = self._flat(f.deriv(k))
            block_vals[mask] = kern.contract(self._dense_f[k], np.ascontiguousarray(dirs[idx]))
        buf, offsets = self._outer_buffer(n)
        labels, nblocks = self._label_arrays(n)
        self.partitions_processed += labels.shape[0]
        return kern.partition_sum(buf, offsets, self.g.out_dim, self.g.in_dim,
                                  labels, nblocks, block_vals)

    # generic path -----------------------------------------------------------

    def _eval_generic(self, vecs: list[np.ndarray]) -> np.ndarray:
        n = len(vecs)
        if n not in self._partitions:
            self._partitions[n] = list(partitions_of(n))
        memo: dict[tuple[int, ...], np.ndarray] = {}
        total = None
        for pi in self._partitions[n]:
            inner = []
            for block in pi:
                w = memo.get(block)
                if w is None:
                    w = self.f.deriv(len(block)).eval([vecs[i] for i in block])
                    memo[block] = w
                inner.append(w)
            term = self.g.deriv(len(pi)).eval(inner)
            total = term if total is None else total + term
            self.partitions_processed += 1
        return total

    def eval(self, dirs: Sequence) -> np.ndarray:
        n = len(dirs)
        if n == 0:
            return self.g.value.copy()
        vecs = [as_vector(d, self.ring, self.f.in_dim) for d in dirs]
        if self.kernels is not None:
            return self._eval_float(vecs)
        return self._eval_generic(vecs)


def compose_eval(g: DerivativeTower, f: DerivativeTower, dirs: Sequence, *,
                 atol: float = BASE_POINT_ATOL, backend: str | None = None,
                 stats: dict | None = None) -> np.ndarray:
    """``<(g o f)^(n)(x), dirs[0] x ... x dirs[n-1]>`` with ``n = len(dirs)``.

    ``backend`` selects the float kernels (``"numba"``/``"numpy"``, or
    ``"generic"`` to use the dictionary path for floats too). If ``stats`` is
    given, ``stats["partitions"]`` is incremented by the number of partition
    terms summed.
    """
    _check_pair(g, f, len(dirs), atol)
    comp = _Composer(g, f, backend)
    out = comp.eval(dirs)
    if stats is not None:
        stats["partitions"] = stats.get("partitions", 0) + comp.partitions_processed
    return out


def compose_towers(g: DerivativeTower, f: DerivativeTower, order: int, *,
                   atol: float = BASE_POINT_ATOL, backend: str | None = None) -> DerivativeTower:
    """Tower of ``g o f`` at ``f.base_point`` up to ``order``.

    Each coefficient is the composite derivative on basis vectors
    ``(e_i1, ..., e_ik)``.
    """
    _check_pair(g, f, order, atol)
    comp = _Composer(g, f, backend)
    p, r = f.in_dim, g.out_dim
    basis = [as_vector(row, g.ring, p) for row in np.eye(p, dtype=int)]
    derivs = []
    for k in range(1, order + 1):
        coeffs = {}
        for key in multi_indices(p, k):
            val = comp.eval([basis[i] for i in key])
            if np.any(val != 0):
                coeffs[key] = val
        derivs.append(SymMap(k, p, r, coeffs, g.ring))
    return DerivativeTower(f.base_point.copy(), g.value.copy(), derivs, g.ring)


def compose_chain(towers: Sequence[DerivativeTower], order: int, *,
                  associate: str = "left", atol: float = BASE_POINT_ATOL,
                  backend: str | None = None) -> DerivativeTower:
    """Compose towers listed in application order (``towers[0]`` applied first).

    ``associate="left"`` folds ``((t2 o t1) o t0)`` style from the inside out;
    ``"right"`` builds the outer composites first. Both give the same tower.
    """
    if not towers:
        raise ValueError("compose_chain needs at least one tower")
    towers = list(towers)
    if associate == "left":
        acc = towers[0].truncate(order)
        for t in towers[1:]:
            acc = compose_towers(t, acc, order, atol=atol, backend=backend)
        return acc
    if associate == "right":
        acc = towers[-1].truncate(order)
        for t in reversed(towers[:-1]):
            acc = compose_towers(acc, t, order, atol=atol, backend=backend)
        return acc
    raise ValueError(f"associate must be 'left' or 'right', got {associate!r}")
