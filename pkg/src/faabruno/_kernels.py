"""Hot numeric kernels, compiled with numba when available.

Set ``FAABRUNO_NO_NUMBA=1`` to force the pure-numpy implementations. Both
paths are always importable; :func:`get_backend` returns either explicitly,
which is what the benchmark and the cross-check tests use.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("FAABRUNO_NO_NUMBA", "") not in ("1", "true", "yes")


# pure numpy ------------------------------------------------------------------

def np_contract(flat, vecs):
    """Contract ``flat`` (shape ``(r, q**k)``) with the ``k`` rows of ``vecs``."""
    k, q = vecs.shape
    t = flat.reshape((flat.shape[0],) + (q,) * k)
    for i in range(k - 1, -1, -1):
        t = t @ vecs[i]
    return t


def np_partition_sum(buf, offsets, r, q, labels, nblocks, block_vals):
    """Sum of the outer tensor of order ``|pi|`` on block values, over all partitions.

    ``labels`` holds one restricted growth string per row; ``block_vals[mask]``
    is the inner contraction for the block with bitmask ``mask``. The outer
    tensor of order ``k`` lives in ``buf[offsets[k]:offsets[k+1]]`` as an
    ``(r, q**k)`` array.
    """
    out = np.zeros(r)
    n = labels.shape[1]
    for row, nb in zip(labels, nblocks):
        masks = np.zeros(nb, dtype=np.int64)
        for i in range(n):
            masks[row[i]] |= 1 << i
        flat = buf[offsets[nb]:offsets[nb + 1]].reshape(r, q ** nb)
        out += np_contract(flat, block_vals[masks])
    return out


def np_cover_coefficients(n):
    """Signed counts ``c[beta] = sum over covers alpha >= beta of (-1)**(|alpha|-|beta|)``.

    Selections ``alpha``, ``beta`` are bitmasks over the ``2**n - 1`` nonempty
    subsets of ``{0..n-1}``, candidate ``j`` being the subset with bitmask
    ``j + 1``. This is the product expansion of ``prod_{A in alpha}(X_A - 1)``
    summed over covers, with like terms grouped by the chosen factors.
    """
    m = (1 << n) - 1
    size = 1 << m
    full = m
    union = np.zeros(size, dtype=np.int64)
    parity = np.zeros(size, dtype=np.int64)
    for j in range(m):
        lo, hi = 1 << j, 1 << (j + 1)
        union[lo:hi] = union[:lo] | (j + 1)
        parity[lo:hi] = parity[:lo] ^ 1
    sign = 1 - 2 * parity
    h = np.where(union == full, sign, 0)
    for j in range(m):
        view = h.reshape(-1, 2, 1 << j)
        view[:, 0, :] += view[:, 1, :]
    return h * sign


numpy_backend = SimpleNamespace(
    name="numpy",
    contract=np_contract,
    partition_sum=np_partition_sum,
    cover_coefficients=np_cover_coefficients,
)


# numba -----------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @numba.njit(cache=True)
    def nb_contract(flat, vecs):
        k, q = vecs.shape
        r, size = flat.shape
        out = np.zeros(r)
        for idx in range(size):
            w = 1.0
            rem = idx
            for pos in range(k - 1, -1, -1):
                w *= vecs[pos, rem % q]
                rem //= q
            if w != 0.0:
                for a in range(r):
                    out[a] += flat[a, idx] * w
        return out

    @numba.njit(cache=True)
    def nb_partition_sum(buf, offsets, r, q, labels, nblocks, block_vals):
        out = np.zeros(r)
        nparts, n = labels.shape
        masks = np.zeros(n, dtype=np.int64)
        for b in range(nparts):
            nb = nblocks[b]
            masks[:nb] = 0
            for i in range(n):
                masks[labels[b, i]] |= 1 << i
            vecs = np.empty((nb, q))
            for s in range(nb):
                vecs[s] = block_vals[masks[s]]
            flat = buf[offsets[nb]:offsets[nb + 1]].reshape((r, q ** nb))
            out += nb_contract(flat, vecs)
        return out

    @numba.njit(cache=True)
    def nb_cover_coefficients(n):
        m = (1 << n) - 1
        size = 1 << m
        union = np.zeros(size, dtype=np.int64)
        sign = np.ones(size, dtype=np.int64)
        for sel in range(1, size):
            low = sel & -sel
            j = 0
            while (low >> j) != 1:
                j += 1
            union[sel] = union[sel ^ low] | (j + 1)
            sign[sel] = -sign[sel ^ low]
        h = np.zeros(size, dtype=np.int64)
        for sel in range(size):
            if union[sel] == m:
                h[sel] = sign[sel]
        for j in range(m):
            bit = 1 << j
            for sel in range(size):
                if not sel & bit:
                    h[sel] += h[sel | bit]
        for sel in range(size):
            h[sel] *= sign[sel]
        return h

    numba_backend = SimpleNamespace(
        name="numba",
        contract=nb_contract,
        partition_sum=nb_partition_sum,
        cover_coefficients=nb_cover_coefficients,
    )
else:  # pragma: no cover
    numba_backend = None


def get_backend(name: str | None = None):
    """Return the kernel namespace for ``"numba"``, ``"numpy"`` or the default."""
    if name is None:
        name = "numba" if USE_NUMBA else "numpy"
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba is not installed")
        return numba_backend
    if name == "numpy":
        return numpy_backend
    raise ValueError(f"unknown backend {name!r}")
