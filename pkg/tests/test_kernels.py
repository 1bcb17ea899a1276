import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from faabruno import _kernels
from faabruno.partitions import partitions_of

needs_numba = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")


@needs_numba
@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_contract_backends_agree(k, q, r, seed):
    rng = np.random.default_rng(seed)
    flat = rng.normal(size=(r, q ** k))
    vecs = rng.normal(size=(k, q))
    a = _kernels.numpy_backend.contract(flat, vecs)
    b = _kernels.numba_backend.contract(flat, vecs)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_contract_matches_einsum():
    rng = np.random.default_rng(0)
    flat = rng.normal(size=(2, 27))
    vecs = rng.normal(size=(3, 3))
    want = np.einsum("rabc,a,b,c->r", flat.reshape(2, 3, 3, 3), *vecs)
    assert np.allclose(_kernels.np_contract(flat, vecs), want)


def _partition_inputs(n, q, r, rng):
    labels = np.array([[0] * n] if n == 0 else
                      [[next(b for b, blk in enumerate(p.blocks) if i in blk) for i in range(n)]
                       for p in partitions_of(n)], dtype=np.int64)
    nblocks = labels.max(axis=1) + 1
    sizes = [r * q ** k for k in range(n + 1)]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    buf = rng.normal(size=offsets[-1])
    block_vals = rng.normal(size=(1 << n, q))
    return buf, offsets, labels, nblocks, block_vals


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_partition_sum_backends_agree(n):
    rng = np.random.default_rng(n)
    buf, offsets, labels, nblocks, vals = _partition_inputs(n, 2, 3, rng)
    a = _kernels.numpy_backend.partition_sum(buf, offsets, 3, 2, labels, nblocks, vals)
    b = _kernels.numba_backend.partition_sum(buf, offsets, 3, 2, labels, nblocks, vals)
    assert np.allclose(a, b, rtol=1e-12)


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cover_coefficients_backends_agree(n):
    a = _kernels.numpy_backend.cover_coefficients(n)
    b = _kernels.numba_backend.cover_coefficients(n)
    assert np.array_equal(np.asarray(a), np.asarray(b))


def test_cover_coefficients_small():
    # n = 1: the only cover is {{0}}; (X - 1) expands to -1 (empty selection) + X
    assert list(_kernels.np_cover_coefficients(1)) == [-1, 1]
    # n = 2: three candidates {0}, {1}, {0,1}; brute force over covers
    from itertools import combinations
    cands = [(0,), (1,), (0, 1)]
    covers = [set(c) for k in (1, 2, 3) for c in combinations(range(3), k)
              if set().union(*(cands[j] for j in c)) == {0, 1}]
    want = []
    for beta in range(8):
        b = {j for j in range(3) if beta >> j & 1}
        want.append(sum((-1) ** (len(a) - len(b)) for a in covers if b <= a))
    assert list(_kernels.np_cover_coefficients(2)) == want


def test_get_backend():
    assert _kernels.get_backend("numpy").name == "numpy"
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


def test_env_flag_forces_numpy():
    env = dict(os.environ, FAABRUNO_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c",
                          "from faabruno import _kernels; print(_kernels.get_backend().name)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
