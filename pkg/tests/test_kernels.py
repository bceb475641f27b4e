import os
import subprocess
import sys

import numpy as np
import pytest

from hausdorff_h1 import _kernels as K
from hausdorff_h1 import homspace as hs

pytestmark = pytest.mark.skipif(K.numba_backend is None, reason="numba not installed")


def test_heis_distance_parity(rng):
    for n in (1, 2, 3):
        g = rng.normal(size=(500, 2 * n + 1))
        h = rng.normal(size=(500, 2 * n + 1))
        a = K.numpy_backend.heis_distance(g, h, n, 1.3)
        b = K.numba_backend.heis_distance(g, h, n, 1.3)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ut_parity(n, rng):
    I, J = hs.ut_pairs(n)
    a = rng.normal(size=(300, I.size))
    b = rng.normal(size=(300, I.size))
    for name in ("ut_multiply",):
        np.testing.assert_allclose(getattr(K.numpy_backend, name)(a, b, I, J, n),
                                   getattr(K.numba_backend, name)(a, b, I, J, n), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(K.numpy_backend.ut_inverse(a, I, J, n), K.numba_backend.ut_inverse(a, I, J, n),
                               rtol=1e-11, atol=1e-11)
    for backend in (K.numpy_backend, K.numba_backend):
        ref = backend.ut_multiply(backend.ut_inverse(a, I, J, n), b, I, J, n)
        np.testing.assert_allclose(backend.ut_left_divide(a, b, I, J, n), ref, rtol=1e-10, atol=1e-10)
        assert np.all(backend.ut_left_divide(a, a, I, J, n) == 0.0)
    np.testing.assert_allclose(K.numpy_backend.ut_gauge(a, I, J, n), K.numba_backend.ut_gauge(a, I, J, n),
                               rtol=1e-12)


def test_ut_inverse_matches_dense(rng):
    n = 4
    I, J = hs.ut_pairs(n)
    a = rng.normal(size=(50, I.size))
    for backend in (K.numpy_backend, K.numba_backend):
        inv = backend.ut_inverse(a, I, J, n)
        for row, irow in zip(a, inv):
            M = np.eye(n)
            M[I, J] = row
            np.testing.assert_allclose(np.linalg.inv(M)[I, J], irow, atol=1e-10)


def test_torus_symdiff_parity(rng):
    sides = hs.StrubleFamily(hs.GroupSpec("torus", 2)).sides
    d = hs.torus_offsets(rng.uniform(size=(400, 2)), rng.uniform(size=(400, 2)))
    np.testing.assert_allclose(K.numpy_backend.torus_symdiff_sup(d, sides),
                               K.numba_backend.torus_symdiff_sup(d, sides), rtol=1e-13, atol=1e-15)


def test_slice_volume_parity():
    a = K.numpy_backend.heis_slice_volume(1.1, 300)
    b = K.numba_backend.heis_slice_volume(1.1, 300)
    assert abs(a - b) <= 1e-12 * a


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, HAUSDORFF_NUMBA="0")
    code = "from hausdorff_h1 import _kernels as K; print(K.backend.name)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_as_rows():
    x = K.as_rows([1.0, 2.0])
    assert x.shape == (1, 2) and x.flags.c_contiguous
