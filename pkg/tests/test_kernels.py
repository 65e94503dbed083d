import numpy as np
import pytest

from lnasynth import kernels


def _systems(rng, m, n, nrhs=2):
    a = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
    b = rng.standard_normal((m, n, nrhs)) + 1j * rng.standard_normal((m, n, nrhs))
    return a, b


@pytest.mark.parametrize("n", [1, 2, 5, 17])
def test_solve_matches_lapack(backend, rng, n):
    _, solve = backend
    a, b = _systems(rng, 7, n)
    x, first = solve(a, b)
    assert first == -1
    np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-9, atol=1e-12)


def test_solve_needs_pivoting(backend):
    _, solve = backend
    a = np.array([[[0, 1], [1, 0]]], dtype=complex)
    b = np.array([[[2], [3]]], dtype=complex)
    x, first = solve(a, b)
    assert first == -1
    np.testing.assert_allclose(x[0, :, 0], [3, 2])


def test_singular_member_is_flagged(backend, rng):
    _, solve = backend
    a, b = _systems(rng, 4, 3)
    a[2, :, 1] = 0.0  # zero column
    a[3, 2] = a[3, 0]  # duplicate row
    x, first = solve(a, b)
    assert first == 2
    np.testing.assert_allclose(x[:2], np.linalg.solve(a[:2], b[:2]), rtol=1e-9)


def test_tiny_but_regular_scale_is_not_singular(backend, rng):
    # the pivot test is relative, so scaling must not matter
    _, solve = backend
    a, b = _systems(rng, 3, 4)
    x, first = solve(a * 1e-18, b)
    assert first == -1
    np.testing.assert_allclose(x, np.linalg.solve(a, b) * 1e18, rtol=1e-8)


def test_scatter_accumulates_duplicates(backend, rng):
    scatter, _ = backend
    n, m = 4, 3
    rows = np.array([0, 1, 1, 3, 0], dtype=np.int64)
    cols = np.array([0, 2, 2, 3, 0], dtype=np.int64)
    vals = rng.standard_normal((m, 5)) + 1j * rng.standard_normal((m, 5))
    out = scatter(n, rows, cols, vals)
    ref = np.zeros((m, n, n), dtype=complex)
    for k in range(5):
        ref[:, rows[k], cols[k]] += vals[:, k]
    np.testing.assert_allclose(out, ref)


def test_backends_agree(rng):
    a, b = _systems(rng, 50, 12)
    x_np, _ = kernels._solve_batch_numpy(a, b)
    x_lp, _ = kernels._solve_batch_loops(a, b)
    np.testing.assert_allclose(x_np, x_lp, rtol=1e-10)


def test_public_binding_matches_flag():
    from lnasynth._accel import USE_NUMBA

    assert kernels.BACKEND == ("numba" if USE_NUMBA else "numpy")
    x, first = kernels.solve_batch(np.eye(3)[None] * 2, np.ones((1, 3, 1)))
    assert first == -1
    np.testing.assert_allclose(x[0, :, 0], 0.5)


def test_env_flag_selects_numpy(tmp_path):
    import os
    import subprocess
    import sys

    env = dict(os.environ, LNASYNTH_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "from lnasynth import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
