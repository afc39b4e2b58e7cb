import os
import subprocess
import sys

import numpy as np
import pytest

from fwmcluster import BACKEND, kernels
from fwmcluster.cluster import canonical_cluster_unitary, preset_graph
from fwmcluster.eigenmodes import decompose
from fwmcluster.symplectic import build_cascade, covariance, tree
from fwmcluster.synthesis import build_R, diagonality_residual

py = kernels.get_backend("python")
try:
    cy = kernels.get_backend("cython")
except ImportError:  # extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def problem(n=4, G=1.4):
    basis = decompose(covariance(build_cascade(tree(G))))
    r = build_R(basis)
    uv = canonical_cluster_unitary(preset_graph("linear4")).uv
    return np.ascontiguousarray(uv), np.ascontiguousarray(r.conj().T), r


def test_backend_name():
    assert BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7])
def test_python_orthogonal_matches_product(n):
    k = n * (n - 1) // 2
    angles = np.random.default_rng(n).uniform(-4, 4, size=(3, k))
    out = py.orthogonal_batch(angles, n)
    for b in range(3):
        o = np.eye(n)
        idx = 0
        for i in range(n):
            for j in range(i + 1, n):
                g = np.eye(n)
                c, s = np.cos(angles[b, idx]), np.sin(angles[b, idx])
                g[i, i] = g[j, j] = c
                g[i, j], g[j, i] = -s, s
                o = o @ g
                idx += 1
        np.testing.assert_allclose(out[b], o, atol=1e-13)


def test_python_residual_matches_reference():
    uv, rh, r = problem()
    angles = np.random.default_rng(0).uniform(-3, 3, size=(5, 6))
    vals = py.residual_batch(angles, uv, rh)
    os_ = py.orthogonal_batch(angles, 4)
    for a, o in zip(vals, os_):
        assert a == pytest.approx(diagonality_residual(o, uv, r), rel=1e-12, abs=1e-15)


@needs_ext
@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_backends_agree_orthogonal(n):
    k = n * (n - 1) // 2
    angles = np.random.default_rng(10 + n).uniform(-4, 4, size=(8, k))
    np.testing.assert_allclose(cy.orthogonal_batch(angles, n), py.orthogonal_batch(angles, n), atol=1e-14)


@needs_ext
@pytest.mark.parametrize("penalty", [{}, {"phase_lo": -0.5, "phase_hi": 0.8, "phase_weight": 2.0}])
def test_backends_agree_residual(penalty):
    uv, rh, _ = problem()
    angles = np.random.default_rng(3).uniform(-3, 3, size=(64, 6))
    a = cy.residual_batch(angles, uv, rh, **penalty)
    b = py.residual_batch(angles, uv, rh, **penalty)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_ext
def test_extension_accepts_read_only_inputs():
    uv, rh, _ = problem()
    angles = np.random.default_rng(3).uniform(-3, 3, size=(4, 6))
    for arr in (uv, rh, angles):
        arr.setflags(write=False)
    assert cy.residual_batch(angles, uv, rh).shape == (4,)


def test_phase_penalty_zero_inside_range():
    uv, rh, _ = problem()
    angles = np.random.default_rng(4).uniform(-3, 3, size=(16, 6))
    plain = py.residual_batch(angles, uv, rh)
    boxed = py.residual_batch(angles, uv, rh, phase_lo=-10.0, phase_hi=10.0, phase_weight=5.0)
    np.testing.assert_array_equal(plain, boxed)
    tight = py.residual_batch(angles, uv, rh, phase_lo=0.0, phase_hi=0.01, phase_weight=5.0)
    assert np.all(tight >= plain)


def test_pure_python_env_switch():
    env = dict(os.environ, FWMCLUSTER_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import fwmcluster; print(fwmcluster.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
