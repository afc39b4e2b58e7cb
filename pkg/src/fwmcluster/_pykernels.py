"""NumPy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used
when the extension is not built or ``FWMCLUSTER_PURE_PYTHON`` is set.
"""

import numpy as np


def n_from_params(k):
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    if n * (n - 1) // 2 != k:
        return -1
    return n


def orthogonal_batch(angles, n):
    """Stack of Givens products ``R(0,1) R(0,2) ... R(n-2,n-1)``, one per row of ``angles``."""
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    m = angles.shape[0]
    out = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    c = np.cos(angles)
    s = np.sin(angles)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            ci = c[:, k, None]
            si = s[:, k, None]
            col_i = out[:, :, i].copy()
            col_j = out[:, :, j]
            out[:, :, i] = ci * col_i + si * col_j
            out[:, :, j] = -si * col_i + ci * col_j
            k += 1
    return out


def _phase_distance(theta, lo, hi):
    # homodyne phases are defined modulo pi
    best = None
    for shift in (-np.pi, 0.0, np.pi):
        t = theta + shift
        d = np.maximum(lo - t, 0.0) + np.maximum(t - hi, 0.0)
        best = d if best is None else np.minimum(best, d)
    return best


def residual_batch(angles, uv, rh, phase_lo=-np.inf, phase_hi=np.inf, phase_weight=0.0):
    """Off-diagonal weight of ``U'^T U'`` with ``U' = uv @ O(angles) @ rh``.

    ``rh`` is ``R^dagger``.  A non-zero ``phase_weight`` adds the squared
    distance of each homodyne phase ``arg(diag)/2`` to ``[phase_lo, phase_hi]``.
    """
    uv = np.asarray(uv, dtype=np.complex128)
    rh = np.asarray(rh, dtype=np.complex128)
    n = uv.shape[0]
    o = orthogonal_batch(angles, n)
    up = np.einsum("ij,mjk,kl->mil", uv, o, rh, optimize=True)
    mm = np.einsum("mki,mkj->mij", up, up)
    absq = mm.real**2 + mm.imag**2
    # zero the diagonal rather than subtracting it: the diagonal is O(1)
    # and subtraction would bury residuals below ~1e-16
    n = absq.shape[1]
    absq[:, np.arange(n), np.arange(n)] = 0.0
    res = absq.sum(axis=(1, 2))
    if phase_weight > 0.0:
        theta = 0.5 * np.angle(np.einsum("mii->mi", mm))
        d = _phase_distance(theta, phase_lo, phase_hi)
        res = res + phase_weight * np.sum(d * d, axis=1)
    return res
