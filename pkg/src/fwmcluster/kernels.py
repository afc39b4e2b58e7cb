"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when importable; otherwise,
or when the environment variable ``FWMCLUSTER_PURE_PYTHON`` is set to a
non-empty value other than ``0``, the NumPy versions in ``_pykernels``
are used.  ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels

_force_pure = os.environ.get("FWMCLUSTER_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

orthogonal_batch = _impl.orthogonal_batch
residual_batch = _impl.residual_batch
n_from_params = _impl.n_from_params


def get_backend(name):
    """Kernel module by name (``"python"`` or ``"cython"``), for benchmarks and tests."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
