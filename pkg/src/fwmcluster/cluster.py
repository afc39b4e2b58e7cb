"""Cluster graphs, cluster unitaries and nullifier statistics.

A unitary ``w`` maps P-squeezed input modes to output modes.  Writing
``w = Re + i Im``, the output quadratures are

    X' = Re @ X - Im @ P,     P' = Im @ X + Re @ P,

so the nullifier ``delta = P' - v @ X'`` equals
``(Im - v Re) @ X + (Re + v Im) @ P``.  With independent inputs of
variance ``Var X_k = s_k`` and ``Var P_k = 1/s_k`` its variance follows
directly.  ``w`` is a cluster unitary for ``v`` exactly when the
X (antisqueezed) coefficient ``Im - v Re`` vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ValidationError


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    v: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((self.v.shape, self.v.tobytes()))

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError(f"adjacency must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("adjacency weights must be finite")
        if not np.array_equal(v, v.T):
            raise ValidationError("adjacency matrix must be exactly symmetric")
        if np.any(np.diag(v) != 0):
            raise ValidationError("adjacency matrix must have a zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.v.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdjacencyMatrix":
        """Build from 1-based ``(i, j[, weight])`` triples."""
        v = np.zeros((n, n))
        for e in edges:
            i, j = int(e[0]) - 1, int(e[1]) - 1
            w = float(e[2]) if len(e) > 2 else 1.0
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValidationError(f"invalid edge {list(e)} for a {n}-node graph")
            v[i, j] = v[j, i] = w
        return cls(v)

    def edges(self) -> list[tuple[int, int, float]]:
        n = self.n
        return [(i + 1, j + 1, float(self.v[i, j])) for i in range(n) for j in range(i + 1, n) if self.v[i, j] != 0]


@dataclass(frozen=True)
class ClusterUnitary:
    uv: np.ndarray

    def __post_init__(self):
        uv = np.array(self.uv, dtype=complex)
        uv.setflags(write=False)
        object.__setattr__(self, "uv", uv)


@dataclass(frozen=True)
class NullifierReport:
    raw_variance: np.ndarray
    sql: np.ndarray
    normalized: np.ndarray

    def as_dict(self) -> dict:
        return {
            "raw_variance": [float(x) for x in self.raw_variance],
            "sql": [float(x) for x in self.sql],
            "normalized": [float(x) for x in self.normalized],
        }


def _as_v(v) -> np.ndarray:
    return v.v if isinstance(v, AdjacencyMatrix) else AdjacencyMatrix(v).v


def canonical_cluster_unitary(v: AdjacencyMatrix) -> ClusterUnitary:
    """``(I + i v) (I + v^2)^(-1/2)``."""
    vm = _as_v(v)
    n = vm.shape[0]
    m = np.eye(n) + vm @ vm
    w, q = np.linalg.eigh(m)
    if w.min() < 1e-12 * max(1.0, w.max()):
        raise ConditioningError(f"I + v^2 is numerically singular (min eigenvalue {w.min():.3e})")
    inv_sqrt = (q / np.sqrt(w)) @ q.T
    return ClusterUnitary((np.eye(n) + 1j * vm) @ inv_sqrt)


@dataclass(frozen=True)
class ClusterCheck:
    ok: bool
    unitarity_error: float
    cluster_error: float

    def __bool__(self) -> bool:
        return self.ok


def is_cluster_unitary(u, v: AdjacencyMatrix, tol: float) -> ClusterCheck:
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    u = np.asarray(getattr(u, "uv", u), dtype=complex)
    vm = _as_v(v)
    unit = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    clus = float(np.max(np.abs(u.imag - vm @ u.real)))
    return ClusterCheck(unit <= tol and clus <= tol, unit, clus)


def sql(v: AdjacencyMatrix) -> np.ndarray:
    """Vacuum variance of each nullifier, ``1 + sum_j v_ij^2``."""
    vm = _as_v(v)
    return 1.0 + np.sum(vm**2, axis=1)


def nullifier_coefficients(w: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of each nullifier on the input X and P quadratures."""
    return w.imag - v @ w.real, w.real + v @ w.imag


def nullifier_variances(w, squeeze_x, v: AdjacencyMatrix, unitarity_tol: float = 1e-8) -> NullifierReport:
    w = np.asarray(getattr(w, "uv", w), dtype=complex)
    vm = _as_v(v)
    s = np.asarray(squeeze_x, dtype=float)
    n = vm.shape[0]
    if w.shape != (n, n) or s.shape != (n,):
        raise ValidationError(f"shape mismatch: w {w.shape}, squeeze_x {s.shape}, graph of {n} nodes")
    err = float(np.max(np.abs(w.conj().T @ w - np.eye(n))))
    if err > unitarity_tol:
        raise ValidationError(f"w is not unitary (deviation {err:.3e})")
    if np.any(s < 1.0 - 1e-12):
        raise ValidationError("squeeze_x entries are antisqueezed variances and must be >= 1")
    cx, cp = nullifier_coefficients(w, vm)
    raw = (cx**2) @ s + (cp**2) @ (1.0 / s)
    q = sql(vm)
    return NullifierReport(raw, q, raw / q)


def _path(n: int) -> np.ndarray:
    v = np.zeros((n, n))
    for i in range(n - 1):
        v[i, i + 1] = v[i + 1, i] = 1.0
    return v


def _square() -> np.ndarray:
    v = _path(4)
    v[0, 3] = v[3, 0] = 1.0
    return v


def _t_shape() -> np.ndarray:
    v = np.zeros((4, 4))
    for leaf in (0, 2, 3):
        v[1, leaf] = v[leaf, 1] = 1.0
    return v


_PRESETS = {
    "linear3": lambda: _path(3),
    "linear4": lambda: _path(4),
    "square4": _square,
    "t4": _t_shape,
}


def preset_graph(name: str) -> AdjacencyMatrix:
    try:
        return AdjacencyMatrix(_PRESETS[name]())
    except KeyError:
        raise KeyError(f"unknown graph preset {name!r}; valid presets: {', '.join(sorted(_PRESETS))}") from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)
