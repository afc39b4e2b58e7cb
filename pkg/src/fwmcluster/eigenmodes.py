"""Independent squeezed modes of a pure, X/P-decoupled Gaussian state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .symplectic import CovarianceMatrix

SQUEEZED = "squeezed"
ANTISQUEEZED = "antisqueezed"
VACUUM = "vacuum"

DEFAULT_VACUUM_TOLERANCE = 1e-6
# relative gap below which two eigenvalues are treated as one degenerate level
_DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class EigenmodeBasis:
    """Columns of ``u0`` are eigenmodes written in the output-mode basis.

    ``eta`` holds the X-quadrature variances of the eigenmodes, sorted
    descending, so ``cxx = u0 @ diag(eta) @ u0.T``.
    """

    u0: np.ndarray
    eta: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        u0 = np.array(self.u0, dtype=float)
        eta = np.array(self.eta, dtype=float)
        u0.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_modes(self) -> int:
        return len(self.eta)

    def reconstruct(self) -> np.ndarray:
        return self.u0 @ np.diag(self.eta) @ self.u0.T

    def squeeze_x(self) -> np.ndarray:
        """Antisqueezed variance per eigenmode, ``max(eta, 1/eta)`` (1 for vacuum)."""
        return np.maximum(self.eta, 1.0 / self.eta)


@dataclass(frozen=True)
class ModeClassification:
    tags: tuple[str, ...]
    squeezing_db: tuple[float, ...]
    vacuum_tolerance: float

    @property
    def vacuum_count(self) -> int:
        return self.tags.count(VACUUM)


def _canonical_signs(u: np.ndarray) -> np.ndarray:
    u = u.copy()
    for j in range(u.shape[1]):
        # argmax returns the lowest index among ties; the rounding keeps
        # nearly-equal magnitudes from flipping on the last bit
        mags = np.round(np.abs(u[:, j]), 12)
        if u[int(np.argmax(mags)), j] < 0:
            u[:, j] = -u[:, j]
    return u


def _canonical_subspace(q: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(q), independent of how q was picked.

    Gram-Schmidt on the projections of the standard basis vectors, so an
    identity block comes back as the identity.
    """
    m = q.shape[1]
    if m == 1:
        return q
    proj = q @ q.T
    basis: list[np.ndarray] = []
    for i in range(q.shape[0]):
        v = proj[:, i].copy()
        for b in basis:
            v -= (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
            if len(basis) == m:
                break
    return np.column_stack(basis)


def decompose(c: CovarianceMatrix, symmetry_tol: float = 1e-9) -> EigenmodeBasis:
    cxx = np.asarray(c.cxx, dtype=float)
    asym = float(np.max(np.abs(cxx - cxx.T)))
    if asym > symmetry_tol:
        raise ValidationError(f"cxx is not symmetric (max deviation {asym:.3e})")
    w, v = np.linalg.eigh((cxx + cxx.T) / 2)
    if w[0] <= 0:
        raise ValidationError(f"cxx is not positive definite (smallest eigenvalue {w[0]:.3e})")
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]

    # group degenerate levels and canonicalise each eigenspace
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[start]) <= _DEGENERACY_RTOL * max(1.0, abs(w[start])):
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = _canonical_subspace(v[:, start:stop])
        start = stop
    return EigenmodeBasis(_canonical_signs(v), w, c.labels)


def squeezing_db(eta: float) -> float:
    """Noise level relative to vacuum in dB; negative means squeezed."""
    eta = float(eta)
    if not eta > 0:
        raise ValidationError(f"variance must be positive, got {eta!r}")
    return 10.0 * math.log10(eta)


def classify_modes(b: EigenmodeBasis, vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE) -> ModeClassification:
    if not 0 < vacuum_tolerance <= 0.1:
        raise ValidationError(f"vacuum_tolerance must lie in (0, 0.1], got {vacuum_tolerance!r}")
    tags = []
    for eta in b.eta:
        if abs(eta - 1.0) < vacuum_tolerance:
            tags.append(VACUUM)
        elif eta < 1.0:
            tags.append(SQUEEZED)
        else:
            tags.append(ANTISQUEEZED)
    return ModeClassification(tuple(tags), tuple(squeezing_db(e) for e in b.eta), vacuum_tolerance)


def mode_report(b: EigenmodeBasis, vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE) -> dict:
    """JSON-ready eigenmode summary: one entry per eigenmode, in eta order."""
    cls = classify_modes(b, vacuum_tolerance)
    return {
        "output_modes": list(b.labels),
        "eta": [float(e) for e in b.eta],
        "squeezing_db": list(cls.squeezing_db),
        "tags": list(cls.tags),
        "vacuum_count": cls.vacuum_count,
        "u0_columns": [[float(x) for x in b.u0[:, j]] for j in range(b.n_modes)],
    }


def bar_chart_rows(b: EigenmodeBasis, vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE) -> tuple[list[str], list[list]]:
    """Rows for the mode-shape bar chart: one row per eigenmode, one column per output mode."""
    cls = classify_modes(b, vacuum_tolerance)
    labels = list(b.labels) or [f"mode{i + 1}" for i in range(b.n_modes)]
    header = ["eigenmode", "eta", "squeezing_db", "tag", *labels]
    rows = []
    for j in range(b.n_modes):
        rows.append([j + 1, float(b.eta[j]), cls.squeezing_db[j], cls.tags[j], *(float(x) for x in b.u0[:, j])])
    return header, rows
