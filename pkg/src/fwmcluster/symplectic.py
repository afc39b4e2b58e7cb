"""Four-wave mixing cells and their cascades as linear quadrature maps.

Every cell is an ideal two-mode amplifier with amplitude gain ``G`` and
cross gain ``g = sqrt(G**2 - 1)``.  One input is a seed (the external
coherent beam or an output of an earlier cell), the other a fresh vacuum.
The amplified seed keeps the seed's beam type (signal ``s`` or idler
``i``); the generated beam takes the other type.  Outputs of cell ``k``
(1-based) are therefore labelled ``s{k}``/``i{k}``.

Quadratures follow ``X = a + a^dag`` and ``P = i(a^dag - a)`` with vacuum
variance one, so X and P never mix and each block evolves with a real
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InconsistencyError, TopologyError, ValidationError

EXTERNAL_INPUT = "input"
# extended precision for the cascade products; rounded to float64 once at the end
_EXT = np.longdouble


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Gain:
    """Amplitude gain of one cell; ``g`` is derived so that G^2 - g^2 = 1."""

    G: float

    def __post_init__(self):
        G = float(self.G)
        if not math.isfinite(G) or G < 1.0:
            raise ValidationError(f"gain must be a finite real >= 1, got {self.G!r}")
        object.__setattr__(self, "G", G)

    @property
    def g(self) -> float:
        # (G-1)(G+1) loses less precision than G*G-1 near G=1
        return math.sqrt((self.G - 1.0) * (self.G + 1.0))


@dataclass(frozen=True)
class FwmCell:
    gain: Gain
    seed: str = EXTERNAL_INPUT

    def __post_init__(self):
        if not isinstance(self.gain, Gain):
            object.__setattr__(self, "gain", Gain(self.gain))


@dataclass(frozen=True)
class CascadeTopology:
    """Ordered cells plus an optional output ordering.

    ``mode_labels`` may be left empty, in which case the natural order is
    used: an amplified seed takes the slot of the beam it consumed and the
    generated beam is appended.  For the two paper layouts this yields
    ``(s1, i2, s2)`` and ``(s3, i2, s2, i3)``.
    """

    cells: tuple[FwmCell, ...]
    mode_labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "mode_labels", tuple(self.mode_labels))
        if not self.cells:
            raise TopologyError("a cascade needs at least one cell")
        natural = _trace_labels(self.cells)
        if self.mode_labels:
            if len(set(self.mode_labels)) != len(self.mode_labels):
                raise TopologyError(f"duplicate output labels in {list(self.mode_labels)}")
            if set(self.mode_labels) != set(natural):
                raise TopologyError(
                    f"labels {list(self.mode_labels)} do not match cascade outputs {natural}"
                )

    @property
    def n_modes(self) -> int:
        return len(self.cells) + 1

    @property
    def labels(self) -> tuple[str, ...]:
        return self.mode_labels or tuple(_trace_labels(self.cells))

    @property
    def input_labels(self) -> tuple[str, ...]:
        return ("s0",) + tuple(f"v{k}" for k in range(len(self.cells)))


def _output_names(seed_label: str, k: int) -> tuple[str, str]:
    kind = seed_label[0]
    other = "i" if kind == "s" else "s"
    return f"{kind}{k}", f"{other}{k}"


def _trace_labels(cells: Sequence[FwmCell]) -> list[str]:
    """Walk the cascade symbolically, validating every seed reference."""
    live = ["s0"]
    consumed: dict[str, int] = {}
    for k, cell in enumerate(cells, start=1):
        seed = cell.seed
        if k == 1:
            if seed not in (EXTERNAL_INPUT, "s0"):
                raise TopologyError(
                    f"cells[0].seed: the first cell must be seeded by {EXTERNAL_INPUT!r}, got {seed!r}"
                )
            seed = "s0"
        elif seed in (EXTERNAL_INPUT, "s0"):
            raise TopologyError(
                f"cells[{k - 1}].seed: external input already consumed by cell 1"
            )
        if seed not in live:
            if seed in consumed:
                raise TopologyError(
                    f"cells[{k - 1}].seed: mode {seed!r} was already consumed by cell {consumed[seed]}"
                )
            raise TopologyError(
                f"cells[{k - 1}].seed: {seed!r} is not an output of an earlier cell"
            )
        slot = live.index(seed)
        amplified, generated = _output_names(seed, k)
        consumed[seed] = k
        live[slot] = amplified
        live.append(generated)
    return live


def chain(gains: Sequence[float] | float, n_cells: int | None = None) -> CascadeTopology:
    """Asymmetric chain: each cell is seeded by the beam generated by the previous one.

    ``chain([G1, G2])`` is the double-stage layout (idler of cell 1 seeds
    cell 2) with outputs ``(s1, i2, s2)``.
    """
    if np.isscalar(gains):
        if n_cells is None:
            raise ValidationError("n_cells is required with a scalar gain")
        gains = [float(gains)] * n_cells
    gains = list(gains)
    if n_cells is not None and len(gains) != n_cells:
        raise ValidationError(f"expected {n_cells} gains, got {len(gains)}")
    cells = [FwmCell(Gain(gains[0]), EXTERNAL_INPUT)]
    seed = "s0"
    for k, G in enumerate(gains[1:], start=1):
        seed = _output_names(seed, k)[1]
        cells.append(FwmCell(Gain(G), seed))
    return CascadeTopology(tuple(cells))


def tree(gains: Sequence[float] | float) -> CascadeTopology:
    """Symmetric three-cell tree: signal and idler of cell 1 each seed a cell.

    Outputs are ordered ``(s3, i2, s2, i3)``.
    """
    if np.isscalar(gains):
        gains = [float(gains)] * 3
    if len(gains) != 3:
        raise ValidationError(f"the symmetric tree has 3 cells, got {len(gains)} gains")
    g1, g2, g3 = gains
    return CascadeTopology(
        (FwmCell(Gain(g1), EXTERNAL_INPUT), FwmCell(Gain(g2), "i1"), FwmCell(Gain(g3), "s1"))
    )



def preset_topology(name: str, gains: Sequence[float] | float) -> CascadeTopology:
    """``chain2``/``tree3`` are the paper layouts; ``chainN`` is an N-cell chain."""
    if not np.isscalar(gains) and len(gains) == 1:
        gains = float(gains[0])
    if name == "tree3":
        return tree(gains)
    if name.startswith("chain") and name[5:].isdigit() and int(name[5:]) >= 1:
        return chain(gains, int(name[5:]))
    raise ValidationError(f"unknown topology preset {name!r}; valid: chain2, tree3, chainN")


@dataclass(frozen=True)
class QuadratureTransform:
    """Real maps ``X_out = ux @ X_in`` and ``P_out = up @ P_in``."""

    ux: np.ndarray
    up: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ux, up = _frozen(self.ux), _frozen(self.up)
        if ux.ndim != 2 or ux.shape[0] != ux.shape[1] or ux.shape != up.shape:
            raise ValidationError(f"ux/up must be equal square matrices, got {ux.shape} and {up.shape}")
        if not (np.all(np.isfinite(ux)) and np.all(np.isfinite(up))):
            raise ValidationError("transform entries must be finite")
        object.__setattr__(self, "ux", ux)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_modes(self) -> int:
        return self.ux.shape[0]

    def pairing_error(self) -> float:
        """Max-abs deviation of ``ux @ up.T`` from the identity."""
        return _identity_error(self.ux, self.up.T)


@dataclass(frozen=True)
class CovarianceMatrix:
    cxx: np.ndarray
    cpp: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        cxx, cpp = _frozen(self.cxx), _frozen(self.cpp)
        if cxx.ndim != 2 or cxx.shape[0] != cxx.shape[1] or cxx.shape != cpp.shape:
            raise ValidationError(f"cxx/cpp must be equal square matrices, got {cxx.shape} and {cpp.shape}")
        object.__setattr__(self, "cxx", cxx)
        object.__setattr__(self, "cpp", cpp)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_modes(self) -> int:
        return self.cxx.shape[0]

    def purity_error(self) -> float:
        """Max-abs deviation of ``cxx @ cpp`` from the identity (zero for pure states)."""
        return _identity_error(self.cxx, self.cpp)


def _identity_error(a: np.ndarray, b: np.ndarray) -> float:
    # entries reach ~1e4 for strong cascades; a float64 product would add
    # rounding noise of the same size as the tolerance being checked
    prod = a.astype(_EXT) @ b.astype(_EXT)
    return float(np.max(np.abs(prod - np.eye(a.shape[0], dtype=_EXT))))


def fwm_transform(gain: Gain | float) -> QuadratureTransform:
    if not isinstance(gain, Gain):
        gain = Gain(gain)
    G, g = gain.G, gain.g
    return QuadratureTransform(
        np.array([[G, g], [g, G]]), np.array([[G, -g], [-g, G]]), ("s1", "i1")
    )


def build_cascade(topology: CascadeTopology) -> QuadratureTransform:
    """Compose all cells into one N-mode transform.

    Columns are the inputs ``(s0, v0, v1, ...)`` where ``v{k}`` is the
    vacuum entering cell ``k+1``; rows follow ``topology.labels``.
    """
    n = topology.n_modes
    eye = np.eye(n, dtype=_EXT)
    rows_x: dict[str, np.ndarray] = {"s0": eye[0]}
    rows_p: dict[str, np.ndarray] = {"s0": eye[0]}
    for k, cell in enumerate(topology.cells, start=1):
        seed = "s0" if cell.seed == EXTERNAL_INPUT else cell.seed
        G = _EXT(cell.gain.G)
        g = np.sqrt((G - 1) * (G + 1))
        vac = eye[k]
        sx, sp = rows_x.pop(seed), rows_p.pop(seed)
        amplified, generated = _output_names(seed, k)
        rows_x[amplified] = G * sx + g * vac
        rows_x[generated] = g * sx + G * vac
        rows_p[amplified] = G * sp - g * vac
        rows_p[generated] = -g * sp + G * vac
    labels = topology.labels
    ux = np.array([rows_x[l] for l in labels])
    up = np.array([rows_p[l] for l in labels])
    return QuadratureTransform(ux.astype(float), up.astype(float), labels)


def covariance(t: QuadratureTransform) -> CovarianceMatrix:
    """Output covariance for vacuum/coherent inputs (unit input variances)."""
    ux, up = t.ux.astype(_EXT), t.up.astype(_EXT)
    return CovarianceMatrix((ux @ ux.T).astype(float), (up @ up.T).astype(float), t.labels)


def bogoliubov_blocks(t: QuadratureTransform, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation-operator form ``a_out = A a_in + B a_in^dag``."""
    err = t.pairing_error()
    if err > tol:
        raise InconsistencyError(f"ux @ up.T deviates from identity by {err:.3e} > {tol:g}")
    A = (t.ux + t.up).astype(complex) / 2
    B = (t.ux - t.up).astype(complex) / 2
    return A, B
