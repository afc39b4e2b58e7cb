"""Turning cascade outputs into a cluster state with homodyne phases and post-processing.

The setup realises ``W = O_post @ P_homo @ R`` with ``R = U0 @ P_sqz``.
A target cluster unitary ``U_V`` (or any ``U_V @ O`` with ``O`` real
orthogonal, which defines the same cluster) is reachable exactly when
``U'^T U'`` is diagonal for ``U' = U_V @ O @ R^dagger``; then
``P_homo^2 = U'^T U'`` and ``O_post = U' @ P_homo^-1``.

``synthesize`` searches ``O`` with the evolution strategy to make
``U'^T U'`` as diagonal as possible.  The residual minimisers are often
not unique (whole families of exact solutions for the 4-mode tree, equal
residual at distinct points for the 3-mode chain), so by default a
constrained local refinement then picks, among the residual-optimal
points, the one with the lowest mean log normalized nullifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .cluster import (
    AdjacencyMatrix,
    NullifierReport,
    canonical_cluster_unitary,
    is_cluster_unitary,
    nullifier_variances,
)
from .eigenmodes import DEFAULT_VACUUM_TOLERANCE, EigenmodeBasis, decompose
from .errors import ConfigurationError, DegeneratePhaseError, ValidationError
from .optimizer import EsConfig, TraceRow, es_minimize, orthogonal_from_params
from .symplectic import CascadeTopology, build_cascade, covariance

DEGENERATE_PHASE_MODULUS = 1e-6
PHASE_PENALTY_WEIGHT = 1.0


def squeezer_phases(basis: EigenmodeBasis, vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE) -> np.ndarray:
    """Diagonal of ``P_sqz``: ``1j`` for X-squeezed eigenmodes, ``1`` otherwise."""
    return np.where(basis.eta < 1.0 - vacuum_tolerance, 1j, 1.0 + 0j)


def build_R(basis: EigenmodeBasis, vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE) -> np.ndarray:
    return basis.u0 * squeezer_phases(basis, vacuum_tolerance)[None, :]


def _check_orthogonal(o: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise ValidationError(f"o must be square, got shape {o.shape}")
    err = float(np.max(np.abs(o.T @ o - np.eye(o.shape[0]))))
    if err > tol:
        raise ValidationError(f"o is not orthogonal (deviation {err:.3e})")
    return o


def _uv(uv) -> np.ndarray:
    return np.asarray(getattr(uv, "uv", uv), dtype=complex)


def _off_diagonal_weight(m: np.ndarray) -> float:
    absq = np.abs(m) ** 2
    np.fill_diagonal(absq, 0.0)
    return float(absq.sum())


def diagonality_residual(o, uv, r) -> float:
    """``sum_{i != j} |(U'^T U')_ij|^2`` with ``U' = uv @ o @ r^dagger``."""
    o = _check_orthogonal(o)
    up = _uv(uv) @ o @ np.asarray(r).conj().T
    m = up.T @ up
    return _off_diagonal_weight(m)


def _phase_shift(theta: np.ndarray, phase_range) -> np.ndarray:
    """Move each phase by a multiple of pi into ``phase_range`` when that helps."""
    if phase_range is None:
        return theta
    lo, hi = phase_range
    out = theta.copy()
    for j, t in enumerate(theta):
        best, best_d = t, math.inf
        for shift in (0.0, -math.pi, math.pi):
            c = t + shift
            d = max(lo - c, 0.0) + max(c - hi, 0.0)
            if d < best_d - 1e-15:
                best, best_d = c, d
        out[j] = best
    return out


@dataclass
class SynthesisSolution:
    phases: np.ndarray
    o_post: np.ndarray
    residual: float
    achieved_w: np.ndarray
    nullifiers: NullifierReport
    r: np.ndarray
    squeeze_x: np.ndarray
    v: np.ndarray
    o_search: np.ndarray
    optimizer_trace: list[TraceRow] = field(default_factory=list)
    refined: bool = False

    @property
    def p_homo(self) -> np.ndarray:
        return np.diag(np.exp(1j * self.phases))

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.nullifiers.normalized < 1.0))

    def invariant_errors(self) -> dict[str, float]:
        n = len(self.phases)
        p = np.exp(1j * self.phases)
        w = self.achieved_w
        return {
            "p_homo_modulus": float(np.max(np.abs(np.abs(p) - 1.0))),
            "o_post_orthogonality": float(np.max(np.abs(self.o_post.T @ self.o_post - np.eye(n)))),
            "achieved_w_unitarity": float(np.max(np.abs(w.conj().T @ w - np.eye(n)))),
            "achieved_w_consistency": float(np.max(np.abs(self.o_post @ np.diag(p) @ self.r - w))),
        }


def extract_solution(o, uv, r, v, squeeze_x, *, phase_range=None) -> SynthesisSolution:
    """Homodyne phases and post-processing from a search matrix ``o``.

    Phases are half the argument of the diagonal of ``U'^T U'`` (principal
    branch, or shifted by pi into ``phase_range``).  ``O_post`` is the
    orthogonal polar factor of ``Re(U' @ P_homo^-1)``, and the nullifiers
    are those of the realizable ``O_post @ P_homo @ R``.
    """
    o = _check_orthogonal(o)
    r = np.asarray(r, dtype=complex)
    vm = v.v if isinstance(v, AdjacencyMatrix) else AdjacencyMatrix(v).v
    up = _uv(uv) @ o @ r.conj().T
    m = up.T @ up
    d = np.diag(m)
    small = np.abs(d) < DEGENERATE_PHASE_MODULUS
    if small.any():
        raise DegeneratePhaseError(
            f"diagonal entries {np.flatnonzero(small).tolist()} of U'^T U' vanish; homodyne phase undefined"
        )
    residual = _off_diagonal_weight(m)
    theta = _phase_shift(0.5 * np.angle(d), phase_range)
    p = np.exp(1j * theta)
    raw = up / p[None, :]
    uu, _, vt = np.linalg.svd(raw.real)
    o_post = uu @ vt
    w = (o_post * p[None, :]) @ r
    report = nullifier_variances(w, squeeze_x, vm)
    return SynthesisSolution(theta, o_post, residual, w, report, r, np.asarray(squeeze_x, dtype=float), vm, o)


def _score(sol: SynthesisSolution) -> float:
    return float(np.mean(np.log(sol.nullifiers.normalized)))


@dataclass
class _Candidate:
    order: int
    uv: np.ndarray
    params: np.ndarray
    value: float


def synthesize(
    topology: CascadeTopology,
    v: AdjacencyMatrix,
    config: EsConfig = EsConfig(),
    *,
    refine: bool = True,
    phase_range: tuple[float, float] | None = None,
    vacuum_tolerance: float = DEFAULT_VACUUM_TOLERANCE,
    target=None,
) -> SynthesisSolution:
    """Full pipeline from a cascade and a target graph to the best realizable cluster.

    Each restart is run twice, once on ``U_V`` and once on ``U_V`` with its
    first column negated, since the Givens map only covers det(O) = +1.
    ``target`` replaces the canonical ``U_V`` by any other cluster unitary
    of ``v``.
    """
    if not isinstance(v, AdjacencyMatrix):
        v = AdjacencyMatrix(v)
    n = topology.n_modes
    if v.n != n:
        raise ConfigurationError(f"cascade has {n} output modes but the graph has {v.n} nodes")
    if phase_range is not None:
        lo, hi = map(float, phase_range)
        if not lo < hi:
            raise ConfigurationError(f"phase range must satisfy min < max, got {phase_range}")
        phase_range = (lo, hi)

    basis = decompose(covariance(build_cascade(topology)))
    r = build_R(basis, vacuum_tolerance)
    rh = np.ascontiguousarray(r.conj().T)
    s = basis.squeeze_x()
    if target is None:
        uv = canonical_cluster_unitary(v).uv
    else:
        uv = _uv(target)
        chk = is_cluster_unitary(uv, v, 1e-8) if uv.shape == (n, n) else None
        if not chk:
            raise ConfigurationError(f"target is not a cluster unitary of the graph ({chk})")
    flipped = uv.copy()
    flipped[:, 0] *= -1

    penalty = {}
    if phase_range is not None:
        penalty = {"phase_lo": phase_range[0], "phase_hi": phase_range[1], "phase_weight": PHASE_PENALTY_WEIGHT}

    dim = n * (n - 1) // 2
    trace: list[TraceRow] = []
    candidates: list[_Candidate] = []
    for variant, target in enumerate((uv, flipped)):
        target = np.ascontiguousarray(target)

        def objective(x, target=target):
            return kernels.residual_batch(x, target, rh, **penalty)

        res = es_minimize(objective, dim, config, batched=True, stream=variant)
        offset = variant * config.restarts
        trace.extend(TraceRow(t.restart + offset, *t[1:]) for t in res.trace)
        for rr in res.restarts:
            candidates.append(_Candidate(offset + rr.index, target, rr.params, rr.value))

    best_value = min(c.value for c in candidates)
    # restarts that ended on the same residual level within stochastic spread
    cap = best_value + 10.0 * config.target + 1e-6 * best_value + 1e-12
    tied = [c for c in candidates if c.value <= cap]

    def penalized(x, target):
        return float(kernels.residual_batch(np.reshape(x, (1, -1)), target, rh, **penalty)[0])

    def solve(x, target):
        return extract_solution(orthogonal_from_params(x), target, r, v, s, phase_range=phase_range)

    sql_ = 1.0 + np.sum(v.v**2, axis=1)
    inv_s = 1.0 / s

    def fast_score(x, target):
        # extract_solution without validation, for the refinement inner loop
        o = kernels.orthogonal_batch(np.reshape(x, (1, -1)), n)[0]
        up = target @ o @ rh
        d = np.einsum("ki,ki->i", up, up)
        if np.any(np.abs(d) < DEGENERATE_PHASE_MODULUS):
            return 1e3
        p = np.exp(1j * _phase_shift(0.5 * np.angle(d), phase_range))
        uu, _, vt = np.linalg.svd((up / p[None, :]).real)
        w = ((uu @ vt) * p[None, :]) @ r
        cx = w.imag - v.v @ w.real
        cp = w.real + v.v @ w.imag
        return float(np.log(((cx**2) @ s + (cp**2) @ inv_s) / sql_).sum()) / n

    best = None
    best_key = None
    pool = tied if refine else sorted(candidates, key=lambda c: (c.value, c.order))
    for c in pool:
        try:
            sol = solve(c.params, c.uv)
        except DegeneratePhaseError:
            continue
        key = _score(sol)
        if refine:
            sol, key = _refine(c, sol, key, cap, penalized, solve, fast_score)
        if best is None or (refine and key < best_key - 1e-12):
            best, best_key = sol, key
        if not refine:
            break
    if best is None:
        raise DegeneratePhaseError(
            "every optimizer candidate leaves a vanishing diagonal entry in U'^T U'; "
            "no homodyne phase is defined for this cascade and graph"
        )
    best.optimizer_trace = trace
    return best


def _refine(c: _Candidate, sol, score, cap, penalized, solve, fast_score):
    """Lower the nullifier score while keeping the residual at its optimum level."""
    out = minimize(
        lambda x: fast_score(x, c.uv),
        c.params,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda x: cap - penalized(x, c.uv)}],
        options={"maxiter": 200, "ftol": 1e-10},
    )
    x = out.x
    if not np.all(np.isfinite(x)) or penalized(x, c.uv) > cap * (1 + 1e-9) + 1e-15:
        return sol, score
    try:
        new = solve(x, c.uv)
    except DegeneratePhaseError:
        return sol, score
    new_score = _score(new)
    if new_score < score:
        new.refined = True
        return new, new_score
    return sol, score


def solution_summary(sol: SynthesisSolution) -> dict:
    return {
        "phases_rad": [float(t) for t in sol.phases],
        "p_homo": {"re": [float(x) for x in np.cos(sol.phases)], "im": [float(x) for x in np.sin(sol.phases)]},
        "o_post": [[float(x) for x in row] for row in sol.o_post],
        "residual": float(sol.residual),
        "nullifiers": sol.nullifiers.as_dict(),
        "feasible": sol.feasible,
        "refined": sol.refined,
    }
