"""Seeded (mu + lambda) evolution strategy and the Givens map onto SO(n).

Random numbers come from NumPy's Philox4x32-10 counter-based generator.
Every (restart, generation) pair gets its own stream keyed by
``SeedSequence(seed, spawn_key=(restart, generation))`` (prefixed by a
nonzero ``stream`` index when one is given), generation 0
being the uniform initialisation, so traces depend only on the seed and
are reproducible across platforms and evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .errors import DimensionError, OptimizationError, ValidationError


@dataclass(frozen=True)
class EsConfig:
    population: int = 64
    parents: int = 8
    sigma_init: float = 0.3
    sigma_decay: float = 0.995
    max_generations: int = 2000
    restarts: int = 10
    target: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("population", "parents", "max_generations", "restarts"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
                raise ValidationError(f"{name} must be a positive integer, got {val!r}")
        if self.parents > self.population:
            raise ValidationError(f"parents ({self.parents}) must not exceed population ({self.population})")
        if not (math.isfinite(self.sigma_init) and self.sigma_init > 0):
            raise ValidationError(f"sigma_init must be positive, got {self.sigma_init!r}")
        if not 0 < self.sigma_decay <= 1:
            raise ValidationError(f"sigma_decay must lie in (0, 1], got {self.sigma_decay!r}")
        if not self.target >= 0:
            raise ValidationError(f"target must be nonnegative, got {self.target!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    def replace(self, **changes) -> "EsConfig":
        return EsConfig(**{**asdict(self), **changes})


class TraceRow(NamedTuple):
    restart: int
    generation: int
    best: float
    sigma: float


@dataclass
class RestartResult:
    index: int
    params: np.ndarray
    value: float
    generations: int


@dataclass
class EsResult:
    params: np.ndarray
    value: float
    trace: list[TraceRow] = field(default_factory=list)
    restarts: list[RestartResult] = field(default_factory=list)


def n_from_param_count(k: int) -> int:
    n = kernels.n_from_params(int(k))
    if n < 1:
        raise DimensionError(f"{k} angles is not a triangular number n(n-1)/2")
    return n


def orthogonal_from_params(params) -> np.ndarray:
    """Product of Givens rotations over pairs (1,2), (1,3), ..., (n-1,n)."""
    p = np.asarray(params, dtype=float).reshape(-1)
    n = n_from_param_count(p.size)
    return kernels.orthogonal_batch(p.reshape(1, -1), n)[0]


def _rng(seed: int, stream: int, restart: int, generation: int) -> np.random.Generator:
    key = (stream, restart, generation) if stream else (restart, generation)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def es_minimize(
    objective: Callable,
    dim: int,
    config: EsConfig = EsConfig(),
    *,
    batched: bool = False,
    stream: int = 0,
) -> EsResult:
    """Minimise ``objective`` over ``dim`` real parameters (angles).

    With ``batched=True`` the objective receives a ``(m, dim)`` array and
    returns ``m`` values; otherwise it is called once per parameter vector.
    Each generation draws ``population`` children, assigned round-robin to
    the current elites, and keeps the best ``parents`` of elites plus
    children.  Restarts start from fresh uniform angles in [-pi, pi).
    ``stream`` selects an independent family of random streams for callers
    that run several searches under one seed.
    """
    if dim < 0:
        raise DimensionError(f"dim must be nonnegative, got {dim}")

    def evaluate(x: np.ndarray) -> np.ndarray:
        if batched:
            vals = np.asarray(objective(x), dtype=float).reshape(-1)
        else:
            vals = np.array([float(objective(row)) for row in x])
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.argmax(bad))
            raise OptimizationError(f"objective returned {vals[i]!r}", params=x[i].copy())
        return vals

    cfg = config
    owner = np.arange(cfg.population) % cfg.parents
    result = EsResult(np.zeros(dim), math.inf)
    for r in range(cfg.restarts):
        rng = _rng(cfg.seed, stream, r, 0)
        x = rng.uniform(-np.pi, np.pi, size=(cfg.population, dim))
        f = evaluate(x)
        keep = np.argsort(f, kind="stable")[: cfg.parents]
        elites, ef = x[keep], f[keep]
        sigma = cfg.sigma_init
        result.trace.append(TraceRow(r, 0, float(ef[0]), sigma))
        gen = 0
        while gen < cfg.max_generations and ef[0] > cfg.target:
            gen += 1
            rng = _rng(cfg.seed, stream, r, gen)
            children = elites[owner] + sigma * rng.standard_normal((cfg.population, dim))
            fc = evaluate(children)
            pool = np.concatenate([elites, children])
            pf = np.concatenate([ef, fc])
            keep = np.argsort(pf, kind="stable")[: cfg.parents]
            elites, ef = pool[keep], pf[keep]
            result.trace.append(TraceRow(r, gen, float(ef[0]), sigma))
            sigma *= cfg.sigma_decay
        rr = RestartResult(r, elites[0].copy(), float(ef[0]), gen)
        result.restarts.append(rr)
        if rr.value < result.value:
            result.params, result.value = rr.params, rr.value
    return result


def trace_rows(trace) -> tuple[list[str], list[list]]:
    return ["restart", "generation", "best", "sigma"], [list(t) for t in trace]
