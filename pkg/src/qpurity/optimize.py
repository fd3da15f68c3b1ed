"""Multi-start local ascent on the unit sphere of C^n.

Objectives are callables ``f(x) -> (value, grad, gap)`` where ``grad`` is the
Euclidean gradient in the real identification ``C^n = R^2n`` (so that the
first-order change is ``Re <dx, grad>``) and ``gap`` is the spectral gap at
the active eigenvalue for nonsmooth objectives (``inf`` when smooth).

Each restart owns a random stream derived from ``(seed, restart_index)``;
the reduction over restarts keeps the best value and breaks ties by the
lowest restart index, so results do not depend on execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Objective = Callable[[np.ndarray], tuple[float, np.ndarray, float]]

DEGENERACY_GAP = 1e-8
N_PROBES = 20
GRAD_FLOOR = 1e-13


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 2000
    step_tol: float = 1e-10
    value_tol: float = 1e-9
    seed: int = 42
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.step_tol > 0 and self.value_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class RestartOutcome:
    index: int
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


@dataclass
class SphereResult:
    x: np.ndarray
    value: float
    best_restart: int
    converged_restarts: int
    restarts: list[RestartOutcome] = field(repr=False, default_factory=list)


def restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, index])


def random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _tangent(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    # the global-phase direction i*x is a null direction, so drop it as well
    return g - np.vdot(x, g) * x


def _normalize(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def ascend(f: Objective, x0: np.ndarray, rng: np.random.Generator, max_iters: int,
           step_tol: float, value_tol: float) -> tuple[np.ndarray, float, int, bool]:
    """Projected gradient ascent with renormalization and backtracking.

    The step length doubles after an accepted step and halves after a
    rejected one.  Near an eigenvalue crossing (gap below ``DEGENERACY_GAP``)
    a failed gradient step is followed by random tangent probes.
    """
    x = _normalize(np.asarray(x0, dtype=complex))
    val, g, gap = f(x)
    if x.size == 1:
        # the sphere of C^1 is a phase circle; the objective is constant on it
        return x, val, 0, True
    t = 1.0
    small = 0
    for it in range(1, max_iters + 1):
        gt = _tangent(x, g)
        gn = np.linalg.norm(gt)
        moved = False
        if gn > GRAD_FLOOR * (1.0 + np.linalg.norm(g)):
            while t >= step_tol:
                y = _normalize(x + (t / gn) * gt)
                vy, gy, gapy = f(y)
                if vy > val:
                    moved = True
                    break
                t *= 0.5
        if not moved and gap < DEGENERACY_GAP:
            best = None
            for _ in range(N_PROBES):
                d = _tangent(x, rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
                if np.linalg.norm(d) == 0:
                    continue
                y = _normalize(x + max(t, 1e-6) * d / np.linalg.norm(d))
                vy, gy, gapy = f(y)
                if vy > val and (best is None or vy > best[1]):
                    best = (y, vy, gy, gapy)
            if best is not None:
                y, vy, gy, gapy = best
                moved = True
                t = max(t, 1e-6)
        if not moved:
            return x, val, it, True
        gain = vy - val
        x, val, g, gap = y, vy, gy, gapy
        t = min(2.0 * t, 1.0)
        small = small + 1 if gain < value_tol else 0
        if small >= 3:
            return x, val, it, True
    return x, val, max_iters, False


def seed_points(n: int, cfg: OptimizerConfig, fixed: Sequence[np.ndarray] = ()) -> list[np.ndarray | None]:
    """Starting points: ``fixed`` seeds, then basis vectors, then random (``None``).

    At least half the restarts start from random points; the fixed seeds are
    always kept even when that exceeds ``cfg.restarts``.
    """
    n_det = cfg.restarts - math.ceil(cfg.restarts / 2)
    det = [np.asarray(s, dtype=complex) for s in fixed]
    basis = [np.eye(n, dtype=complex)[i] for i in range(n)]
    det = det + basis[:max(0, n_det - len(det))]
    n_rand = max(cfg.restarts - len(det), 0)
    return det + [None] * n_rand


def maximize(f: Objective, n: int, cfg: OptimizerConfig,
             fixed: Sequence[np.ndarray] = ()) -> SphereResult:
    """Best local maximum of ``f`` over unit vectors in C^n across all restarts."""
    seeds = seed_points(n, cfg, fixed)

    def run(i: int) -> RestartOutcome:
        rng = restart_rng(cfg.seed, i)
        x0 = seeds[i] if seeds[i] is not None else random_unit(n, rng)
        x, v, iters, conv = ascend(f, x0, rng, cfg.max_iters, cfg.step_tol, cfg.value_tol)
        return RestartOutcome(i, x, float(v), iters, conv)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(run, range(len(seeds))))
    else:
        outcomes = [run(i) for i in range(len(seeds))]
    best = outcomes[0]
    for o in outcomes[1:]:
        if o.value > best.value:
            best = o
    return SphereResult(best.x, best.value, best.index,
                        sum(o.converged for o in outcomes), outcomes)
