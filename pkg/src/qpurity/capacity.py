"""One-step classical capacity (Holevo chi maximized over input ensembles).

The general optimizer alternates between the ensemble probabilities, where
chi is concave and a Blahut-Arimoto style multiplicative update applies, and
the ensemble states, where each pure state takes projected gradient steps on
its sphere.  Values are in bits and are achieved (lower-bound) values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .channels import Channel, is_bistochastic
from .linalg import ValidationError
from .optimize import OptimizerConfig, random_unit, restart_rng
from .purity import nu_entropy

LOG_FLOOR = 1e-15
PRUNE = 1e-12
BA_ITERS = 500
BA_RTOL = 1e-10
STATE_STEPS = 5


@dataclass
class EnsembleState:
    probabilities: np.ndarray
    states: np.ndarray  # (m, d) rows are unit vectors

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float).reshape(-1)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if self.states.shape[0] != self.probabilities.size:
            raise ValidationError("ensemble needs one probability per state")
        if np.any(self.probabilities < 0) or abs(self.probabilities.sum() - 1) > linalg.TOL_TRACE:
            raise ValidationError("ensemble probabilities must be a distribution")
        if np.any(np.abs(np.linalg.norm(self.states, axis=1) - 1) > linalg.TOL_NORM):
            raise ValidationError("ensemble states must be unit vectors")

    @property
    def size(self) -> int:
        return self.probabilities.size

    def pruned(self, threshold: float = PRUNE) -> "EnsembleState":
        keep = self.probabilities > threshold
        p = self.probabilities[keep]
        return EnsembleState(p / p.sum(), self.states[keep])


@dataclass
class CapacityResult:
    value: float
    ensemble: EnsembleState
    upper_bound: float
    method: str
    converged_restarts: int = 0
    best_restart: int = 0


def _outputs(phi: Channel, states: np.ndarray) -> np.ndarray:
    b = np.einsum("kij,mj->mki", phi.kraus, states)
    return np.einsum("mki,mkj->mij", b, b.conj())


def _eig(s):
    w, v = np.linalg.eigh(0.5 * (s + np.swapaxes(s.conj(), -1, -2)))
    return np.clip(w, 0.0, 1.0), v


def _h(w) -> np.ndarray:
    w = np.asarray(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(w > 0, -w * np.log2(np.where(w > 0, w, 1.0)), 0.0)
    return t.sum(axis=-1)


def _chi(p, outs) -> float:
    avg = np.tensordot(p, outs, axes=1)
    return float(_h(_eig(avg)[0]) - p @ _h(_eig(outs)[0]))


def holevo_quantity(phi: Channel, ens: EnsembleState) -> float:
    """``H(sum p_i Phi(rho_i)) - sum p_i H(Phi(rho_i))`` in bits."""
    if ens.states.shape[1] != phi.dim_in:
        raise ValidationError(f"ensemble dimension {ens.states.shape[1]} does not match dim_in={phi.dim_in}")
    return max(_chi(ens.probabilities, _outputs(phi, ens.states)), 0.0)


def _logm(w, v):
    return (v * np.log2(np.maximum(w, LOG_FLOOR))[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def _ba_step(p: np.ndarray, outs: np.ndarray) -> np.ndarray:
    """Multiplicative reweighting ``p_i <- p_i exp(D(sigma_i || sigma))``."""
    wi, vi = _eig(outs)
    wa, va = _eig(np.tensordot(p, outs, axes=1))
    log_avg = _logm(wa, va)
    # D in bits: Tr s_i log s_i - Tr s_i log s
    d = -_h(wi) - np.real(np.einsum("mij,ji->m", outs, log_avg))
    q = p * np.exp2(d - np.max(d))
    return q / q.sum()


def _optimize_probabilities(p, outs):
    chi = _chi(p, outs)
    for _ in range(BA_ITERS):
        q = _ba_step(p, outs)
        new = _chi(q, outs)
        if new < chi:
            break
        p, rel = q, (new - chi) / max(abs(new), 1e-300)
        chi = new
        if rel < BA_RTOL:
            break
    return p, chi


def _state_gradient(phi: Channel, p, states, outs) -> np.ndarray:
    wi, vi = _eig(outs)
    wa, va = _eig(np.tensordot(p, outs, axes=1))
    g_ops = _logm(wi, vi) - _logm(wa, va)[None]
    adj = np.stack([phi.adjoint(g) for g in g_ops])
    return 2.0 * p[:, None] * np.einsum("mij,mj->mi", adj, states)


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _optimize_states(phi, p, states, chi, t, step_tol):
    """A few backtracking ascent steps on the product of spheres."""
    outs = _outputs(phi, states)
    for _ in range(STATE_STEPS):
        g = _state_gradient(phi, p, states, outs)
        g = g - np.sum(states.conj() * g, axis=1, keepdims=True) * states
        gn = np.linalg.norm(g)
        if gn < 1e-14:
            break
        moved = False
        while t >= step_tol:
            cand = _normalize_rows(states + (t / gn) * g)
            c_outs = _outputs(phi, cand)
            c_chi = _chi(p, c_outs)
            if c_chi > chi:
                moved = True
                break
            t *= 0.5
        if not moved:
            break
        states, outs, chi = cand, c_outs, c_chi
        t = min(2 * t, 1.0)
    return states, chi, t


def _run(phi: Channel, p, states, cfg: OptimizerConfig):
    t = 0.5
    p, chi = _optimize_probabilities(p, _outputs(phi, states))
    small = 0
    for it in range(cfg.max_iters):
        states, chi_s, t = _optimize_states(phi, p, states, chi, t, cfg.step_tol)
        p, chi_new = _optimize_probabilities(p, _outputs(phi, states))
        gain = chi_new - chi
        chi = chi_new
        small = small + 1 if gain < cfg.value_tol else 0
        if small >= 3:
            return p, states, chi, True
        t = max(t, 1e-3)
    return p, states, chi, False


def product_ensemble(*ens: EnsembleState) -> EnsembleState:
    p = np.ones(1)
    s = np.ones((1, 1), dtype=complex)
    for e in ens:
        p = np.kron(p, e.probabilities)
        s = np.einsum("ai,bj->abij", s, e.states).reshape(p.size, -1)
    return EnsembleState(p, s)


def capacity_upper_bound(phi: Channel, nuH: float) -> float:
    """``log2 dim_out - min output entropy``."""
    return math.log2(phi.dim_out) - float(nuH)


def capacity(phi: Channel, cfg: OptimizerConfig | None = None, ensemble_size: int | None = None,
             with_bound: bool = True) -> CapacityResult:
    """Maximize the Holevo quantity over ensembles of ``dim_in**2`` pure states.

    Product channels get an extra first restart from the product of the
    factor-optimal ensembles, so the result is never below the sum of the
    factor capacities (up to optimizer tolerance).
    """
    cfg = cfg or OptimizerConfig()
    d = phi.dim_in
    m = ensemble_size or d * d
    starts = []
    if phi.factors:
        fac = [capacity(f, cfg, with_bound=False).ensemble for f in phi.factors]
        prod = product_ensemble(*fac)
        starts.append((prod.probabilities, prod.states))
    best = None
    converged = 0
    for i in range(cfg.restarts + len(starts)):
        if i < len(starts):
            p0, s0 = starts[i]
        else:
            rng = restart_rng(cfg.seed, i)
            s0 = np.stack([random_unit(d, rng) for _ in range(m)])
            if i == len(starts) and m >= d:
                s0[:d] = np.eye(d)
            p0 = np.full(m, 1.0 / m)
        p, states, chi, conv = _run(phi, np.array(p0, dtype=float), np.array(s0, dtype=complex), cfg)
        converged += conv
        if best is None or chi > best[2]:
            best = (p, states, chi, i)
    p, states, chi, idx = best
    ens = EnsembleState(p / p.sum(), states).pruned()
    value = holevo_quantity(phi, ens)
    ub = capacity_upper_bound(phi, nu_entropy(phi, cfg).value) if with_bound else math.log2(phi.dim_out)
    return CapacityResult(value, ens, ub, "ensemble-opt", converged, idx)


def capacity_binary_bistochastic(phi: Channel, cfg: OptimizerConfig | None = None) -> CapacityResult:
    """``1 - min output entropy`` for a qubit channel with ``Phi(I) = I``.

    The witnessing ensemble is the entropy minimizer and its orthogonal
    complement, taken with equal probability.
    """
    if phi.dim_in != 2 or phi.dim_out != 2:
        raise ValidationError("binary bistochastic shortcut needs a qubit-to-qubit channel")
    if not is_bistochastic(phi):
        raise ValidationError("channel is not bistochastic")
    res = nu_entropy(phi, cfg)
    psi = res.argmax_state
    perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
    ens = EnsembleState([0.5, 0.5], np.stack([psi, perp]))
    value = 1.0 - res.value
    return CapacityResult(value, ens, value, "binary-bistochastic", res.converged_restarts, res.best_restart)
