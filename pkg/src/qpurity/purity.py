"""Output-purity functionals of a channel.

All functionals are extremized over pure inputs, which is where the extrema
of these convex/concave objectives live:

========  =====================================  ========
measure   value                                  extremum
========  =====================================  ========
p=<x>     ``max ||Phi(psi)||_p``                 max
entropy   ``min H(Phi(psi))`` (bits)             min
mininv    ``min lambda_min(Phi(psi))``           min
flat      ``max <psi, Phi(psi) psi>``            max
========  =====================================  ========

``mininv`` is the smallest output eigenvalue, the continuous extension of
``||Phi(rho)^-1||^-1`` to singular outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .channels import Channel
from .linalg import ValidationError
from .optimize import OptimizerConfig, SphereResult, maximize

ENTROPY_FLOOR = 1e-15


@dataclass(frozen=True)
class Measure:
    kind: str  # "pnorm" | "entropy" | "mininv" | "flat"
    p: float = math.nan

    @property
    def maximize(self) -> bool:
        return self.kind in ("pnorm", "flat")

    def __str__(self) -> str:
        if self.kind == "pnorm":
            return "p=inf" if math.isinf(self.p) else f"p={self.p:g}"
        return self.kind


def parse_measure(text: str | Measure) -> Measure:
    """Parse ``p=<x>``, ``p=inf``, ``entropy``, ``mininv`` or ``flat``."""
    if isinstance(text, Measure):
        return text
    t = str(text).strip().lower()
    if t in ("entropy", "mininv", "flat"):
        return Measure(t)
    if t.startswith("p="):
        try:
            p = float(t[2:])
        except ValueError:
            raise ValidationError(f"bad p-norm measure {text!r}") from None
        if not p > 1:
            raise ValidationError(f"p-norm measure needs p > 1, got {p}")
        return Measure("pnorm", p)
    raise ValidationError(f"unknown measure {text!r} (expected p=<x>, p=inf, entropy, mininv, flat)")


@dataclass
class PurityResult:
    value: float
    argmax_state: np.ndarray
    measure: str
    converged_restarts: int
    restarts: int = 0
    best_restart: int = 0
    coefficients: np.ndarray | None = field(default=None, repr=False)


# -- objective values ---------------------------------------------------------

def output_value(sigma: np.ndarray, measure: Measure) -> float:
    w = np.linalg.eigvalsh(0.5 * (sigma + sigma.conj().T))
    if measure.kind == "pnorm":
        return linalg.spectrum_pnorm(np.clip(w, 0, None), measure.p)
    if measure.kind == "entropy":
        return linalg.spectrum_entropy(np.clip(w, 0, 1))
    if measure.kind == "mininv":
        return float(max(w[0], 0.0))
    raise ValidationError(f"{measure} is not a function of the output alone")


def state_value(phi: Channel, measure: Measure | str, psi: np.ndarray) -> float:
    """The functional's objective evaluated at one pure input."""
    measure = parse_measure(measure)
    psi = np.asarray(psi, dtype=complex)
    if measure.kind == "flat":
        return float(np.real(np.vdot(psi, phi.apply_pure(psi) @ psi)))
    return output_value(phi.apply_pure(psi), measure)


def objective(phi: Channel, measure: Measure):
    """Ascent objective ``psi -> (value, grad, gap)``; minimized measures are negated.

    For a spectral objective ``F(sigma)`` with derivative ``G`` the gradient
    is ``2 Phi^*(G) psi``.
    """
    k = phi.kraus
    kd = k.conj().transpose(0, 2, 1)

    if measure.kind == "flat":
        def f(psi):
            b = k @ psi                       # A_k psi
            c = b @ psi.conj()                # <psi, A_k psi>
            val = float(np.sum(np.abs(c) ** 2))
            g = 2.0 * (np.conj(c) @ b + c @ (kd @ psi))
            return val, g, math.inf
        return f

    def f(psi):
        b = k @ psi
        sigma = b.T @ b.conj()
        w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
        if measure.kind == "pnorm":
            w = np.clip(w, 0.0, None)
            if math.isinf(measure.p):
                val = float(w[-1])
                top = v[:, -1]
                # Phi^*(|v><v|) psi = sum_k A_k^dag v <v, A_k psi>
                g = 2.0 * ((kd @ top).T @ (top.conj() @ b.T))
                gap = float(w[-1] - w[-2]) if w.size > 1 else math.inf
                return val, g, gap
            p = measure.p
            val = linalg.spectrum_pnorm(w, p)
            gm = (v * (w ** (p - 1) * val ** (1 - p))) @ v.conj().T
            return val, 2.0 * (phi.adjoint(gm) @ psi), math.inf
        if measure.kind == "entropy":
            wc = np.clip(w, 0.0, 1.0)
            val = -linalg.spectrum_entropy(wc)
            gm = (v * np.log2(np.maximum(wc, ENTROPY_FLOOR))) @ v.conj().T
            return val, 2.0 * (phi.adjoint(gm) @ psi), math.inf
        if measure.kind == "mininv":
            val = -float(max(w[0], 0.0))
            low = v[:, 0]
            g = -2.0 * ((kd @ low).T @ (low.conj() @ b.T))
            gap = float(w[1] - w[0]) if w.size > 1 else math.inf
            return val, g, gap
        raise ValidationError(f"unsupported measure {measure}")

    return f


# -- functionals --------------------------------------------------------------

def _factor_seeds(phi: Channel, measure: Measure, cfg: OptimizerConfig) -> list[np.ndarray]:
    """Tensor product of factor-optimal states, when ``phi`` is a product channel."""
    if not phi.factors:
        return []
    states = [purity(f, measure, cfg).argmax_state for f in phi.factors]
    return [linalg.tensor_vec(*states)]


def _wrap(res: SphereResult, measure: Measure, sign: float) -> PurityResult:
    return PurityResult(value=sign * res.value, argmax_state=res.x, measure=str(measure),
                        converged_restarts=res.converged_restarts,
                        restarts=len(res.restarts), best_restart=res.best_restart)


def purity(phi: Channel, measure: Measure | str, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Extremize ``measure`` over pure inputs of ``phi`` by multi-start sphere ascent."""
    cfg = cfg or OptimizerConfig()
    measure = parse_measure(measure)
    if measure.kind == "flat" and phi.dim_in != phi.dim_out:
        raise ValidationError("flat fidelity needs equal input and output dimensions")
    seeds = _factor_seeds(phi, measure, cfg)
    res = maximize(objective(phi, measure), phi.dim_in, cfg, fixed=seeds)
    return _wrap(res, measure, 1.0 if measure.maximize else -1.0)


def nu_p(phi: Channel, p: float, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Maximal output p-norm; ``p`` in (1, inf]."""
    p = float(p)
    if not p > 1:
        raise ValidationError(f"nu_p needs p > 1 (p = 1 is identically 1), got {p}")
    return purity(phi, Measure("pnorm", p), cfg)


def nu_entropy(phi: Channel, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Minimal output entropy in bits."""
    return purity(phi, Measure("entropy"), cfg)


def nu_minus_inf(phi: Channel, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Minimal smallest output eigenvalue."""
    return purity(phi, Measure("mininv"), cfg)


def nu_flat(phi: Channel, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Maximal diagonal fidelity ``<psi, Phi(|psi><psi|) psi>``."""
    return purity(phi, Measure("flat"), cfg)


def kraus_objective(phi: Channel):
    """``chi -> ||sum_k chi_k A_k||_inf^2`` on the sphere of C^K, with gradient."""
    k = phi.kraus

    def f(chi):
        m = np.tensordot(chi, k, axes=1)
        u, s, vh = np.linalg.svd(m)
        top = float(s[0])
        # d s = Re(u^dag dM v)
        a = np.einsum("i,kij,j->k", u[:, 0].conj(), k, vh[0].conj())
        gap = float(s[0] - s[1]) if s.size > 1 else math.inf
        return top**2, 2.0 * top * np.conj(a), gap

    return f


def nu_inf_kraus(phi: Channel, cfg: OptimizerConfig | None = None) -> PurityResult:
    """Maximal output operator norm via ``sup_chi ||sum_k chi_k A_k||^2``.

    The optimization runs over unit coefficient vectors ``chi`` (stored in
    ``coefficients``); ``argmax_state`` is the top right singular vector of
    the optimal combination, an input attaining the value.
    """
    cfg = cfg or OptimizerConfig()
    res = maximize(kraus_objective(phi), phi.rank, cfg)
    m = np.tensordot(res.x, phi.kraus, axes=1)
    _, _, vh = np.linalg.svd(m)
    out = _wrap(res, Measure("pnorm", math.inf), 1.0)
    out.argmax_state = vh[0].conj()
    out.coefficients = res.x
    return out


def bloch_grid(resolution: int) -> np.ndarray:
    """Qubit states ``(cos t/2, e^{i f} sin t/2)`` on a resolution x resolution grid."""
    theta = np.linspace(0.0, np.pi, resolution)
    phase = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    t, f = np.meshgrid(theta, phase, indexing="ij")
    return np.stack([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)], axis=-1).reshape(-1, 2)


def grid_oracle(phi: Channel, measure: Measure | str, resolution: int = 200) -> float:
    """Brute-force extremum over a Bloch-sphere grid (qubit inputs only)."""
    measure = parse_measure(measure)
    if phi.dim_in != 2:
        raise ValidationError("grid oracle is defined for qubit inputs only")
    psis = bloch_grid(resolution)
    b = np.einsum("kij,nj->nki", phi.kraus, psis)
    sigma = np.einsum("nki,nkj->nij", b, b.conj())
    if measure.kind == "flat":
        vals = np.real(np.einsum("ni,nij,nj->n", psis.conj(), sigma, psis))
    else:
        w = np.linalg.eigvalsh(sigma)
        if measure.kind == "pnorm":
            w = np.clip(w, 0.0, None)
            vals = w[:, -1] if math.isinf(measure.p) else np.sum(w ** measure.p, axis=1) ** (1 / measure.p)
        elif measure.kind == "entropy":
            w = np.clip(w, 0.0, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = -np.sum(np.where(w > 0, w * np.log2(np.where(w > 0, w, 1.0)), 0.0), axis=1)
        else:
            vals = np.clip(w[:, 0], 0.0, None)
    return float(vals.max() if measure.maximize else vals.min())
