"""Experiments on product channels, depolarizing closed forms and expansions.

Every experiment returns a report object whose ``rows()`` are flat dicts,
ready for the CSV/JSON writers in :mod:`qpurity.cli`.  Optimizer diagnostics
(converged restarts, best restart index) travel with the numbers so that an
apparent violation can be told apart from an optimizer failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import linalg
from .capacity import capacity, holevo_quantity, product_ensemble
from .channels import Channel, depolarizing, identity, is_bistochastic, mix, tensor_channel, weak_noise
from .linalg import ValidationError
from .optimize import OptimizerConfig
from .purity import Measure, PurityResult, nu_flat, nu_p, parse_measure, purity

TOL_GAP = 1e-6


def _diag(res: PurityResult) -> dict:
    return {"converged_restarts": res.converged_restarts, "restarts": res.restarts,
            "best_restart": res.best_restart}


@dataclass
class GapReport:
    measure: str
    joint_value: float
    product_value: float
    gap: float
    channels: tuple[str, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.gap >= -TOL_GAP

    def rows(self) -> list[dict]:
        return [{"measure": self.measure, "channel_a": self.channels[0], "channel_b": self.channels[1],
                 "joint_value": self.joint_value, "product_value": self.product_value, "gap": self.gap,
                 **{f"diag_{k}": v for k, v in self.diagnostics.items()}}]


@dataclass
class ExpansionReport:
    parameter: str
    grid: list[float]
    measured: list[float]
    predicted: list[float]
    residuals: list[float]
    fitted_order: float
    label: str = ""
    extra: dict = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        return [r / x if x else math.nan for r, x in zip(self.residuals, self.grid)]

    def rows(self) -> list[dict]:
        out = []
        for i, x in enumerate(self.grid):
            row = {"label": self.label, self.parameter: x, "measured": self.measured[i],
                   "predicted": self.predicted[i], "residual": self.residuals[i],
                   "ratio": self.ratios[i], "fitted_order": self.fitted_order}
            if i < len(self.diagnostics):
                row.update({f"diag_{k}": v for k, v in self.diagnostics[i].items()})
            out.append(row)
        return out


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log|y|`` against ``log x``; nan when any ``y`` is 0."""
    y = np.abs(np.asarray(ys, dtype=float))
    if len(xs) < 2 or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(y), 1)[0])


def _strictly_decreasing(xs: Sequence[float]) -> bool:
    return all(a > b for a, b in zip(xs, xs[1:]))


def _combine(measure: Measure, a: float, b: float) -> float:
    return a + b if measure.kind == "entropy" else a * b


def product_gap(phi1: Channel, phi2: Channel, measure: Measure | str,
                cfg: OptimizerConfig | None = None) -> GapReport:
    """Joint functional of ``phi1 (x) phi2`` against the product-state value.

    The gap is ``joint - product`` for maximized measures and
    ``product - joint`` for minimized ones, so the free inequality direction
    always reads ``gap >= 0``.
    """
    cfg = cfg or OptimizerConfig()
    measure = parse_measure(measure)
    joint_ch = tensor_channel(phi1, phi2)
    r1, r2 = purity(phi1, measure, cfg), purity(phi2, measure, cfg)
    rj = purity(joint_ch, measure, cfg)
    prod = _combine(measure, r1.value, r2.value)
    gap = rj.value - prod if measure.maximize else prod - rj.value
    return GapReport(str(measure), rj.value, prod, gap, (phi1.label, phi2.label),
                     {**_diag(rj), "factor_values": f"{r1.value:.12g};{r2.value:.12g}"})


# -- depolarizing channels ----------------------------------------------------

def depolarizing_formulas(dims: Sequence[int], ps: Sequence[float]) -> dict[str, float]:
    """Closed forms for products of depolarizing channels, keyed by measure."""
    d = np.asarray(dims, dtype=float)
    p = np.asarray(ps, dtype=float)
    return {
        "p=2": float(np.prod(np.sqrt((d - 1) / d * (1 - p) ** 2 + 1 / d))),
        "p=inf": float(np.prod(1 - p * (d - 1) / d)),
        "mininv": float(np.prod(p / d)),
    }


def depolarizing_channel(dims: Sequence[int], ps: Sequence[float]) -> Channel:
    if len(dims) != len(ps):
        raise ValidationError("need one depolarizing parameter per factor")
    parts = [depolarizing(d, p) for d, p in zip(dims, ps)]
    return parts[0] if len(parts) == 1 else tensor_channel(*parts)


def depolarizing_closed_forms(dims: Sequence[int], ps: Sequence[float],
                              cfg: OptimizerConfig | None = None) -> list[dict]:
    """Optimizer values next to the closed forms for ``nu_2``, ``nu_inf`` and ``nu_-inf``."""
    cfg = cfg or OptimizerConfig()
    dims = linalg.as_shape(dims)
    if int(np.prod(dims)) > linalg.MAX_DIM:
        raise ValidationError("product dimension exceeds max_dim")
    phi = depolarizing_channel(dims, ps)
    rows = []
    for m, closed in depolarizing_formulas(dims, ps).items():
        res = purity(phi, m, cfg)
        rows.append({"channel": phi.label, "measure": m, "closed_form": closed,
                     "optimizer_value": res.value, "deviation": res.value - closed,
                     **{f"diag_{k}": v for k, v in _diag(res).items()}})
    return rows


# -- weak noise ---------------------------------------------------------------

def _precise(cfg: OptimizerConfig | None) -> OptimizerConfig:
    cfg = cfg or OptimizerConfig()
    return replace(cfg, value_tol=min(cfg.value_tol, 1e-14), step_tol=min(cfg.step_tol, 1e-12))


def weaknoise_scan(base: Channel, eps_list: Sequence[float],
                   cfg: OptimizerConfig | None = None) -> ExpansionReport:
    """``nu_inf((1-eps) Id + eps base)`` against ``1 - eps + eps nu_flat(base)``."""
    cfg = _precise(cfg)
    eps_list = [float(e) for e in eps_list]
    if not _strictly_decreasing(eps_list) or any(not 0 < e <= 0.5 for e in eps_list):
        raise ValidationError("eps_list must be strictly decreasing inside (0, 1/2]")
    flat = nu_flat(base, cfg)
    measured, predicted, diags = [], [], []
    for e in eps_list:
        r = nu_p(weak_noise(base, e), math.inf, cfg)
        measured.append(r.value)
        predicted.append(1 - e + e * flat.value)
        diags.append(_diag(r))
    res = [m - p for m, p in zip(measured, predicted)]
    return ExpansionReport("eps", eps_list, measured, predicted, res, loglog_slope(eps_list, res),
                           label=base.label, extra={"nu_flat": flat.value}, diagnostics=diags)


def delta_channel(bases: Sequence[Channel]) -> Channel:
    """Average of ``Id (x) .. (x) base_k (x) .. (x) Id`` over the factors."""
    n = len(bases)
    terms = []
    for k in range(n):
        parts = [bases[j] if j == k else identity(bases[j].dim_in) for j in range(n)]
        terms.append((1.0 / n, parts[0] if n == 1 else tensor_channel(*parts)))
    return mix(terms, label="delta:" + ";".join(b.label for b in bases))


def weaknoise_product_check(bases: Sequence[Channel], eps_list: Sequence[float],
                            cfg: OptimizerConfig | None = None) -> ExpansionReport:
    """Leading order of ``nu_inf`` for a product of weak-noise channels.

    The prediction is ``1 - n eps + n eps mean_k nu_flat(base_k)``; ``extra``
    also carries ``nu_flat`` of the averaged channel next to the mean of the
    factor values.
    """
    cfg = _precise(cfg)
    n = len(bases)
    eps_list = [float(e) for e in eps_list]
    flats = [nu_flat(b, cfg).value for b in bases]
    mean_flat = float(np.mean(flats))
    delta_flat = nu_flat(delta_channel(bases), cfg).value
    measured, predicted, diags = [], [], []
    for e in eps_list:
        phi = tensor_channel(*[weak_noise(b, e) for b in bases]) if n > 1 else weak_noise(bases[0], e)
        r = nu_p(phi, math.inf, cfg)
        measured.append(r.value)
        predicted.append(1 - n * e + n * e * mean_flat)
        diags.append(_diag(r))
    res = [m - p for m, p in zip(measured, predicted)]
    return ExpansionReport("eps", eps_list, measured, predicted, res, loglog_slope(eps_list, res),
                           label="x".join(b.label for b in bases),
                           extra={"mean_nu_flat": mean_flat, "delta_nu_flat": delta_flat,
                                  "factor_nu_flat": flats}, diagnostics=diags)


# -- strong depolarization ----------------------------------------------------

def first_order_purity_term(psi: np.ndarray, dims: Sequence[int], qs: Sequence[float]) -> float:
    """``Tr A1^2 = d sum_i q_i^2 (d_i Tr rho_i^2 - 1)`` from the one-factor marginals."""
    dims = tuple(dims)
    d = int(np.prod(dims))
    rho = linalg.projector(psi)
    total = 0.0
    for i, (di, qi) in enumerate(zip(dims, qs)):
        ri = linalg.partial_trace(rho, dims, [i])
        total += qi**2 * (di * np.real(np.trace(ri @ ri)) - 1)
    return d * total


def first_order_operator(psi: np.ndarray, dims: Sequence[int], qs: Sequence[float]) -> np.ndarray:
    """``A1 = sum_i q_i (d_i P_i - I)`` with ``P_i`` the i-th marginal padded by identities."""
    dims = tuple(dims)
    d = int(np.prod(dims))
    rho = linalg.projector(psi)
    a1 = np.zeros((d, d), dtype=complex)
    for i, (di, qi) in enumerate(zip(dims, qs)):
        ri = linalg.partial_trace(rho, dims, [i])
        ops = [ri if j == i else np.eye(dj) for j, dj in enumerate(dims)]
        pi = ops[0] if len(ops) == 1 else linalg.tensor(*ops)
        a1 += qi * (di * pi - np.eye(d))
    return a1


def predicted_entropy(trace_a1_sq: float, d: int) -> float:
    """``log2 d - Tr A1^2 / (2 d ln 2)``."""
    return math.log2(d) - trace_a1_sq / (2 * d * math.log(2))


def maximally_entangled(d: int) -> np.ndarray:
    return np.eye(d).reshape(-1) / np.sqrt(d)


def strong_depolarization_check(dims: Sequence[int], q_list: Sequence[float], trials: int = 50,
                                seed: int = 42) -> ExpansionReport:
    """Exact output entropy of near-complete depolarization against its second-order expansion.

    Each ``q`` is applied to every factor (``p_i = 1 - q``).  Probes: a fixed
    random pure product state, the maximally entangled state (two equal
    factors only) and ``trials`` Haar-random states.  ``measured`` and
    ``predicted`` refer to the product probe; ``extra`` holds per-probe slopes
    and the product-versus-entangled entropy comparison.
    """
    dims = linalg.as_shape(dims)
    d = int(np.prod(dims))
    q_list = [float(q) for q in q_list]
    if not _strictly_decreasing(q_list) or any(not 0 <= q <= 0.1 for q in q_list):
        raise ValidationError("q_list must be strictly decreasing inside [0, 0.1]")
    rng = np.random.default_rng(seed)
    probes = {"product": linalg.tensor_vec(*[linalg.random_pure(di, rng) for di in dims])}
    if len(dims) == 2 and dims[0] == dims[1]:
        probes["max_entangled"] = maximally_entangled(dims[0])
    for t in range(trials):
        probes[f"haar{t}"] = linalg.random_pure(d, rng)

    residuals = {k: [] for k in probes}
    entropies = {k: [] for k in probes}
    measured, predicted = [], []
    for q in q_list:
        phi = depolarizing_channel(dims, [1 - q] * len(dims))
        for k, psi in probes.items():
            h = linalg.entropy(phi.apply_pure(psi))
            pred = predicted_entropy(first_order_purity_term(psi, dims, [q] * len(dims)), d)
            entropies[k].append(h)
            residuals[k].append(h - pred)
            if k == "product":
                measured.append(h)
                predicted.append(pred)
    slopes = {k: loglog_slope(q_list, r) for k, r in residuals.items()}
    haar_min = [min(entropies[k][i] for k in probes if k.startswith("haar")) if trials else math.inf
                for i in range(len(q_list))]
    extra = {
        "slopes": slopes,
        "min_slope": min((s for s in slopes.values() if not math.isnan(s)), default=math.nan),
        "product_entropy": entropies["product"],
        "entangled_entropy": entropies.get("max_entangled", []),
        "haar_min_entropy": haar_min,
        "product_below_entangled": all(
            entropies["product"][i] < entropies["max_entangled"][i] for i in range(len(q_list))
        ) if "max_entangled" in probes else None,
        "product_below_haar": all(entropies["product"][i] <= haar_min[i] for i in range(len(q_list))),
    }
    return ExpansionReport("q", q_list, measured, predicted, residuals["product"], slopes["product"],
                           label="depolarizing:" + "x".join(map(str, dims)), extra=extra)


# -- p -> 1 limit -------------------------------------------------------------

def renyi_slope(nu: float, p: float) -> float:
    """``(1 - nu^p) / (p - 1)`` converted from nats to bits."""
    return (1.0 - nu**p) / (p - 1.0) / math.log(2)


def pnorm_limit_scan(phi: Channel, p_list: Sequence[float],
                     cfg: OptimizerConfig | None = None) -> ExpansionReport:
    """``s(p) = (1 - nu_p^p)/(p - 1)`` in bits as ``p`` decreases to 1, against ``nu_H``."""
    cfg = _precise(cfg)
    p_list = [float(p) for p in p_list]
    if not _strictly_decreasing(p_list) or any(p <= 1 for p in p_list):
        raise ValidationError("p_list must be strictly decreasing and > 1")
    nh = purity(phi, "entropy", cfg)
    measured, diags = [], []
    for p in p_list:
        r = nu_p(phi, p, cfg)
        measured.append(renyi_slope(r.value, p))
        diags.append(_diag(r))
    res = [nh.value - s for s in measured]
    monotone = all(b >= a - 1e-12 for a, b in zip(measured, measured[1:]))
    return ExpansionReport("p", p_list, measured, [nh.value] * len(p_list), res,
                           loglog_slope([p - 1 for p in p_list], res), label=phi.label,
                           extra={"nu_entropy": nh.value, "monotone": monotone}, diagnostics=diags)


# -- capacity additivity ------------------------------------------------------

def capacity_additivity_check(phi1: Channel, phi2: Channel,
                              cfg: OptimizerConfig | None = None) -> GapReport:
    """Sandwich ``C(phi1 (x) phi2)`` between a product ensemble and the entropy bound.

    Lower: chi of the product of the factor-optimal ensembles on the joint
    channel.  Upper: ``log2 d - nu_H(phi1 (x) phi2)``, which is tight for
    binary bistochastic factors.  ``gap`` is the sandwich width.
    """
    cfg = cfg or OptimizerConfig()
    joint = tensor_channel(phi1, phi2)
    c1, c2 = capacity(phi1, cfg, with_bound=False), capacity(phi2, cfg, with_bound=False)
    lower = holevo_quantity(joint, product_ensemble(c1.ensemble, c2.ensemble))
    nh = purity(joint, "entropy", cfg)
    upper = math.log2(joint.dim_out) - nh.value
    binary = all(f.dim_in == f.dim_out == 2 and is_bistochastic(f) for f in (phi1, phi2))
    return GapReport("capacity", upper, lower, upper - lower, (phi1.label, phi2.label),
                     {**_diag(nh), "capacity_a": c1.value, "capacity_b": c2.value,
                      "binary_bistochastic": binary})
