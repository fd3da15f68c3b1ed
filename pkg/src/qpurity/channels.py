"""Quantum channels in Kraus form.

A :class:`Channel` holds a stack of Kraus operators ``A_k`` of shape
``(K, dim_out, dim_in)`` and acts as ``rho -> sum_k A_k rho A_k^dagger``.
Construction validates trace preservation and complete positivity, and the
object is treated as immutable afterwards.

Tensor-factor indices (``keep`` sets, subsets ``L``) are 0-based throughout.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .linalg import MAX_DIM, TOL_PSD, TOL_TRACE, ValidationError, as_density, as_matrix, as_shape

TOL_TP = 1e-9


class ChannelError(ValidationError):
    """A Kraus family fails trace preservation ("TP") or complete positivity ("CP")."""

    def __init__(self, invariant: str, magnitude: float, message: str = ""):
        self.invariant = invariant
        self.magnitude = float(magnitude)
        super().__init__(message or f"{invariant} violation of magnitude {magnitude:.3g}")


@dataclass(frozen=True, eq=False)
class Channel:
    kraus: np.ndarray
    label: str = ""
    # factor channels when built as a tensor product; used to seed optimizers
    factors: tuple["Channel", ...] = field(default=(), repr=False)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def rank(self) -> int:
        return self.kraus.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        """Input factor dimensions (a 1-tuple for non-product channels)."""
        if self.factors:
            return tuple(d for f in self.factors for d in f.shape)
        return (self.dim_in,)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        k = self.kraus
        return np.einsum("kij,jl,kml->im", k, rho, k.conj(), optimize=True)

    def apply_pure(self, psi: np.ndarray) -> np.ndarray:
        """Output for the pure input ``|psi><psi|``, as ``B B^dagger`` with ``B = [A_k psi]``."""
        b = self.kraus @ psi  # (K, dim_out)
        return b.T @ b.conj()

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """Heisenberg-picture map ``G -> sum_k A_k^dagger G A_k``."""
        k = self.kraus
        return np.einsum("kji,jl,klm->im", k.conj(), g, k, optimize=True)

    def __repr__(self) -> str:
        return f"Channel({self.label or '?'}, dim_in={self.dim_in}, dim_out={self.dim_out}, rank={self.rank})"


def _stack(kraus) -> np.ndarray:
    if isinstance(kraus, np.ndarray) and kraus.ndim == 3:
        ops = [as_matrix(k) for k in kraus]
    else:
        ops = [as_matrix(k) for k in kraus]
    if not ops:
        raise ValidationError("a channel needs at least one Kraus operator")
    shape = ops[0].shape
    for i, a in enumerate(ops):
        if a.shape != shape:
            raise ValidationError(f"Kraus operator {i} has shape {a.shape}, expected {shape}")
    return np.stack(ops)


def choi(phi: Channel) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)`` (input factor first)."""
    k = phi.kraus
    # element ((i,a),(j,b)) = sum_k A_k[a,i] conj(A_k[b,j])
    c = np.einsum("kai,kbj->iajb", k, k.conj())
    n = phi.dim_in * phi.dim_out
    return c.reshape(n, n)


def tp_error(kraus: np.ndarray) -> float:
    s = np.einsum("kji,kjl->il", kraus.conj(), kraus)
    return float(np.max(np.abs(s - np.eye(kraus.shape[2]))))


def make_channel(kraus, label: str = "", tol_tp: float = TOL_TP, tol_psd: float = TOL_PSD,
                 factors: tuple[Channel, ...] = ()) -> Channel:
    """Build a validated channel from a list (or stack) of Kraus operators.

    Raises :class:`ChannelError` naming the failed invariant when the
    completeness relation or the Choi positivity check fails.
    """
    k = _stack(kraus)
    if max(k.shape[1], k.shape[2]) > MAX_DIM:
        raise ValidationError(f"channel dimension exceeds max_dim={MAX_DIM}")
    err = tp_error(k)
    if err > tol_tp:
        raise ChannelError("TP", err, f"trace preservation fails: |sum A^dag A - I| = {err:.3g}")
    phi = Channel(k, label, tuple(factors))
    # Kraus sums are CP by construction; the Choi check guards numerical garbage
    if k.shape[1] * k.shape[2] <= 256:
        lmin = np.linalg.eigvalsh(choi(phi))[0]
        if lmin < -tol_psd:
            raise ChannelError("CP", -lmin, f"Choi matrix has eigenvalue {lmin:.3g}")
    return phi


def apply(phi: Channel, rho) -> np.ndarray:
    """Validated channel action on a density matrix."""
    rho = as_density(rho)
    if rho.shape[0] != phi.dim_in:
        raise ValidationError(f"input dimension {rho.shape[0]} does not match channel dim_in={phi.dim_in}")
    return phi(rho)


def identity(d: int) -> Channel:
    return make_channel([np.eye(d)], label=f"identity:d={d}")


def weyl_operators(d: int) -> list[np.ndarray]:
    """The d^2 shift-clock unitaries ``X^a Z^b``, identity first."""
    omega = np.exp(2j * np.pi / d)
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
            for a in range(d) for b in range(d)]


def depolarizing(d: int, p: float) -> Channel:
    """``rho -> (1-p) rho + p Tr(rho) I/d`` realised with Weyl-operator Kraus terms."""
    if d < 2:
        raise ValidationError(f"depolarizing channel needs d >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"depolarizing parameter must lie in [0, 1], got {p}")
    ops = weyl_operators(d)
    w = np.full(d * d, p / d**2)
    w[0] += 1.0 - p
    kraus = [np.sqrt(wi) * u for wi, u in zip(w, ops) if wi > 0]
    return make_channel(kraus, label=f"depolarizing:d={d},p={p:g}")


def amplitude_damping(gamma: float) -> Channel:
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"damping must lie in [0, 1], got {gamma}")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return make_channel([a0, a1], label=f"amplitude-damping:gamma={gamma:g}")


def random_channel(d_in: int, rng: np.random.Generator, rank: int = 2, d_out: int | None = None) -> Channel:
    """Channel from a Haar-random isometry ``C^d_in -> C^rank (x) C^d_out``."""
    d_out = d_in if d_out is None else d_out
    n = rank * d_out
    z = rng.standard_normal((n, d_in)) + 1j * rng.standard_normal((n, d_in))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return make_channel(q.reshape(rank, d_out, d_in), label=f"random:d={d_in},rank={rank}")


def weak_noise(phi: Channel, eps: float) -> Channel:
    """``(1-eps) Id + eps phi`` with Kraus family ``{sqrt(1-eps) I} + {sqrt(eps) A_k}``."""
    if phi.dim_in != phi.dim_out:
        raise ValidationError("weak-noise channel needs a square base channel")
    if not 0.0 <= eps <= 1.0:
        raise ValidationError(f"eps must lie in [0, 1], got {eps}")
    ops = []
    if eps < 1.0:
        ops.append(np.sqrt(1.0 - eps) * np.eye(phi.dim_in))
    if eps > 0.0:
        ops.extend(np.sqrt(eps) * phi.kraus)
    return make_channel(ops, label=f"weaknoise:base={phi.label},eps={eps:g}")


def _as_factor_list(phi: Channel) -> tuple[Channel, ...]:
    return phi.factors if phi.factors else (phi,)


def tensor_channel(a: Channel, b: Channel, *more: Channel) -> Channel:
    """Tensor product with Kraus family ``{A_i (x) B_j}``."""
    out = a
    for c in (b, *more):
        dim_in, dim_out = out.dim_in * c.dim_in, out.dim_out * c.dim_out
        if max(dim_in, dim_out) > MAX_DIM:
            raise ValidationError(f"tensor dimension {max(dim_in, dim_out)} exceeds max_dim={MAX_DIM}")
        k = np.einsum("aij,bkl->abikjl", out.kraus, c.kraus)
        k = k.reshape(out.rank * c.rank, dim_out, dim_in)
        out = make_channel(k, label=f"tensor:{out.label};{c.label}",
                           factors=_as_factor_list(out) + _as_factor_list(c))
    return out


def _subset(L: Iterable[int], n: int) -> frozenset[int]:
    s = frozenset(int(i) for i in L)
    if any(i < 0 or i >= n for i in s):
        raise ValidationError(f"subset {sorted(s)} out of range for {n} factors")
    return s


def conditional_expectation(dims: Sequence[int], L: Iterable[int]) -> Channel:
    """Completely depolarize the factors in ``L``, identity on the rest."""
    dims = as_shape(dims)
    s = _subset(L, len(dims))
    parts = [depolarizing(d, 1.0) if i in s else identity(d) for i, d in enumerate(dims)]
    phi = parts[0] if len(parts) == 1 else tensor_channel(*parts)
    label = "cond-exp:dims=" + "x".join(map(str, dims)) + ",L={" + ",".join(map(str, sorted(s))) + "}"
    return Channel(phi.kraus, label, phi.factors)


@dataclass(frozen=True, eq=False)
class ChannelMixture:
    terms: tuple[tuple[float, Channel], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("empty channel mixture")
        w = np.array([t[0] for t in self.terms], dtype=float)
        if np.any(w < 0):
            raise ValidationError("mixture weights must be nonnegative")
        if abs(w.sum() - 1.0) > TOL_TRACE:
            raise ValidationError(f"mixture weights sum to {w.sum()!r}, not 1")
        d0 = (self.terms[0][1].dim_in, self.terms[0][1].dim_out)
        for _, c in self.terms:
            if (c.dim_in, c.dim_out) != d0:
                raise ValidationError("mixture terms have mismatched dimensions")

    @property
    def weights(self) -> np.ndarray:
        return np.array([t[0] for t in self.terms])

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(w * c(rho) for w, c in self.terms)


def mix(mixture: ChannelMixture | Sequence[tuple[float, Channel]], label: str = "") -> Channel:
    """Convex combination as one channel with Kraus family ``{sqrt(w_t) A_k^(t)}``."""
    if not isinstance(mixture, ChannelMixture):
        mixture = ChannelMixture(tuple((float(w), c) for w, c in mixture))
    ops = [np.sqrt(w) * c.kraus for w, c in mixture.terms if w > 0]
    if not label:
        label = "mix:" + ";".join(f"{w:g}*{c.label}" for w, c in mixture.terms)
    return make_channel(np.concatenate(ops), label=label)


def depolarizing_expansion(dims: Sequence[int], ps: Sequence[float]) -> ChannelMixture:
    """Product depolarizing channel as a mixture of conditional expectations.

    The weight of subset ``L`` is ``prod_{i in L} p_i prod_{i not in L} (1 - p_i)``;
    terms are ordered by the bitmask of ``L`` (factor 0 is the lowest bit).
    """
    dims = as_shape(dims)
    if len(ps) != len(dims):
        raise ValidationError("need one depolarizing parameter per factor")
    ps = [float(p) for p in ps]
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise ValidationError(f"depolarizing parameters must lie in [0, 1], got {ps}")
    n = len(dims)
    terms = []
    for mask in range(2**n):
        L = [i for i in range(n) if mask >> i & 1]
        w = float(np.prod([ps[i] if i in L else 1.0 - ps[i] for i in range(n)]))
        terms.append((w, conditional_expectation(dims, L)))
    return ChannelMixture(tuple(terms))


def complementary(phi: Channel) -> Channel:
    """Channel into the environment: ``[Psi(rho)]_kl = Tr(A_k rho A_l^dagger)``.

    Its Kraus operators are ``R_j[k, :] = A_k[j, :]``.
    """
    r = np.transpose(phi.kraus, (1, 0, 2))  # (dim_out, K, dim_in)
    return make_channel(r, label=f"complementary:{phi.label}")


def is_bistochastic(phi: Channel, tol: float = TOL_TP) -> bool:
    if phi.dim_in != phi.dim_out:
        raise ValidationError("bistochasticity needs a square channel")
    out = phi(np.eye(phi.dim_in, dtype=complex))
    return bool(np.linalg.norm(out - np.eye(phi.dim_in), 2) <= tol)


def subset_lattice(n: int) -> list[frozenset[int]]:
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]


# -- channel files ------------------------------------------------------------

def channel_to_dict(phi: Channel) -> dict:
    return {
        "name": phi.label,
        "dim_in": phi.dim_in,
        "dim_out": phi.dim_out,
        "kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in phi.kraus],
    }


def channel_from_dict(obj: dict) -> Channel:
    """Inverse of :func:`channel_to_dict`; the declared dims must match the arrays."""
    try:
        ops = [np.asarray(k["re"], dtype=float) + 1j * np.asarray(k.get("im", 0.0), dtype=float)
               for k in obj["kraus"]]
        dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed channel object: {e}") from e
    for i, a in enumerate(ops):
        if a.shape != (dim_out, dim_in):
            raise ValidationError(f"Kraus operator {i} has shape {a.shape}, declared {(dim_out, dim_in)}")
    return make_channel(ops, label=str(obj.get("name", "")))


def save_channel(phi: Channel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(phi), indent=1))


def load_channel(path: str | Path) -> Channel:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}") from e
    return channel_from_dict(obj)
