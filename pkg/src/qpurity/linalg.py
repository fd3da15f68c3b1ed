"""Dense complex-matrix substrate.

Matrices are plain ``numpy`` arrays.  Density matrices and pure states are
validated on entry by :func:`as_density` and :func:`as_pure`; everything else
is a pure function of its inputs.  Entropies are in bits.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-9
TOL_TRACE = 1e-9
TOL_PSD = 1e-8
TOL_EIG = 1e-10
TOL_NORM = 1e-9
MAX_DIM = 4096


class ValidationError(ValueError):
    """An input violates a structural invariant (shape, Hermiticity, trace...)."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def as_density(rho, tol_herm: float = TOL_HERM, tol_psd: float = TOL_PSD,
               tol_trace: float = TOL_TRACE) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    a = as_matrix(rho)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"density matrix must be square, got {a.shape}")
    herm_err = np.max(np.abs(a - a.conj().T))
    if herm_err > tol_herm:
        raise ValidationError(f"not Hermitian (deviation {herm_err:.3g})")
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol_trace:
        raise ValidationError(f"trace {tr!r} differs from 1")
    lmin = np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0]
    if lmin < -tol_psd:
        raise ValidationError(f"not positive semidefinite (min eigenvalue {lmin:.3g})")
    return a


def as_pure(psi, tol_norm: float = TOL_NORM) -> np.ndarray:
    """Validate ``psi`` as a unit vector and return it as a 1-D complex array."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.size < 1 or not np.all(np.isfinite(v)):
        raise ValidationError("pure state must be a finite non-empty vector")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol_norm:
        raise ValidationError(f"pure state norm {n!r} differs from 1")
    return v


def as_shape(dims: Iterable[int], total: int | None = None) -> tuple[int, ...]:
    """Validate a factor shape: every factor at least 2, product matching ``total``."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise ValidationError(f"factor dimensions must all be >= 2, got {dims}")
    if total is not None and int(np.prod(dims)) != total:
        raise ValidationError(f"factor dims {dims} do not multiply to {total}")
    return dims


def projector(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def tensor(a, b, *more, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product, folded left to right over any number of factors."""
    out = as_matrix(a)
    for m in (b, *more):
        m = as_matrix(m)
        rows, cols = out.shape[0] * m.shape[0], out.shape[1] * m.shape[1]
        if max(rows, cols) > max_dim:
            raise ValidationError(f"tensor dimension {max(rows, cols)} exceeds max_dim={max_dim}")
        out = np.kron(out, m)
    return out


def tensor_vec(*vecs) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, np.asarray(v, dtype=complex).reshape(-1))
    return out


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``keep`` holds 0-based factor indices; the result acts on the kept factors
    in their original order.
    """
    a = as_matrix(m)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    d = int(np.prod(dims))
    if a.shape != (d, d):
        raise ValidationError(f"matrix shape {a.shape} does not match factor dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} factors")
    t = a.reshape(dims + dims)
    # trace out from the highest index so remaining axis numbers stay valid
    for k in reversed(range(n)):
        if k in keep:
            continue
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nk)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def eig_hermitian(m, tol_herm: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``m = v @ diag(w) @ v^dagger``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got {a.shape}")
    herm_err = np.max(np.abs(a - a.conj().T))
    if herm_err > tol_herm * max(1.0, np.max(np.abs(a))):
        raise ValidationError(f"not Hermitian (deviation {herm_err:.3g})")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w[::-1], v[:, ::-1]


def _clamped_spectrum(rho) -> np.ndarray:
    a = np.asarray(rho, dtype=complex)
    w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return np.clip(w, 0.0, 1.0)


def spectrum_entropy(w) -> float:
    """Shannon entropy in bits of a probability vector, with 0 log 0 = 0."""
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w))) + 0.0


def entropy(rho) -> float:
    """Von Neumann entropy in bits.

    Eigenvalues are clamped to [0, 1] before taking logs, so PSD jitter of
    order 1e-8 does not produce NaNs.
    """
    return spectrum_entropy(_clamped_spectrum(rho))


def schatten_norm(m, p: float) -> float:
    """Schatten p-norm for ``p`` in [1, inf].

    Hermitian positive semidefinite inputs use eigenvalues; anything else goes
    through singular values.
    """
    p = float(p)
    if not p >= 1:
        raise ValidationError(f"Schatten norm needs p >= 1, got {p}")
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got {a.shape}")
    s = None
    if np.allclose(a, a.conj().T, atol=TOL_HERM, rtol=0):
        w = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
        if w[0] >= -TOL_PSD:
            s = np.clip(w, 0.0, None)
    if s is None:
        s = np.linalg.svd(a, compute_uv=False)
    return spectrum_pnorm(s, p)


def spectrum_pnorm(s, p: float) -> float:
    s = np.abs(np.asarray(s, dtype=float))
    if np.isinf(p):
        return float(np.max(s))
    top = np.max(s)
    if top == 0:
        return 0.0
    # scale to avoid under/overflow for large p
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def min_eigenvalue(rho) -> float:
    """Smallest eigenvalue, clamped at zero."""
    return float(max(np.linalg.eigvalsh(0.5 * (np.asarray(rho) + np.asarray(rho).conj().T))[0], 0.0))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    r = g @ g.conj().T
    return r / np.trace(r).real


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
