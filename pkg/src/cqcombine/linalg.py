"""Dense complex-Hermitian matrix core for small dimensions (d <= 64).

Matrices are plain ``numpy.ndarray`` objects of complex dtype.  A density
matrix is any such array passing :func:`density_matrix`; all functionals
return entropies in nats.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidState, NoConvergence, NotHermitian

TAU_HERM = 1e-10
TAU_PSD = 1e-10
TAU_TR = 1e-9
TAU_EIG = 1e-9
TAU_SUPP = 1e-12

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-13

LOG2 = float(np.log(2.0))
NAT_TO_BIT = 1.0 / LOG2


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return M


def hermiticity_error(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


def check_hermitian(M, tol: float = TAU_HERM) -> np.ndarray:
    M = _as_square(M)
    err = hermiticity_error(M)
    if err > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e}")
    return M


def jacobi_eigh(
    M, max_sweeps: int = JACOBI_MAX_SWEEPS, tol: float = JACOBI_OFF_TOL
) -> Spectrum:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``A[p, q]`` and then
    applies the classical real Jacobi rotation, so the pivot is annihilated
    exactly.  Sweeps continue until the off-diagonal Frobenius norm drops
    below ``tol * max(1, ||A||_F)``.

    Raises:
        NotHermitian: if ``M`` is not Hermitian within ``TAU_HERM``.
        NoConvergence: if ``max_sweeps`` sweeps do not reach the target.
    """
    A = check_hermitian(M).copy()
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))
    target = tol * scale

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm(X):
        return float(np.linalg.norm(X[offdiag]))

    for _ in range(max_sweeps):
        if off_norm(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G acts on columns (p, q); the phase factor makes the pivot real.
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
    else:
        if off_norm(A) > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], V[:, order])


def eig_hermitian(M, method: str = "lapack") -> Spectrum:
    """Eigendecomposition with ascending eigenvalues.

    ``method="jacobi"`` runs the in-house cyclic Jacobi solver; the default
    ``"lapack"`` delegates to ``numpy.linalg.eigh``.  Both validate
    Hermiticity first.
    """
    if method == "jacobi":
        return jacobi_eigh(M)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    A = check_hermitian(M)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    return Spectrum(w, V)


def eigvalsh(M) -> np.ndarray:
    """Eigenvalues of a (stack of) Hermitian matrices, no validation."""
    M = np.asarray(M)
    return np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2).conj()))


def entropy_from_eigenvalues(w) -> np.ndarray | float:
    """-sum w log w along the last axis with 0 log 0 := 0 and tiny negatives clipped."""
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    safe = np.where(w > 0.0, w, 1.0)
    out = -np.sum(w * np.log(safe), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def clip_noise(value: float, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Snap ``value`` into [lo, hi] when it overshoots by less than ``tol``."""
    if lo - tol < value < lo:
        return lo
    if hi < value < hi + tol:
        return hi
    return float(value)


def unnormalized_entropy(M) -> np.ndarray | float:
    """-tr M log M for a PSD matrix (or stack) of arbitrary trace."""
    return entropy_from_eigenvalues(eigvalsh(M))


def density_matrix(M, tol_tr: float = TAU_TR) -> np.ndarray:
    """Validate ``M`` as a density matrix and return it Hermitian-symmetrized.

    Raises:
        InvalidState: not Hermitian, not PSD within ``TAU_PSD``, or trace off.
    """
    try:
        A = check_hermitian(M)
    except NotHermitian as exc:
        raise InvalidState(str(exc)) from exc
    A = 0.5 * (A + A.conj().T)
    tr = np.trace(A).real
    if abs(tr - 1.0) > tol_tr:
        raise InvalidState(f"trace {tr!r} differs from 1")
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if lam_min < -TAU_PSD:
        raise InvalidState(f"negative eigenvalue {lam_min:.3e}")
    return A


def von_neumann_entropy(rho, validate: bool = True) -> float:
    """H(rho) = -tr rho log rho in nats."""
    A = density_matrix(rho) if validate else np.asarray(rho, dtype=complex)
    return float(unnormalized_entropy(A))


def _psd_function(rho, fn) -> np.ndarray:
    A = check_hermitian(rho)
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    if w.size and w[0] < -TAU_PSD:
        raise InvalidState(f"negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (V * fn(w)) @ V.conj().T


def matrix_sqrt(rho) -> np.ndarray:
    """PSD square root; eigenvalues in [-TAU_PSD, 0) are clipped to zero."""
    try:
        return _psd_function(rho, np.sqrt)
    except NotHermitian as exc:
        raise InvalidState(str(exc)) from exc


def trace_norm(M) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(M), compute_uv=False)))


def fidelity(rho, sigma) -> float:
    """F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1 (not squared)."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    return min(1.0, trace_norm(matrix_sqrt(rho) @ matrix_sqrt(sigma)))


def relative_entropy(rho, sigma) -> float:
    """D(rho || sigma) in nats; ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    mu, V = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    # diagonal of rho in sigma's eigenbasis
    weights = np.einsum("ji,jk,ki->i", V.conj(), rho, V).real
    kernel = mu <= TAU_SUPP
    if np.sum(np.clip(weights[kernel], 0.0, None)) > TAU_SUPP:
        return float("inf")
    cross = float(np.sum(weights[~kernel] * np.log(mu[~kernel])))
    value = -float(unnormalized_entropy(rho)) - cross
    return max(value, 0.0) if value > -TAU_EIG else value


def tensor(A, B) -> np.ndarray:
    """Kronecker product, A-index major."""
    return np.kron(np.asarray(A), np.asarray(B))


def partial_trace(M, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem whose index is not in ``keep``.

    Kept subsystems stay in their original order.  Keeping nothing returns
    the 1x1 matrix ``[[tr M]]``.
    """
    M = _as_square(M)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != M.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not multiply to {M.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"keep indices {keep} out of range")
    t = M.reshape(dims + dims)
    n = len(dims)
    for idx in sorted(set(range(len(dims))) - set(keep), reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + n)
        n -= 1
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def partial_trace_pure(psi, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced state of the pure state ``|psi>`` without forming ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != psi.size:
        raise DimensionMismatch(f"dims {dims} do not multiply to {psi.size}")
    keep = sorted(set(int(k) for k in keep))
    rest = [i for i in range(len(dims)) if i not in keep]
    t = psi.reshape(dims).transpose(keep + rest)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    X = t.reshape(dk, -1)
    return X @ X.conj().T
