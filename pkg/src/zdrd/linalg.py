"""Small symmetric-matrix helpers shared across modules."""

import numpy as np

from .errors import DimensionMismatch, EigenFailure, NotPD, NotPSD

PSD_EIG_TOL = -1e-10
SYM_TOL = 1e-12


def as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d array, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return M


def symmetrize(M):
    return 0.5 * (M + M.T)


def check_psd(M, name="matrix", sym_tol=SYM_TOL, eig_tol=PSD_EIG_TOL):
    """Validate symmetry and eigenvalue nonnegativity; returns the symmetrized matrix."""
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise NotPSD(f"{name} must be square, got {M.shape}")
    scale = max(1.0, np.abs(M).max())
    if np.abs(M - M.T).max() > sym_tol * scale:
        raise NotPSD(f"{name} is not symmetric (residual > {sym_tol})")
    S = symmetrize(M)
    w = eigvalsh_checked(S, name)
    if w.min() < eig_tol:
        raise NotPSD(f"{name} has eigenvalue {w.min():.3e} < {eig_tol}")
    return S


def eigvalsh_checked(M, name="matrix"):
    try:
        return np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"symmetric eigensolver failed on {name}: {exc}") from exc


def sorted_eig(A):
    """General (complex) eigenvalues sorted by descending magnitude, ties by descending real part."""
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration did not converge: {exc}") from exc
    order = np.lexsort((-ev.real, -np.abs(ev)))
    return ev[order]


def psd_sqrt_factor(M, name="matrix"):
    """Factor F with F F^T = M for symmetric PSD M (eigenvalue based, rank tolerant)."""
    S = check_psd(M, name)
    w, V = np.linalg.eigh(S)
    w = np.clip(w, 0.0, None)
    return V * np.sqrt(w)


def inv_pd(M, name="matrix"):
    """Inverse of a symmetric positive-definite matrix via Cholesky."""
    try:
        L = np.linalg.cholesky(symmetrize(M))
    except np.linalg.LinAlgError as exc:
        raise NotPD(f"{name} is not positive definite") from exc
    Linv = np.linalg.solve(L, np.eye(M.shape[0]))
    return Linv.T @ Linv


def fix_eigvec_signs(V):
    """Flip eigenvector columns so the largest-magnitude component is positive."""
    V = V.copy()
    for j in range(V.shape[1]):
        k = np.argmax(np.abs(V[:, j]))
        if V[k, j] < 0:
            V[:, j] = -V[:, j]
    return V
