"""Deterministic dense symmetric-matrix kernels.

Everything downstream (bounds, strategies, mechanism error) reduces to
symmetric eigendecompositions, PSD square roots, and pseudoinverse traces
computed here. All kernels are pure functions of their float64 inputs.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatch, NonFinite, NonSymmetric, NotPSD

# relative spectral cutoff: eigenvalues below EIG_ZERO_REL * max are rank-deficient
EIG_ZERO_REL = 1e-12
# tolerated relative asymmetry / negative eigenvalue mass
SYM_TOL = 1e-9
PSD_TOL = 1e-9


class EigenPair(NamedTuple):
    """Eigenvalues in nonincreasing order and matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def as_sym_matrix(S, tol: float = SYM_TOL) -> np.ndarray:
    """Validate a square symmetric finite matrix and return it symmetrized.

    Asymmetry up to tol * max|entry| is forgiven (accumulated float error);
    anything larger raises NonSymmetric.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NonSymmetric(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonFinite("matrix contains NaN or infinity")
    scale = np.max(np.abs(S)) if S.size else 0.0
    gap = np.max(np.abs(S - S.T)) if S.size else 0.0
    if gap > tol * max(scale, 1e-300):
        raise NonSymmetric(f"asymmetry {gap:.3e} exceeds {tol:.0e} of max entry {scale:.3e}")
    return 0.5 * (S + S.T)


def sym_eig(S) -> EigenPair:
    """Full spectrum of a symmetric matrix, eigenvalues sorted descending."""
    S = as_sym_matrix(S)
    values, vectors = np.linalg.eigh(S)
    return EigenPair(values[::-1].copy(), vectors[:, ::-1].copy())


def check_psd(values: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Clamp small negative eigenvalues to 0; raise NotPSD beyond tolerance."""
    top = float(values.max(initial=0.0))
    floor = -tol * max(top, 1e-300)
    if values.min(initial=0.0) < floor:
        raise NotPSD(f"eigenvalue {values.min():.6e} below tolerance {floor:.3e}")
    return np.clip(values, 0.0, None)


def psd_sqrt(S) -> np.ndarray:
    """Symmetric PSD square root R with R @ R == S.

    Eigenvalues in [-1e-9 * max, 0) are treated as exact zeros, as is
    anything below the shared relative spectral cutoff: their square roots
    (~1e-8 for float64 roundoff) would otherwise dominate rank-deficient
    traces and diagonals.
    """
    values, vectors = sym_eig(S)
    values = check_psd(values)
    top = values.max(initial=0.0)
    values[values < EIG_ZERO_REL * top] = 0.0
    R = (vectors * np.sqrt(values)) @ vectors.T
    return 0.5 * (R + R.T)


def pseudoinverse(A) -> np.ndarray:
    """Moore-Penrose pseudoinverse with the shared relative spectral cutoff."""
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains NaN or infinity")
    return np.linalg.pinv(A, rcond=EIG_ZERO_REL)


def pinv_trace(G_W, G_A) -> float:
    """trace(G_W @ pinv(G_A)) for PSD Grams, the unit-noise error kernel.

    Inverts only the G_A eigenvalues above the relative cutoff; the caller
    is responsible for the support condition (see mechanism.analytic_total_error).
    """
    G_W = as_sym_matrix(G_W)
    values, vectors = sym_eig(G_A)
    if G_W.shape != vectors.shape:
        raise DimensionMismatch(f"Gram shapes differ: {G_W.shape} vs {vectors.shape}")
    check_psd(sym_eig(G_W).values)
    values = check_psd(values)
    keep = values > EIG_ZERO_REL * values.max(initial=0.0)
    if not np.any(keep):
        return 0.0
    V = vectors[:, keep]
    quad = np.sum(V * (G_W @ V), axis=0)  # v_k' G_W v_k per kept eigenvector
    return float(np.sum(quad / values[keep]))
