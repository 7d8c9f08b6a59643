"""Dense linear algebra for the small complex systems that appear in the
two-level dynamics (4x4 generators, their steady states and spectra).

Matrices and vectors are plain numpy arrays of complex dtype.  The solver
is an LU factorization with partial pivoting; the eigen-decomposition is
delegated to LAPACK and then verified against an explicit residual bound,
so callers always get either a certified decomposition or an exception.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve


class SingularMatrix(Exception):
    """Pivot magnitude underflowed the singularity threshold."""


class NotConverged(Exception):
    """Eigen-decomposition failed or missed the residual bound."""


class DefectiveMatrix(Exception):
    """Eigenvector basis is numerically rank deficient."""


# Relative pivot threshold below which a system is treated as singular.
PIVOT_RTOL = 1e-12

# Residual certificate for eig: ||A v - w v|| <= EIG_RTOL * ||A|| per pair.
EIG_RTOL = 1e-9


def solve_linear(a, b):
    """Solve a x = b for a square complex matrix.

    Parameters
    ----------
    a : (n, n) array_like
    b : (n,) or (n, k) array_like

    Raises
    ------
    SingularMatrix
        If any U pivot of the LU factorization falls below
        ``PIVOT_RTOL * max|a|`` (or the factorization produces non-finite
        entries), i.e. the system has no trustworthy solution.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")

    scale = np.max(np.abs(a))
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    lu, piv = lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(pivots)) or np.min(pivots) < PIVOT_RTOL * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below threshold {PIVOT_RTOL * scale:.3e}"
        )
    return lu_solve((lu, piv), b)


def eig(a):
    """Eigenvalues and unit-norm right eigenvectors of a complex matrix.

    Returns
    -------
    values : (n,) complex ndarray
    vectors : (n, n) complex ndarray
        Column ``vectors[:, i]`` belongs to ``values[i]``, normalized to
        unit 2-norm.

    Raises
    ------
    NotConverged
        If the QR iteration fails or a pair misses the residual bound
        ``||A v - w v|| <= EIG_RTOL * ||A||``.
    DefectiveMatrix
        If the eigenvector matrix is numerically rank deficient, i.e. the
        matrix is defective and cannot be diagonalized.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected square matrix, got shape {a.shape}")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NotConverged(str(exc)) from exc

    norms = np.linalg.norm(vectors, axis=0)
    if np.any(norms == 0.0):
        raise NotConverged("zero eigenvector returned")
    vectors = vectors / norms

    norm_a = np.linalg.norm(a, 2)
    residual = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    bound = EIG_RTOL * max(norm_a, np.finfo(float).tiny)
    if np.any(residual > bound):
        raise NotConverged(
            f"residual {np.max(residual):.3e} exceeds {bound:.3e}"
        )

    # Condition of the eigenvector basis flags defectiveness (a defective
    # matrix has no complete basis; numerically the basis collapses).
    svals = np.linalg.svd(vectors, compute_uv=False)
    if svals[-1] < 1e-9 * svals[0]:
        raise DefectiveMatrix(
            f"eigenvector basis condition {svals[0] / svals[-1]:.3e}"
        )
    return values, vectors
