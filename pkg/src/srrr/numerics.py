"""Dense real-matrix primitives: thin SVD, thin QR, top eigenvalue, row norms.

The factorizations delegate to LAPACK through :mod:`numpy.linalg`; this module
adds the contracts the solver relies on (shape checks, deterministic sign
conventions, rank-deficiency detection, and a guaranteed upper bound from the
eigenvalue estimator).
"""

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError, RankDeficientError

__all__ = ["as_matrix", "thin_svd", "qr_thin", "lambda_max_sym", "row_norms"]

POWER_TOL = 1e-10
POWER_MAX_ITER = 10000


def as_matrix(M, name="M"):
    """Return `M` as a finite 2-D float64 array or raise InvalidArgumentError."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got ndim={M.ndim}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must be non-empty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidArgumentError(f"{name} contains NaN or Inf")
    return M


def thin_svd(M, k=None):
    """Rank-`k` truncated SVD with a deterministic sign convention.

    Parameters
    ----------
    M : (m, n) array_like
    k : int, optional
        Number of singular triplets to keep, ``1 <= k <= min(m, n)``.
        Defaults to ``min(m, n)``.

    Returns
    -------
    U : (m, k) ndarray
    s : (k,) ndarray
        Nonincreasing, nonnegative.
    V : (n, k) ndarray
        Note this is V, not V^T.

    Notes
    -----
    Each column of U is flipped so that its entry of largest magnitude is
    positive, and the matching column of V is flipped with it.
    """
    M = as_matrix(M)
    m, n = M.shape
    if k is None:
        k = min(m, n)
    if not 1 <= k <= min(m, n):
        raise InvalidArgumentError(f"k={k} outside [1, {min(m, n)}]")
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD of {m}x{n} matrix did not converge: {exc}") from exc
    U = U[:, :k]
    s = s[:k]
    V = Vt[:k, :].T
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[pivot, np.arange(k)] < 0, -1.0, 1.0)
    return U * signs, s, V * signs


def qr_thin(M):
    """Thin QR with nonnegative diagonal in R.

    Raises RankDeficientError when some ``|R_ii| < 1e-12 * ||M||_F``.
    """
    M = as_matrix(M)
    m, n = M.shape
    if m < n:
        raise InvalidArgumentError(f"qr_thin needs rows >= cols, got {M.shape}")
    Q, R = np.linalg.qr(M, mode="reduced")
    d = np.diag(R)
    signs = np.where(d < 0, -1.0, 1.0)
    Q = Q * signs
    R = R * signs[:, None]
    scale = np.linalg.norm(M)
    small = np.abs(np.diag(R)) < 1e-12 * scale
    if scale == 0.0 or np.any(small):
        rank = int(np.sum(~small)) if scale > 0 else 0
        raise RankDeficientError(f"matrix of shape {M.shape} has numerical column rank {rank} < {n}")
    return Q, R


def lambda_max_sym(M, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Largest eigenvalue of a symmetric matrix, by power iteration.

    The iteration starts from the normalized all-ones vector and stops when the
    Rayleigh quotient changes by less than ``tol`` relative. The estimate is
    then certified: if ``(1 + tol) * lam * I - M`` does not admit a Cholesky
    factorization (the estimate fell short of the top eigenvalue, e.g. because
    the start vector had no component along it), the value from a full
    symmetric eigendecomposition is returned instead. The result is therefore
    an upper bound on ``lambda_max(M)`` to within a relative ``tol``.
    """
    M = as_matrix(M)
    n, n2 = M.shape
    if n != n2:
        raise InvalidArgumentError(f"matrix must be square, got {M.shape}")
    fro = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > 1e-10 * fro:
        raise InvalidArgumentError("matrix is not symmetric")
    if fro == 0.0:
        return 0.0

    x = np.full(n, 1.0 / np.sqrt(n))
    lam = float(x @ M @ x)
    for _ in range(max_iter):
        y = M @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
        lam_new = float(x @ M @ x)
        done = abs(lam_new - lam) <= tol * max(abs(lam_new), np.finfo(float).tiny)
        lam = lam_new
        if done:
            break

    shift = lam * (1.0 + tol)
    if shift > 0.0:
        try:
            np.linalg.cholesky(shift * np.eye(n) - M)
            return lam
        except np.linalg.LinAlgError:
            pass
    return float(np.linalg.eigvalsh(M)[-1])


def row_norms(M):
    """Euclidean norm of each row of `M`."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D array, got ndim={M.ndim}")
    return np.linalg.norm(M, axis=1)
