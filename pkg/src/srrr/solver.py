"""AltMin-MM: alternating Procrustes / majorize-and-threshold updates.

Each outer iteration

1. sets ``A`` to the orthonormal matrix closest to ``P_A = Y X^T B``
   (``A = U V^T`` from the thin SVD of ``P_A``), which minimizes the loss
   over ``A^T A = I`` exactly;
2. replaces the loss in ``B`` by an isotropic quadratic upper bound with
   curvature ``psi >= lambda_max(A^T A kron X X^T)``, linearizes the concave
   part of the penalty at the current ``B``, and minimizes the resulting
   surrogate in closed form by group soft-thresholding each row.

Both steps can only decrease the objective, so the trace is monotone.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateIterateError, InvalidStateError, NumericalFailureError
from .model import CONVERGED, MAX_ITER_REACHED, Dataset, FitResult, SrrrConfig, loss, objective
from .numerics import lambda_max_sym, row_norms, thin_svd
from .penalty import concave_part_prime, kappa

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-8
RANK_RTOL = 1e-12
PERTURB_SCALE = 1e-10


@dataclass(frozen=True)
class Grams:
    """Data products reused by every iteration."""

    XXt: np.ndarray
    XYt: np.ndarray
    lam_max: float

    @classmethod
    def of(cls, d: Dataset):
        XXt = d.X @ d.X.T
        XXt = 0.5 * (XXt + XXt.T)
        return cls(XXt=XXt, XYt=d.X @ d.Y.T, lam_max=lambda_max_sym(XXt))


@dataclass(frozen=True)
class MajorizationContext:
    """Surrogate of F(B) at the current iterate: ``1/2 psi ||B - P_BR||^2 + kappa sum w_i ||b_i||``."""

    psi: float
    P_B: np.ndarray
    K: np.ndarray
    P_BR: np.ndarray


def procrustes(P_A):
    """Orthonormal-column matrix maximizing ``Tr(A^T P_A)``.

    Raises DegenerateIterateError if ``P_A`` is numerically rank deficient,
    since the maximizer is then not unique.
    """
    P_A = np.asarray(P_A, dtype=float)
    r = P_A.shape[1]
    U, s, V = thin_svd(P_A, r)
    if s[0] == 0.0 or s[-1] < RANK_RTOL * s[0]:
        rank = 0 if s[0] == 0.0 else int(np.sum(s >= RANK_RTOL * s[0]))
        raise DegenerateIterateError(rank, r)
    return U @ V.T


def update_A(d: Dataset, B, grams: Grams | None = None):
    """Exact minimizer of the loss over ``A^T A = I`` for fixed ``B``."""
    B = np.asarray(B, dtype=float)
    XYt = d.X @ d.Y.T if grams is None else grams.XYt
    return procrustes(XYt.T @ B)


def check_orthonormal(A, tol=ORTHO_TOL):
    A = np.asarray(A, dtype=float)
    err = np.max(np.abs(A.T @ A - np.eye(A.shape[1])))
    if err > tol:
        raise InvalidStateError(f"A^T A deviates from I by {err:.3e} (> {tol:g})")


def concave_gradient(cfg: SrrrConfig, B):
    """Gradient K of ``sum_i w_i * (rho(||b_i||) - kappa ||b_i||)``; zero rows get 0."""
    B = np.asarray(B, dtype=float)
    w = cfg.weights(B.shape[0])
    norms = row_norms(B)
    K = np.zeros_like(B)
    if cfg.penalty.kind != "geman":
        return K
    nz = norms > 0
    coef = w[nz] * concave_part_prime(cfg.penalty, norms[nz]) / norms[nz]
    K[nz] = coef[:, None] * B[nz]
    return K


def build_majorization(d: Dataset, cfg: SrrrConfig, A, B, psi, grams: Grams | None = None):
    """Assemble the surrogate of F(B) at ``(A, B)``.

    ``P_B`` keeps the ``A^T A`` factor so it stays correct even if ``A`` is
    not exactly orthonormal; orthonormality is nonetheless checked.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    check_orthonormal(A)
    if grams is None:
        grams = Grams.of(d)
    P_B = B + (grams.XYt @ A - grams.XXt @ B @ (A.T @ A)) / psi
    K = concave_gradient(cfg, B)
    return MajorizationContext(psi=float(psi), P_B=P_B, K=K, P_BR=P_B - K / psi)


def prox_rows(ctx: MajorizationContext, cfg: SrrrConfig):
    """Row-wise group soft-threshold of ``P_BR`` at level ``kappa * w_i / psi``."""
    P = ctx.P_BR
    k = kappa(cfg.penalty)
    if k == 0.0:
        return P.copy()
    thr = k * cfg.weights(P.shape[0]) / ctx.psi
    norms = row_norms(P)
    scale = np.zeros_like(norms)
    nz = norms > 0
    scale[nz] = np.maximum(0.0, 1.0 - thr[nz] / norms[nz])
    out = scale[:, None] * P
    out[scale == 0.0] = 0.0
    return out


def surrogate_value(ctx: MajorizationContext, cfg: SrrrConfig, B):
    """Surrogate up to its additive constant."""
    B = np.asarray(B, dtype=float)
    D = B - ctx.P_BR
    w = cfg.weights(B.shape[0])
    return 0.5 * ctx.psi * float(np.sum(D * D)) + kappa(cfg.penalty) * float(np.sum(w * row_norms(B)))


def initialize(d: Dataset, cfg: SrrrConfig, grams: Grams | None = None):
    """Unpenalized reduced-rank warm start.

    ``A0`` holds the leading left singular vectors of ``Y X^T`` and ``B0`` is
    the ridge-stabilized least-squares fit given ``A0``.
    """
    if grams is None:
        grams = Grams.of(d)
    A0, _, _ = thin_svd(grams.XYt.T, cfg.rank)
    delta = 1e-8 * np.trace(grams.XXt) / d.Q
    B0 = np.linalg.solve(grams.XXt + delta * np.eye(d.Q), grams.XYt @ A0)
    return A0, B0


def _perturb_null_rows(B, rng):
    B = B.copy()
    null = row_norms(B) == 0
    if not np.any(null):
        null[:] = True
    scale = PERTURB_SCALE * max(1.0, float(np.max(np.abs(B))))
    B[null] += scale * rng.standard_normal((int(null.sum()), B.shape[1]))
    return B


def _a_step(d, B, A_prev, grams, rng, iteration):
    try:
        return update_A(d, B, grams), False
    except DegenerateIterateError:
        pass
    try:
        A = update_A(d, _perturb_null_rows(B, rng), grams)
    except DegenerateIterateError as exc:
        raise DegenerateIterateError(exc.rank, exc.expected, iteration=iteration) from None
    if A_prev is not None and loss(d, A, B) > loss(d, A_prev, B):
        A = A_prev
    return A, True


def fit(
    d: Dataset,
    cfg: SrrrConfig,
    init=None,
    seed=0,
    time_budget=None,
    record_substeps=False,
    timer=time.perf_counter,
):
    """Estimate ``(A, B)`` by AltMin-MM.

    Parameters
    ----------
    d : Dataset
    cfg : SrrrConfig
    init : (A0, B0), optional
        Starting point; defaults to :func:`initialize`.
    seed : int
        Seeds the tiny perturbation used when ``Y X^T B`` loses rank.
    time_budget : float, optional
        Stop (status MaxIterReached) once this many seconds have elapsed.
    record_substeps : bool
        Also record F after each A-step and each B-step in ``result.substeps``.
    timer : callable
        Clock used for the trace. Pass ``lambda: 0.0`` for timing-free,
        bit-reproducible traces.

    Returns
    -------
    FitResult
    """
    cfg.check(d)
    t0 = timer()
    rng = np.random.default_rng(seed)
    grams = Grams.of(d)
    if not grams.lam_max > 0:
        raise NumericalFailureError("X X^T is zero; the loss has no curvature in B")
    psi = cfg.psi_safeguard * grams.lam_max

    if init is None:
        A, B = initialize(d, cfg, grams)
        A_prev = None
    else:
        A = np.array(init[0], dtype=float)
        B = np.array(init[1], dtype=float)
        if A.shape != (d.P, cfg.rank) or B.shape != (d.Q, cfg.rank):
            raise InvalidStateError(f"init shapes {A.shape}, {B.shape} do not match (P, r), (Q, r)")
        A_prev = A

    F = objective(d, cfg, A, B)
    if not np.isfinite(F):
        raise NumericalFailureError("initial objective is not finite")
    trace = [(0, F, timer() - t0)]
    substeps = []
    status = MAX_ITER_REACHED
    message = "reached max_iter"
    perturbed = 0

    for k in range(1, cfg.max_iter + 1):
        A, was_perturbed = _a_step(d, B, A_prev, grams, rng, k)
        perturbed += was_perturbed
        if record_substeps:
            substeps.append((k, "A", objective(d, cfg, A, B)))

        ctx = build_majorization(d, cfg, A, B, psi, grams)
        B = prox_rows(ctx, cfg)
        A_prev = A

        F_new = objective(d, cfg, A, B)
        if not np.isfinite(F_new):
            raise NumericalFailureError(f"objective became non-finite at iteration {k}")
        if record_substeps:
            substeps.append((k, "B", F_new))
        trace.append((k, F_new, timer() - t0))
        log.debug("iter %d  F=%.12g", k, F_new)

        if not np.any(B):
            message = "all rows of B were thresholded to zero; A is undetermined"
            break
        if abs(F - F_new) / max(1.0, F) <= cfg.tol:
            status = CONVERGED
            message = "relative objective decrease below tol"
            break
        F = F_new
        if time_budget is not None and trace[-1][2] >= time_budget:
            message = "time budget exhausted"
            break

    meta = {"psi": psi, "lambda_max_XXt": grams.lam_max}
    if perturbed:
        meta["degenerate_perturbations"] = perturbed
    return FitResult(
        A=A, B=B, trace=trace, status=status, method="altmin-mm",
        message=message, substeps=substeps, metadata=meta,
    )
