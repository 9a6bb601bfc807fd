"""AltMin-SubGrad: the double-loop benchmark.

The A-step is the same Procrustes update as AltMin-MM. The B-subproblem
(group-lasso penalized least squares with A fixed) is attacked with plain
subgradient descent and diminishing steps ``step_c / sqrt(t)``.

Unlike a textbook subgradient method, :func:`subgrad_B` returns the best
iterate it saw, and falls back to the starting ``B`` if nothing improved on
it. That keeps the outer objective trace monotone so it can be plotted next
to the AltMin-MM trace.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidStateError, NumericalFailureError, UnsupportedPenaltyError
from .model import CONVERGED, MAX_ITER_REACHED, Dataset, FitResult, SrrrConfig, objective
from .numerics import row_norms
from .solver import Grams, _a_step, initialize


@dataclass(frozen=True)
class SubGradConfig:
    """Inner-loop settings. ``step_c=None`` means ``1 / lambda_max(X X^T)``.

    ``inner_iters=0`` is allowed and leaves B untouched.
    """

    inner_iters: int = 100
    step_c: float | None = None
    inner_tol: float = 1e-12

    def __post_init__(self):
        if int(self.inner_iters) != self.inner_iters or self.inner_iters < 0:
            raise InvalidArgumentError(f"inner_iters must be an integer >= 0, got {self.inner_iters!r}")
        if self.step_c is not None and not self.step_c > 0:
            raise InvalidArgumentError(f"step_c must be > 0, got {self.step_c!r}")
        if not self.inner_tol > 0:
            raise InvalidArgumentError(f"inner_tol must be > 0, got {self.inner_tol!r}")

    def to_dict(self):
        return {"inner_iters": self.inner_iters, "step_c": self.step_c, "inner_tol": self.inner_tol}


def _require_l1(cfg):
    if cfg.penalty.kind != "l1":
        raise UnsupportedPenaltyError(
            f"altmin-subgrad only supports the l1 penalty, got {cfg.penalty.kind!r}"
        )


def _step_scale(sg, grams):
    if sg.step_c is not None:
        return sg.step_c
    return 1.0 / grams.lam_max if grams.lam_max > 0 else 1.0


def subgrad_B(d: Dataset, cfg: SrrrConfig, sg: SubGradConfig, A, B0, grams: Grams | None = None):
    """Run the inner subgradient loop on the B-subproblem for fixed ``A``.

    The subgradient used at a zero row is 0. Returns the best iterate, which
    never has a larger objective than ``B0``.
    """
    _require_l1(cfg)
    if grams is None:
        grams = Grams.of(d)
    A = np.asarray(A, dtype=float)
    B = np.array(B0, dtype=float)
    w = cfg.weights(d.Q)
    c = _step_scale(sg, grams)
    AtA = A.T @ A
    XYtA = grams.XYt @ A

    best = B.copy()
    F_best = F_prev = objective(d, cfg, A, B)
    for t in range(1, sg.inner_iters + 1):
        norms = row_norms(B)
        S = np.zeros_like(B)
        nz = norms > 0
        S[nz] = (w[nz] / norms[nz])[:, None] * B[nz]
        G = grams.XXt @ B @ AtA - XYtA + S
        B = B - (c / np.sqrt(t)) * G
        F = objective(d, cfg, A, B)
        if F < F_best:
            best, F_best = B.copy(), F
        if abs(F_prev - F) < sg.inner_tol:
            break
        F_prev = F
    return best


def fit_subgrad(
    d: Dataset,
    cfg: SrrrConfig,
    sg: SubGradConfig | None = None,
    seed=0,
    init=None,
    time_budget=None,
    timer=time.perf_counter,
):
    """Estimate ``(A, B)`` by AltMin-SubGrad; same stopping rule as :func:`srrr.solver.fit`.

    Trace times include the inner iterations.
    """
    _require_l1(cfg)
    cfg.check(d)
    sg = SubGradConfig() if sg is None else sg
    t0 = timer()
    rng = np.random.default_rng(seed)
    grams = Grams.of(d)

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
    trace = [(0, F, timer() - t0)]
    status = MAX_ITER_REACHED
    message = "reached max_iter"

    for k in range(1, cfg.max_iter + 1):
        A, _ = _a_step(d, B, A_prev, grams, rng, k)
        B = subgrad_B(d, cfg, sg, A, B, grams)
        A_prev = A
        F_new = objective(d, cfg, A, B)
        if not np.isfinite(F_new):
            raise NumericalFailureError(f"objective became non-finite at iteration {k}")
        trace.append((k, F_new, timer() - t0))
        if not np.any(B):
            message = "all rows of B are zero; A is undetermined"
            break
        if abs(F - F_new) / max(1.0, F) <= cfg.tol:
            status = CONVERGED
            message = "relative objective decrease below tol"
            break
        F = F_new
        if time_budget is not None and trace[-1][2] >= time_budget:
            message = "time budget exhausted"
            break

    return FitResult(
        A=A, B=B, trace=trace, status=status, method="altmin-subgrad", message=message,
        metadata={
            "subgrad": sg.to_dict(),
            "step_c_effective": _step_scale(sg, grams),
            "best_iterate_fallback": True,
        },
    )
