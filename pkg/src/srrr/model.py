"""Problem data, configuration, results, and the exact objective.

Matrices follow the column-per-sample convention: ``X`` is Q x N (predictors)
and ``Y`` is P x N (responses). The objective is

    F(A, B) = 1/2 ||Y - A B^T X||_F^2 + sum_i lam * xi_i * rho(||b_i||_2)

with ``A`` (P x r) constrained to orthonormal columns and ``B`` (Q x r).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .numerics import as_matrix, row_norms
from .penalty import Penalty, rho

CONVERGED = "Converged"
MAX_ITER_REACHED = "MaxIterReached"


def _frozen(M):
    M = np.array(M, dtype=float, copy=True)
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class Dataset:
    """Predictors ``X`` (Q x N) and responses ``Y`` (P x N); arrays are read-only."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        Y = as_matrix(self.Y, "Y")
        if X.shape[1] != Y.shape[1]:
            raise InvalidArgumentError(
                f"X and Y must have the same number of samples, got {X.shape[1]} and {Y.shape[1]}"
            )
        N = X.shape[1]
        if N < max(X.shape[0], Y.shape[0]):
            raise InvalidArgumentError(f"need N >= max(P, Q); got N={N}, P={Y.shape[0]}, Q={X.shape[0]}")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))

    @property
    def P(self):
        return self.Y.shape[0]

    @property
    def Q(self):
        return self.X.shape[0]

    @property
    def N(self):
        return self.X.shape[1]

    def centered(self):
        """Copy with the row means of X and Y subtracted."""
        return Dataset(self.X - self.X.mean(axis=1, keepdims=True), self.Y - self.Y.mean(axis=1, keepdims=True))


@dataclass(frozen=True)
class SrrrConfig:
    """Estimation settings.

    ``xi`` defaults to all ones; the effective weight of row ``i`` is
    ``penalty.lam * xi[i]``.
    """

    rank: int
    penalty: Penalty = field(default_factory=Penalty)
    xi: tuple | None = None
    tol: float = 1e-8
    max_iter: int = 1000
    psi_safeguard: float = 1.0 + 1e-10

    def __post_init__(self):
        if int(self.rank) != self.rank or self.rank < 1:
            raise InvalidArgumentError(f"rank must be a positive integer, got {self.rank!r}")
        object.__setattr__(self, "rank", int(self.rank))
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be > 0, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        object.__setattr__(self, "max_iter", int(self.max_iter))
        if not self.psi_safeguard >= 1:
            raise InvalidArgumentError(f"psi_safeguard must be >= 1, got {self.psi_safeguard!r}")
        if self.xi is not None:
            xi = np.asarray(self.xi, dtype=float)
            if xi.ndim != 1 or np.any(~np.isfinite(xi)) or np.any(xi < 0):
                raise InvalidArgumentError("xi must be a 1-D vector of finite values >= 0")
            object.__setattr__(self, "xi", tuple(float(v) for v in xi))

    def check(self, d: Dataset):
        """Raise InvalidArgumentError unless this config fits the dataset shape."""
        self.check_shape(d.P, d.Q)

    def check_shape(self, P, Q):
        if self.rank > min(P, Q):
            raise InvalidArgumentError(f"rank {self.rank} exceeds min(P, Q) = {min(P, Q)}")
        if self.xi is not None and len(self.xi) != Q:
            raise InvalidArgumentError(f"xi has length {len(self.xi)}, expected Q = {Q}")

    def weights(self, Q):
        """Effective row weights ``lam * xi`` as a length-Q array."""
        xi = np.ones(Q) if self.xi is None else np.asarray(self.xi, dtype=float)
        if xi.shape != (Q,):
            raise InvalidArgumentError(f"xi has length {xi.size}, expected {Q}")
        return self.penalty.lam * xi

    def to_dict(self):
        return {
            "rank": self.rank,
            "penalty": self.penalty.to_dict(),
            "xi": None if self.xi is None else list(self.xi),
            "tol": self.tol,
            "max_iter": self.max_iter,
            "psi_safeguard": self.psi_safeguard,
        }


@dataclass
class SolverState:
    """Mutable iterate owned by a single solver run."""

    A: np.ndarray
    B: np.ndarray
    iter: int = 0
    objective_trace: list = field(default_factory=list)


@dataclass
class FitResult:
    """Output of a solver run.

    ``trace`` holds ``(iter, objective, seconds)`` triples; entry 0 is the
    initial point. ``selected_rows`` lists the predictors whose row of ``B``
    is nonzero.
    """

    A: np.ndarray
    B: np.ndarray
    trace: list
    status: str
    method: str = "altmin-mm"
    message: str = ""
    substeps: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def iters(self):
        return self.trace[-1][0] if self.trace else 0

    @property
    def objective(self):
        return self.trace[-1][1]

    @property
    def seconds(self):
        return self.trace[-1][2]

    @property
    def selected_rows(self):
        return [int(i) for i in np.flatnonzero(row_norms(self.B) > 0)]

    def to_dict(self):
        out = {
            "method": self.method,
            "status": self.status,
            "iters": self.iters,
            "message": self.message,
            "objective_trace": [[int(k), float(f), float(s)] for k, f, s in self.trace],
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "selected_rows": self.selected_rows,
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(
            A=np.asarray(data["A"], dtype=float),
            B=np.asarray(data["B"], dtype=float),
            trace=[(int(k), float(f), float(s)) for k, f, s in data["objective_trace"]],
            status=data["status"],
            method=data.get("method", "altmin-mm"),
            message=data.get("message", ""),
            metadata=data.get("metadata", {}),
        )


def _check_factors(d, A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise InvalidArgumentError("A and B must be 2-D")
    if A.shape[0] != d.P or B.shape[0] != d.Q or A.shape[1] != B.shape[1]:
        raise InvalidArgumentError(
            f"expected A (P={d.P} x r) and B (Q={d.Q} x r), got {A.shape} and {B.shape}"
        )
    return A, B


def loss(d: Dataset, A, B) -> float:
    """Least-squares loss ``1/2 ||Y - A B^T X||_F^2``."""
    A, B = _check_factors(d, A, B)
    R = d.Y - A @ (B.T @ d.X)
    return 0.5 * float(np.sum(R * R))


def regularizer(p: Penalty, xi, B) -> float:
    """``sum_i lam * xi_i * rho(||b_i||_2)``; ``xi=None`` means all ones."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise InvalidArgumentError("B must be 2-D")
    xi = np.ones(B.shape[0]) if xi is None else np.asarray(xi, dtype=float)
    if xi.shape != (B.shape[0],):
        raise InvalidArgumentError(f"xi has shape {xi.shape}, expected ({B.shape[0]},)")
    if p.kind == "none":
        return 0.0
    return float(p.lam * np.sum(xi * rho(p, row_norms(B))))


def objective(d: Dataset, cfg: SrrrConfig, A, B) -> float:
    """Full objective ``loss + regularizer``."""
    return loss(d, A, B) + regularizer(cfg.penalty, cfg.xi, B)
