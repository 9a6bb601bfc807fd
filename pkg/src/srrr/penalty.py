"""Scalar sparsity-inducing functions applied to row norms.

Three kinds are supported:

* ``none``  -- rho(t) = 0, plain reduced-rank regression.
* ``l1``    -- rho(t) = t, the group lasso.
* ``geman`` -- rho(t) = t / (theta + t), nonconvex.

Every kind is split as ``rho(t) = kappa * t + g(t)`` with ``kappa = rho'(0+)``,
which leaves ``g`` smooth, concave and nonincreasing on ``t >= 0``. The solver
handles ``kappa * t`` with a group soft-threshold and linearizes ``g``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

KINDS = ("none", "l1", "geman")


@dataclass(frozen=True)
class Penalty:
    """Penalty choice plus a global multiplier on the per-row weights.

    Parameters
    ----------
    kind : {"none", "l1", "geman"}
    theta : float, optional
        Geman scale, required (and > 0) for ``kind="geman"``.
    lam : float
        Global scale applied to every row weight ``xi_i``; must be >= 0.
    """

    kind: str = "none"
    theta: float | None = None
    lam: float = 1.0

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown penalty kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "geman":
            if self.theta is None or not np.isfinite(self.theta) or self.theta <= 0:
                raise InvalidArgumentError(f"geman penalty needs theta > 0, got {self.theta!r}")
            object.__setattr__(self, "theta", float(self.theta))
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidArgumentError(f"lam must be a finite value >= 0, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def l1(cls, lam=1.0):
        return cls("l1", lam=lam)

    @classmethod
    def geman(cls, theta, lam=1.0):
        return cls("geman", theta=theta, lam=lam)

    def to_dict(self):
        return {"kind": self.kind, "theta": self.theta, "lambda": self.lam}


def _nonneg(t, strict=False):
    t = np.asarray(t, dtype=float)
    bad = t <= 0 if strict else t < 0
    if np.any(bad) or np.any(np.isnan(t)):
        raise InvalidArgumentError(f"argument must be {'> 0' if strict else '>= 0'}")
    return t


def _scalar_or_array(value, t):
    return float(value) if np.ndim(t) == 0 else value


def rho(p: Penalty, t):
    """Penalty value at ``t >= 0`` (scalar or array), without the lam scale."""
    t = _nonneg(t)
    if p.kind == "none":
        out = np.zeros_like(t)
    elif p.kind == "l1":
        out = t.copy()
    else:
        out = t / (p.theta + t)
    return _scalar_or_array(out, t)


def rho_prime(p: Penalty, t):
    """Derivative of :func:`rho` at ``t > 0``; the limit at 0+ is :func:`kappa`."""
    t = _nonneg(t, strict=True)
    if p.kind == "none":
        out = np.zeros_like(t)
    elif p.kind == "l1":
        out = np.ones_like(t)
    else:
        out = p.theta / (p.theta + t) ** 2
    return _scalar_or_array(out, t)


def kappa(p: Penalty) -> float:
    """Right derivative of rho at zero."""
    if p.kind == "none":
        return 0.0
    if p.kind == "l1":
        return 1.0
    return 1.0 / p.theta


def concave_part(p: Penalty, t):
    """``rho(t) - kappa * t``, the smooth concave remainder."""
    return rho(p, t) - kappa(p) * np.asarray(t, dtype=float)


def concave_part_prime(p: Penalty, t):
    """Derivative of :func:`concave_part`; equals 0 at ``t = 0`` by continuity."""
    t = _nonneg(t)
    out = np.zeros_like(t)
    pos = t > 0
    if np.any(pos):
        out[pos] = rho_prime(p, t[pos]) - kappa(p)
    return _scalar_or_array(out, t)
