"""Synthetic SRRR data, subspace-angle accuracy metric, Monte-Carlo runner."""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, SrrrError
from .model import Dataset, SrrrConfig
from .numerics import as_matrix, qr_thin, thin_svd
from .solver import fit


@dataclass(frozen=True)
class GenSpec:
    """Shape and noise of a synthetic problem.

    ``sparse_rows`` is the number of nonzero rows of the true B; it must be at
    least ``r`` so the true B has full column rank.
    """

    P: int = 7
    Q: int = 5
    r: int = 3
    N: int = 100
    sparse_rows: int = 3
    noise_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("P", "Q", "r", "N", "sparse_rows"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {v!r}")
        if self.r > min(self.P, self.Q):
            raise InvalidArgumentError(f"r={self.r} exceeds min(P, Q)={min(self.P, self.Q)}")
        if not self.r <= self.sparse_rows <= self.Q:
            raise InvalidArgumentError(f"need r <= sparse_rows <= Q, got sparse_rows={self.sparse_rows}")
        if self.N < max(self.P, self.Q):
            raise InvalidArgumentError(f"need N >= max(P, Q), got N={self.N}")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise InvalidArgumentError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GroundTruth:
    A_true: np.ndarray
    B_true: np.ndarray
    support: tuple
    dataset: Dataset
    spec: GenSpec

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "A_true": self.A_true.tolist(),
            "B_true": self.B_true.tolist(),
            "support": list(self.support),
        }


def generate(spec: GenSpec) -> GroundTruth:
    """Draw ``y_t = A B^T x_t + eps_t`` (no intercept) with row-sparse B.

    All randomness comes from one generator seeded with ``spec.seed``, drawn
    in a fixed order: A, support, B rows, X, noise.
    """
    rng = np.random.default_rng(spec.seed)
    A, _ = qr_thin(rng.standard_normal((spec.P, spec.r)))
    support = np.sort(rng.choice(spec.Q, size=spec.sparse_rows, replace=False))
    B = np.zeros((spec.Q, spec.r))
    B[support] = rng.standard_normal((spec.sparse_rows, spec.r))
    X = rng.standard_normal((spec.Q, spec.N))
    E = rng.standard_normal((spec.P, spec.N))
    Y = A @ (B.T @ X)
    if spec.noise_sigma > 0:
        Y = Y + spec.noise_sigma * E
    return GroundTruth(
        A_true=A, B_true=B, support=tuple(int(i) for i in support), dataset=Dataset(X, Y), spec=spec,
    )


def principal_angles(B1, B2):
    """All principal angles between the column spaces, ascending, in radians."""
    B1 = as_matrix(B1, "B1")
    B2 = as_matrix(B2, "B2")
    if B1.shape[0] != B2.shape[0]:
        raise InvalidArgumentError(f"row counts differ: {B1.shape[0]} vs {B2.shape[0]}")
    Q1, _ = qr_thin(B1)
    Q2, _ = qr_thin(B2)
    _, s, _ = thin_svd(Q1.T @ Q2)
    return np.arccos(np.clip(s, -1.0, 1.0))


def subspace_angle(B_hat, B_true) -> float:
    """Smallest principal angle, ``arccos(s_1)`` with ``s_1`` the top singular value of ``Q1^T Q2``."""
    return float(principal_angles(B_hat, B_true)[0])


def max_subspace_angle(B_hat, B_true) -> float:
    """Largest principal angle, ``arccos(s_r)``; zero only when the spaces coincide."""
    return float(principal_angles(B_hat, B_true)[-1])


@dataclass(frozen=True)
class Arm:
    name: str
    cfg: SrrrConfig


def _as_arms(arms):
    out = []
    for i, a in enumerate(arms):
        if isinstance(a, Arm):
            out.append(a)
        elif isinstance(a, SrrrConfig):
            out.append(Arm(f"arm{i}", a))
        else:
            name, cfg = a
            out.append(Arm(str(name), cfg))
    names = [a.name for a in out]
    if len(set(names)) != len(names):
        raise InvalidArgumentError(f"arm names must be unique, got {names}")
    return out


def _run_arm(gt, arm, seed, timer):
    support = set(gt.support)
    row = {"arm": arm.name}
    try:
        res = fit(gt.dataset, arm.cfg, seed=seed, timer=timer)
        angles = principal_angles(res.B, gt.B_true)
    except SrrrError as exc:
        row.update(error=type(exc).__name__, message=str(exc))
        return row
    selected = set(res.selected_rows)
    hits = len(selected & support)
    row.update(
        angle=float(angles[0]),
        max_angle=float(angles[-1]),
        iters=int(res.iters),
        seconds=float(res.seconds),
        recall=hits / len(support),
        precision=hits / len(selected) if selected else 0.0,
        status=res.status,
    )
    return row


def _run_trial(spec, arms, m, base_seed, timer):
    seed = base_seed + m
    gt = generate(replace(spec, seed=seed))
    rows = []
    for arm in arms:
        row = _run_arm(gt, arm, seed, timer)
        row["trial"] = m
        rows.append(row)
    return rows


def default_threads():
    env = os.environ.get("SRRR_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise InvalidArgumentError(f"SRRR_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise InvalidArgumentError(f"SRRR_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _mean_se(vals):
    n = len(vals)
    if n == 0:
        return None, None
    a = np.asarray(vals, dtype=float)
    se = float(a.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(a.mean()), se


def summarize(rows, arm_names):
    """Per-arm means and standard errors, plus paired differences between arms.

    Rows are reduced in (trial, arm) order so the result does not depend on
    the order in which trials finished.
    """
    rows = sorted(rows, key=lambda r: (r["trial"], arm_names.index(r["arm"])))
    ok = {name: {} for name in arm_names}
    excluded = {name: 0 for name in arm_names}
    for r in rows:
        if "error" in r:
            excluded[r["arm"]] += 1
        else:
            ok[r["arm"]][r["trial"]] = r

    summary = {"arms": {}, "paired": {}}
    for name in arm_names:
        good = [ok[name][t] for t in sorted(ok[name])]
        mean_angle, se_angle = _mean_se([r["angle"] for r in good])
        mean_max, se_max = _mean_se([r["max_angle"] for r in good])
        summary["arms"][name] = {
            "n": len(good),
            "excluded": excluded[name],
            "mean_angle": mean_angle,
            "stderr": se_angle,
            "mean_max_angle": mean_max,
            "max_angle_stderr": se_max,
            "mean_recall": _mean_se([r["recall"] for r in good])[0],
            "mean_precision": _mean_se([r["precision"] for r in good])[0],
            "mean_iters": _mean_se([r["iters"] for r in good])[0],
            "mean_seconds": _mean_se([r["seconds"] for r in good])[0],
        }
    for i, a in enumerate(arm_names):
        for b in arm_names[i + 1:]:
            common = sorted(set(ok[a]) & set(ok[b]))
            d_angle = [ok[b][t]["angle"] - ok[a][t]["angle"] for t in common]
            d_max = [ok[b][t]["max_angle"] - ok[a][t]["max_angle"] for t in common]
            m1, s1 = _mean_se(d_angle)
            m2, s2 = _mean_se(d_max)
            summary["paired"][f"{b}-{a}"] = {
                "n": len(common),
                "mean_angle_diff": m1,
                "angle_diff_stderr": s1,
                "mean_max_angle_diff": m2,
                "max_angle_diff_stderr": s2,
            }
    return rows, summary


def monte_carlo(spec: GenSpec, arms, M: int, base_seed: int = 0, threads=None, timer=time.perf_counter):
    """Fit every arm on ``M`` paired synthetic datasets.

    Trial ``m`` (1-based) uses seed ``base_seed + m`` for both data generation
    and the solver. Returns ``(rows, summary)``: one row per (trial, arm),
    sorted, and the aggregate produced by :func:`summarize`. Failed fits are
    kept as rows with an ``error`` key and counted under ``excluded``.
    """
    if int(M) != M or M < 1:
        raise InvalidArgumentError(f"M must be a positive integer, got {M!r}")
    arms = _as_arms(arms)
    for arm in arms:
        arm.cfg.check_shape(spec.P, spec.Q)
    threads = default_threads() if threads is None else int(threads)
    trials = range(1, int(M) + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda m: _run_trial(spec, arms, m, base_seed, timer), trials))
    else:
        chunks = [_run_trial(spec, arms, m, base_seed, timer) for m in trials]
    rows = [r for chunk in chunks for r in chunk]
    return summarize(rows, [a.name for a in arms])
