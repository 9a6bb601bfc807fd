import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srrr.errors import InvalidArgumentError, RankDeficientError
from srrr.evalsim import (
    Arm, GenSpec, generate, max_subspace_angle, monte_carlo, principal_angles, subspace_angle,
)
from srrr.model import SrrrConfig
from srrr.penalty import Penalty


def test_generate_shapes_and_support():
    gt = generate(GenSpec(P=7, Q=5, r=3, N=100, seed=1))
    assert gt.dataset.Y.shape == (7, 100) and gt.dataset.X.shape == (5, 100)
    np.testing.assert_allclose(gt.A_true.T @ gt.A_true, np.eye(3), atol=1e-12)
    zero_rows = [i for i in range(5) if i not in gt.support]
    assert len(gt.support) == 3
    assert np.all(gt.B_true[zero_rows] == 0.0)
    assert np.all(np.linalg.norm(gt.B_true[list(gt.support)], axis=1) > 0)


def test_generate_noise_free_is_exact():
    gt = generate(GenSpec(noise_sigma=0.0, seed=2))
    d = gt.dataset
    assert np.array_equal(d.Y, gt.A_true @ (gt.B_true.T @ d.X))


def test_generate_is_deterministic():
    a, b = generate(GenSpec(seed=9)), generate(GenSpec(seed=9))
    assert a.dataset.X.tobytes() == b.dataset.X.tobytes()
    assert a.dataset.Y.tobytes() == b.dataset.Y.tobytes()
    assert a.B_true.tobytes() == b.B_true.tobytes()
    c = generate(GenSpec(seed=10))
    assert c.dataset.X.tobytes() != a.dataset.X.tobytes()


@pytest.mark.parametrize("kw", [dict(r=6), dict(sparse_rows=2), dict(sparse_rows=6), dict(N=4),
                                dict(noise_sigma=-1.0)])
def test_genspec_validation(kw):
    with pytest.raises(InvalidArgumentError):
        GenSpec(**kw)


def test_angle_identical():
    B = np.random.default_rng(0).standard_normal((5, 3))
    assert subspace_angle(B, B) == pytest.approx(0.0, abs=1e-7)


def test_angle_orthogonal():
    E = np.eye(4)
    assert subspace_angle(E[:, :2], E[:, 2:]) == pytest.approx(math.pi / 2)
    assert subspace_angle(E[:, [0]], E[:, [3]]) == pytest.approx(math.pi / 2)


def test_angle_known_value():
    t = 0.3
    a = np.array([[1.0], [0.0]])
    b = np.array([[math.cos(t)], [math.sin(t)]])
    assert subspace_angle(a, b) == pytest.approx(t, rel=1e-12)


def test_angle_rank_deficient():
    with pytest.raises(RankDeficientError):
        subspace_angle(np.zeros((4, 2)), np.eye(4)[:, :2])


def test_min_angle_vanishes_when_dimensions_force_intersection():
    # two 3-dimensional subspaces of R^5 always share a direction
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = subspace_angle(rng.standard_normal((5, 3)), rng.standard_normal((5, 3)))
        assert a <= 1e-7
    assert max_subspace_angle(np.eye(5)[:, :3], np.eye(5)[:, 2:]) == pytest.approx(math.pi / 2)


matrices = st.integers(0, 2**31 - 1)


@settings(max_examples=60, deadline=None)
@given(seed=matrices, n=st.integers(2, 7), data=st.data())
def test_angle_properties(seed, n, data):
    r = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(seed)
    B1 = rng.standard_normal((n, r))
    B2 = rng.standard_normal((n, r))
    M = rng.standard_normal((r, r)) + 3 * np.eye(r)
    a12 = principal_angles(B1, B2)
    assert np.all(a12 >= 0) and np.all(a12 <= math.pi / 2)
    np.testing.assert_allclose(a12, principal_angles(B2, B1), atol=1e-7)
    assert subspace_angle(B1 @ M, B2) == pytest.approx(subspace_angle(B1, B2), abs=1e-7)
    assert subspace_angle(B1 @ M, B1) <= 1e-7


def test_monte_carlo_noise_free_recovery():
    spec = GenSpec(noise_sigma=0.0)
    rows, summary = monte_carlo(spec, [Arm("rrr", SrrrConfig(3))], M=1, base_seed=3, threads=1)
    assert summary["arms"]["rrr"]["mean_angle"] <= 1e-4
    assert summary["arms"]["rrr"]["mean_max_angle"] <= 1e-4
    assert len(rows) == 1


def test_monte_carlo_single_trial_equals_row():
    rows, summary = monte_carlo(GenSpec(), [("l1", SrrrConfig(3, Penalty.l1(10.0)))], M=1, threads=1)
    arm = summary["arms"]["l1"]
    assert arm["mean_angle"] == rows[0]["angle"]
    assert arm["mean_recall"] == rows[0]["recall"]
    assert arm["stderr"] == 0.0


ARMS = [
    Arm("rrr", SrrrConfig(3)),
    Arm("l1", SrrrConfig(3, Penalty.l1(10.0))),
    Arm("geman", SrrrConfig(3, Penalty.geman(0.05, 3.0))),
]


def test_monte_carlo_deterministic_and_thread_independent():
    zero = lambda: 0.0
    a = monte_carlo(GenSpec(), ARMS, M=6, base_seed=4, threads=1, timer=zero)
    b = monte_carlo(GenSpec(), ARMS, M=6, base_seed=4, threads=3, timer=zero)
    assert a == b


def test_monte_carlo_arm_order_independent():
    zero = lambda: 0.0
    _, s1 = monte_carlo(GenSpec(), ARMS, M=4, base_seed=2, threads=1, timer=zero)
    _, s2 = monte_carlo(GenSpec(), ARMS[::-1], M=4, base_seed=2, threads=1, timer=zero)
    assert s1["arms"] == s2["arms"]


def test_monte_carlo_excludes_failures():
    arms = [Arm("dead", SrrrConfig(3, Penalty.l1(1e6))), Arm("rrr", SrrrConfig(3))]
    rows, summary = monte_carlo(GenSpec(), arms, M=3, threads=1)
    assert summary["arms"]["dead"]["excluded"] == 3
    assert summary["arms"]["dead"]["n"] == 0
    assert summary["arms"]["rrr"]["n"] == 3
    assert all(r["error"] == "RankDeficientError" for r in rows if r["arm"] == "dead")


def test_monte_carlo_recall_precision():
    rows, summary = monte_carlo(GenSpec(), [Arm("g", SrrrConfig(3, Penalty.geman(0.05, 3.0)))],
                                M=5, threads=1)
    for r in rows:
        assert 0.0 <= r["recall"] <= 1.0 and 0.0 <= r["precision"] <= 1.0


def test_monte_carlo_validation():
    with pytest.raises(InvalidArgumentError):
        monte_carlo(GenSpec(), ARMS, M=0)
    with pytest.raises(InvalidArgumentError):
        monte_carlo(GenSpec(), [Arm("a", SrrrConfig(3)), Arm("a", SrrrConfig(3))], M=1)
    with pytest.raises(InvalidArgumentError):
        monte_carlo(GenSpec(), [Arm("a", SrrrConfig(6))], M=1)


def test_threads_env(monkeypatch):
    from srrr.evalsim import default_threads
    monkeypatch.setenv("SRRR_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("SRRR_THREADS", "zero")
    with pytest.raises(InvalidArgumentError):
        default_threads()
