"""Covariance functions over the joint (continuous, seed) space."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajcal.dataspace import DesignPoint
from trajcal.errors import NumericalError
from trajcal.kernels import (
    ContinuousKernelParams,
    JointKernel,
    SeedKernelParams,
    gram,
    joint_cov,
    matern52,
    normalize_rows,
    safe_cholesky,
    seed_index,
    squared_exponential,
)

# (1 + sqrt(5) + 5/3) * exp(-sqrt(5)), evaluated in double precision
MATERN_AT_S1 = 0.5239941088318203


def _params(ls, var=1.0):
    return ContinuousKernelParams(lengthscales=np.atleast_1d(np.asarray(ls, float)),
                                  variance=var)


def test_params_positivity_enforced():
    # the [1e-2, 2] x [1e-4, 1e2] boxes bound the optimizer, not the type;
    # the type itself rejects nonpositive values and negative v
    with pytest.raises(ValueError):
        _params([0.0])
    with pytest.raises(ValueError):
        _params([0.5], var=-1.0)
    with pytest.raises(ValueError):
        SeedKernelParams(B=np.eye(2), v=np.array([-0.1, 0.0]))


def test_matern52_zero_distance_is_variance():
    p = _params([0.3, 0.7], var=1.7)
    x = np.array([0.2, 0.9])
    assert matern52(x, x, p) == pytest.approx(1.7, abs=1e-15)


def test_matern52_scaling_identity():
    # doubling coordinates and lengthscales together changes nothing
    p1 = _params([0.25], var=1.0)
    p2 = _params([0.5], var=1.0)
    a = matern52(np.array([0.1]), np.array([0.4]), p1)
    b = matern52(np.array([0.2]), np.array([0.8]), p2)
    assert a == pytest.approx(b, abs=1e-15)


def test_matern52_unit_scaled_distance():
    p = _params([0.5], var=1.0)
    val = matern52(np.array([0.0]), np.array([0.5]), p)  # s = 1
    assert val == pytest.approx(MATERN_AT_S1, abs=1e-12)


def test_matern52_dimension_mismatch():
    with pytest.raises(ValueError):
        matern52(np.array([0.1, 0.2]), np.array([0.3]), _params([0.5]))


def test_matern52_monotone_in_distance():
    p = _params([1.0], var=1.0)
    s = np.linspace(0.0, 1.0, 400)
    vals = np.array([matern52(np.array([0.0]), np.array([si]), p) for si in s])
    assert np.all(np.diff(vals) <= 1e-15)


def test_squared_exponential_closed_form():
    p = _params([0.5], var=2.0)
    x1, x2 = np.array([0.1]), np.array([0.6])
    s2 = ((x1 - x2) / 0.5) ** 2
    assert squared_exponential(x1, x2, p) == pytest.approx(
        2.0 * math.exp(-0.5 * s2[0]), abs=1e-14
    )


def test_normalize_rows_unit_norm():
    B = np.array([[3.0, 4.0], [1.0, 0.0], [-2.0, 2.0]])
    N = normalize_rows(B)
    assert np.allclose(np.linalg.norm(N, axis=1), 1.0, atol=1e-14)


def test_normalize_rows_idempotent_bitwise():
    rng = np.random.default_rng(7)
    B = rng.normal(size=(5, 2))
    once = normalize_rows(B)
    twice = normalize_rows(once)
    assert np.array_equal(once, twice)


def test_seed_index_diagonal_and_rank_one():
    B = np.ones((3, 1))
    p = SeedKernelParams(B=B, v=np.array([0.5, 0.0, 0.25]))
    assert seed_index(1, 1, p) == pytest.approx(1.5, abs=1e-14)
    assert seed_index(3, 3, p) == pytest.approx(1.25, abs=1e-14)
    # identical rows, v=0: perfectly correlated seeds
    q = SeedKernelParams(B=B, v=np.zeros(3))
    for i in range(1, 4):
        for j in range(1, 4):
            assert seed_index(i, j, q) == pytest.approx(1.0, abs=1e-14)


def test_seed_index_range_check():
    p = SeedKernelParams(B=np.eye(2), v=np.zeros(2))
    with pytest.raises(ValueError):
        seed_index(0, 1, p)
    with pytest.raises(ValueError):
        seed_index(1, 3, p)


def test_seed_index_psd_random_matrix():
    rng = np.random.default_rng(11)
    p = SeedKernelParams(B=rng.normal(size=(6, 2)), v=rng.uniform(0.0, 2.0, size=6))
    K = np.array([[seed_index(i, j, p) for j in range(1, 7)] for i in range(1, 7)])
    assert np.allclose(K, K.T, atol=1e-15)
    assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_joint_cov_diagonal_product():
    kern = JointKernel(
        continuous=_params([0.5], var=2.0),
        seed=SeedKernelParams(B=np.ones((2, 1)), v=np.array([0.3, 0.0])),
    )
    p = DesignPoint(x=np.array([0.4]), r=1)
    assert joint_cov(p, p, kern) == pytest.approx(2.0 * 1.3, abs=1e-14)


def test_joint_cov_orthogonal_seeds_vanish():
    # identity B rows with v=0: different seeds are uncorrelated at any x
    kern = JointKernel(
        continuous=_params([0.5]),
        seed=SeedKernelParams(B=np.eye(3), v=np.zeros(3)),
    )
    p1 = DesignPoint(x=np.array([0.2]), r=1)
    p2 = DesignPoint(x=np.array([0.2]), r=3)
    assert joint_cov(p1, p2, kern) == 0.0


def test_joint_cov_same_x_cross_seed():
    rng = np.random.default_rng(5)
    seed = SeedKernelParams(B=rng.normal(size=(4, 2)), v=rng.uniform(0, 1, 4))
    kern = JointKernel(continuous=_params([0.5], var=1.3), seed=seed)
    p1 = DesignPoint(x=np.array([0.4]), r=2)
    p2 = DesignPoint(x=np.array([0.4]), r=4)
    row2 = seed.B[1] / np.linalg.norm(seed.B[1])
    row4 = seed.B[3] / np.linalg.norm(seed.B[3])
    assert joint_cov(p1, p2, kern) == pytest.approx(1.3 * float(row2 @ row4), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_joint_cov_symmetric(seed):
    rng = np.random.default_rng(seed)
    kern = JointKernel(
        continuous=_params(rng.uniform(0.1, 1.9, size=2), var=rng.uniform(0.1, 5.0)),
        seed=SeedKernelParams(B=rng.normal(size=(3, 2)), v=rng.uniform(0, 1, 3)),
    )
    p1 = DesignPoint(x=rng.uniform(0, 1, 2), r=int(rng.integers(1, 4)))
    p2 = DesignPoint(x=rng.uniform(0, 1, 2), r=int(rng.integers(1, 4)))
    assert joint_cov(p1, p2, kern) == joint_cov(p2, p1, kern)


def test_gram_single_point():
    kern = JointKernel(
        continuous=_params([0.5], var=2.0),
        seed=SeedKernelParams(B=np.ones((1, 1)), v=np.array([0.5])),
    )
    p = DesignPoint(x=np.array([0.3]), r=1)
    G = gram([p], kern, jitter=0.1)
    assert G.shape == (1, 1)
    assert G[0, 0] == pytest.approx(joint_cov(p, p, kern) + 0.1, abs=1e-14)


def test_gram_duplicate_point_needs_jitter():
    kern = JointKernel(
        continuous=_params([0.5]),
        seed=SeedKernelParams(B=np.ones((1, 1)), v=np.zeros(1)),
    )
    p = DesignPoint(x=np.array([0.3]), r=1)
    G = gram([p, p], kern)
    with pytest.raises(np.linalg.LinAlgError):
        np.linalg.cholesky(G)
    np.linalg.cholesky(gram([p, p], kern, jitter=1e-8))


def test_gram_matches_elementwise_oracle():
    """Every Gram entry equals a scalar recomputation via joint_cov."""
    rng = np.random.default_rng(13)
    kern = JointKernel(
        continuous=_params(rng.uniform(0.1, 1.5, size=2), var=0.8),
        seed=SeedKernelParams(B=rng.normal(size=(4, 2)), v=rng.uniform(0, 1, 4)),
    )
    pts = [DesignPoint(x=rng.uniform(0, 1, 2), r=int(rng.integers(1, 5)))
           for _ in range(20)]
    G = gram(pts, kern, jitter=0.0)
    for a in range(20):
        for b in range(20):
            assert G[a, b] == pytest.approx(joint_cov(pts[a], pts[b], kern), abs=1e-14)


def test_gram_psd_within_tolerance():
    rng = np.random.default_rng(17)
    for _ in range(25):
        kern = JointKernel(
            continuous=_params(rng.uniform(0.05, 1.9, size=1), var=rng.uniform(0.2, 3)),
            seed=SeedKernelParams(B=rng.normal(size=(3, 2)), v=rng.uniform(0, 0.5, 3)),
        )
        pts = [DesignPoint(x=rng.uniform(0, 1, 1), r=int(rng.integers(1, 4)))
               for _ in range(12)]
        G = gram(pts, kern)
        assert np.linalg.eigvalsh(G).min() >= -1e-8 * G.diagonal().max()


def test_safe_cholesky_escalates_then_fails():
    # a matrix with a negative eigenvalue cannot be rescued by tiny jitter
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NumericalError) as err:
        safe_cholesky(bad, jitter=1e-10, max_escalations=2)
    assert err.value.jitter > 1e-10


def test_safe_cholesky_recovers_semidefinite():
    a = np.ones((3, 3))  # rank one, singular
    L, j = safe_cholesky(a, jitter=1e-10)
    assert np.allclose(L @ L.T, a + j * np.eye(3), atol=1e-6)
