import math

import numpy as np
import pytest

from subspec.errors import ConfigError
from subspec.grid import BOX, GAUGE_BALL, DomainSpec, build_grid
from subspec.groups import GroupConfig
from subspec.kernel import (FracParams, KernelTable, TruncationPolicy,
                            assemble, complement_mass, mc_ball_volume,
                            pair_distances, sphere_constant, tail)

A1 = GroupConfig.abelian(1)
H1 = GroupConfig.heisenberg(1)


def test_frac_params_validation():
    FracParams(0.5, 2.0, 4)
    with pytest.raises(ConfigError):
        FracParams(1.2, 2.0, 4)          # s out of range
    with pytest.raises(ConfigError):
        FracParams(0.5, 0.9, 4)          # p must exceed 1
    with pytest.raises(ConfigError):
        FracParams(0.5, 2.0, 1)          # needs Q > p*s


def test_critical_exponent():
    fp = FracParams(0.5, 2.0, 4)
    assert fp.ps == pytest.approx(1.0)
    assert fp.p_star == pytest.approx(4.0 * 2.0 / 3.0)
    fp = FracParams(0.4, 2.0, 1)
    assert fp.p_star == pytest.approx(2.0 / 0.2)


def test_truncation_policy():
    assert TruncationPolicy(8.0).levels == 3
    assert TruncationPolicy(5.0).levels == 3   # rounded up to 8
    assert TruncationPolicy(1.0).levels == 0
    with pytest.raises(ConfigError):
        TruncationPolicy(0.5)


def test_sphere_constant_closed_forms():
    # sigma_S = Q * |B(0,1)|
    assert sphere_constant(A1) == pytest.approx(2.0)
    assert sphere_constant(GroupConfig.abelian(2)) == pytest.approx(2.0 * math.pi)
    assert sphere_constant(GroupConfig.abelian(3)) == pytest.approx(4.0 * math.pi)
    assert sphere_constant(H1) == pytest.approx(2.0 * math.pi**2)


def test_mc_ball_volume_h1():
    vol = mc_ball_volume(H1, n_samples=500_000, seed=7)
    assert vol == pytest.approx(math.pi**2 / 2.0, rel=0.02)


def test_pair_distances_symmetric(tiny_grid):
    D = pair_distances(tiny_grid)
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0.0)


def test_assemble_weights(tiny_K):
    K = tiny_K
    assert np.array_equal(K.w, K.w.T)
    assert np.all(np.diag(K.w) == 0.0)
    assert np.all(K.w[~np.eye(K.n, dtype=bool)] > 0)
    assert np.all(K.b > 0)


def test_assemble_group_mismatch(tiny_grid):
    with pytest.raises(ConfigError):
        assemble(tiny_grid, FracParams(0.5, 2.0, 4))


def test_complement_mass_interval_closed_form():
    # For Omega = (-1, 1) in R the complement mass at the origin is
    # 2 * integral_1^inf r^{-1-ps} dr = 2 / ps.
    grid = build_grid(DomainSpec(BOX, A1, lo=[-1.0], hi=[1.0]), 1.0 / 32.0)
    fp = FracParams(0.4, 2.0, 1)
    mass, _ = complement_mass(grid, fp, TruncationPolicy(),
                              points=np.array([[0.0]]))
    assert mass[0] == pytest.approx(2.0 / fp.ps, rel=0.01)


def test_kernel_cache_round_trip(tmp_path, tiny_grid, tiny_K):
    path = tmp_path / "kernel.npz"
    tiny_K.save(path)
    again = KernelTable.load(path, tiny_grid, tiny_K.fp, tiny_K.policy)
    assert np.array_equal(again.w, tiny_K.w)
    assert np.array_equal(again.b, tiny_K.b)
    with pytest.raises(ConfigError):
        KernelTable.load(path, tiny_grid, FracParams(0.3, 2.0, 1),
                         tiny_K.policy)


def test_tail_monotone_in_radius(tiny_grid):
    fp = FracParams(0.4, 2.0, 1)
    vals = np.ones(tiny_grid.n_nodes)
    center = np.array([0.0])
    t_small = tail(vals, center, 0.25, fp, tiny_grid)
    t_large = tail(vals, center, 0.75, fp, tiny_grid)
    assert t_small > 0 and t_large > 0
    with pytest.raises(ConfigError):
        tail(vals, center, -1.0, fp, tiny_grid)


def test_tail_zero_beyond_domain(tiny_grid):
    fp = FracParams(0.4, 2.0, 1)
    vals = np.ones(tiny_grid.n_nodes)
    assert tail(vals, np.array([0.0]), 10.0, fp, tiny_grid) == 0.0
