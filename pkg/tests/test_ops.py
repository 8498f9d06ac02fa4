import numpy as np
import pytest

import subspec
from subspec import _corepy
from subspec.errors import ConfigError
from subspec.ops import (Field, energy_gradient, gagliardo_energy,
                         lp_norm_pow, monotonicity_gap, weak_action,
                         weight_integral)


def brute_energy(w, b, u, p):
    n = len(u)
    total = 0.0
    for i in range(n):
        total += b[i] * abs(u[i]) ** p
        for j in range(n):
            total += w[i, j] * abs(u[i] - u[j]) ** p
    return total


def test_backend_reported():
    assert subspec.BACKEND in ("cython", "python")


def test_energy_matches_brute_force(tiny_K, rng):
    u = rng.standard_normal(tiny_K.n)
    for p in (1.5, 2.0, 3.0):
        assert gagliardo_energy(u, tiny_K, p) == pytest.approx(
            brute_energy(tiny_K.w, tiny_K.b, u, p), rel=1e-12)


def test_backends_agree(tiny_K, rng):
    u = rng.standard_normal(tiny_K.n)
    v = rng.standard_normal(tiny_K.n)
    for p in (1.5, 2.0, 3.0):
        assert gagliardo_energy(u, tiny_K, p) == pytest.approx(
            _corepy.energy(tiny_K.w, tiny_K.b, u, p), rel=1e-13)
        assert weak_action(u, v, tiny_K, p) == pytest.approx(
            _corepy.weak_action(tiny_K.w, tiny_K.b, u, v, p), rel=1e-12)
        assert np.allclose(energy_gradient(u, tiny_K, p),
                           _corepy.gradient(tiny_K.w, tiny_K.b, u, p),
                           rtol=1e-12)


def test_energy_homogeneity(tiny_K, rng):
    for _ in range(20):
        u = rng.standard_normal(tiny_K.n)
        c = rng.uniform(-3.0, 3.0)
        if c == 0.0:
            continue
        for p in (1.5, 2.0, 3.0):
            assert gagliardo_energy(c * u, tiny_K, p) == pytest.approx(
                abs(c) ** p * gagliardo_energy(u, tiny_K, p), rel=1e-12)


def test_weak_action_diagonal_identity(tiny_K, rng):
    u = rng.standard_normal(tiny_K.n)
    for p in (1.5, 2.0, 3.0):
        assert weak_action(u, u, tiny_K, p) == pytest.approx(
            gagliardo_energy(u, tiny_K, p), rel=1e-14)


def test_weak_action_linear_in_test_function(tiny_K, rng):
    u = rng.standard_normal(tiny_K.n)
    v1 = rng.standard_normal(tiny_K.n)
    v2 = rng.standard_normal(tiny_K.n)
    lhs = weak_action(u, 2.0 * v1 - 3.0 * v2, tiny_K)
    rhs = 2.0 * weak_action(u, v1, tiny_K) - 3.0 * weak_action(u, v2, tiny_K)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_gradient_is_energy_derivative(tiny_K, rng):
    h = 1e-6
    for p in (1.5, 2.0, 3.0):
        u = rng.standard_normal(tiny_K.n)
        g = energy_gradient(u, tiny_K, p)
        for i in (0, tiny_K.n // 2, tiny_K.n - 1):
            up, um = u.copy(), u.copy()
            up[i] += h
            um[i] -= h
            fd = (gagliardo_energy(up, tiny_K, p)
                  - gagliardo_energy(um, tiny_K, p)) / (2.0 * h)
            assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_lp_norm_pow(tiny_grid):
    u = np.ones(tiny_grid.n_nodes)
    assert lp_norm_pow(u, 2.0, tiny_grid) == pytest.approx(tiny_grid.measure())
    with pytest.raises(ConfigError):
        lp_norm_pow(u, 0.5, tiny_grid)


def test_weight_integral_allows_small_exponent(tiny_grid):
    u = 4.0 * np.ones(tiny_grid.n_nodes)
    w = np.ones(tiny_grid.n_nodes)
    # |u|^{1/2} = 2 over a domain of measure 2
    assert weight_integral(u, w, 0.5, tiny_grid) == pytest.approx(4.0)


def test_monotonicity_gap_p2_ratio_one(tiny_K, rng):
    u = rng.standard_normal(tiny_K.n)
    v = rng.standard_normal(tiny_K.n)
    gap = monotonicity_gap(u, v, tiny_K, 2.0)
    assert gap["lhs"] == pytest.approx(gap["rhs_seminorm_term"], rel=1e-12)


def test_monotonicity_gap_rejects_equal_fields(tiny_K):
    u = np.ones(tiny_K.n)
    with pytest.raises(ConfigError):
        monotonicity_gap(u, u.copy(), tiny_K)


def test_field_validation(tiny_grid):
    with pytest.raises(ConfigError):
        Field(np.zeros(3), tiny_grid)


def test_field_csv_round_trip(tmp_path, tiny_grid, rng):
    f = Field(rng.standard_normal(tiny_grid.n_nodes), tiny_grid)
    path = tmp_path / "field.csv"
    f.to_csv(path)
    again = Field.from_csv(path, tiny_grid)
    assert np.allclose(again.values, f.values, rtol=1e-15)


def test_field_binary_round_trip(tmp_path, tiny_grid, rng):
    f = Field(rng.standard_normal(tiny_grid.n_nodes), tiny_grid)
    path = tmp_path / "field.bin"
    f.to_binary(path)
    again = Field.from_binary(path, tiny_grid)
    assert np.array_equal(again.values, f.values)
