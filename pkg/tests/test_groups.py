import numpy as np
import pytest

from subspec import groups
from subspec.errors import ConfigError
from subspec.groups import GroupConfig


H1 = GroupConfig.heisenberg(1)
A2 = GroupConfig.abelian(2)


def test_dimensions():
    assert H1.topo_dim == 3
    assert H1.Q == 4
    assert GroupConfig.heisenberg(2).topo_dim == 5
    assert GroupConfig.heisenberg(2).Q == 6
    assert A2.topo_dim == 2
    assert A2.Q == 2


def test_bad_config():
    with pytest.raises(ConfigError):
        GroupConfig("quaternionic", 1)
    with pytest.raises(ConfigError):
        GroupConfig.heisenberg(0)


def test_json_round_trip():
    for cfg in (H1, A2):
        assert GroupConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        GroupConfig.from_json({"group": "octonionic"})
    with pytest.raises(ConfigError):
        GroupConfig.from_json("not a dict")


def test_compose_heisenberg():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    # t-component: 2*(<x', y> - <x, y'>) with a=(x,y,t), b=(x',y',t')
    assert np.allclose(groups.compose(H1, a, b), [1.0, 1.0, -2.0])
    assert np.allclose(groups.compose(H1, b, a), [1.0, 1.0, 2.0])


def test_compose_abelian_is_addition(rng):
    a = rng.standard_normal((5, 2))
    b = rng.standard_normal((5, 2))
    assert np.array_equal(groups.compose(A2, a, b), a + b)


def test_inverse_is_group_inverse(rng):
    a = rng.standard_normal((10, 3))
    prod = groups.compose(H1, a, groups.inverse(H1, a))
    assert np.allclose(prod, 0.0, atol=1e-14)


def test_associativity(rng):
    a, b, c = rng.standard_normal((3, 7, 3))
    lhs = groups.compose(H1, groups.compose(H1, a, b), c)
    rhs = groups.compose(H1, a, groups.compose(H1, b, c))
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_gauge_values():
    assert groups.gauge(A2, np.array([3.0, 4.0])) == pytest.approx(5.0)
    # ((1)^2 + 0)^{1/4} = 1 on the first layer
    assert groups.gauge(H1, np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)
    # pure center: |t|^{1/2}
    assert groups.gauge(H1, np.array([0.0, 0.0, 4.0])) == pytest.approx(2.0)


def test_hdistance_reference_value():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])
    # b^{-1} o a = (1, -1, -2): ((1+1)^2 + 4)^{1/4} = 8^{1/4}
    assert groups.hdistance(H1, a, b) == pytest.approx(8.0**0.25, rel=1e-14)


def test_hdistance_symmetry_bit_exact(rng):
    a = rng.standard_normal((50, 3))
    b = rng.standard_normal((50, 3))
    assert np.array_equal(groups.hdistance(H1, a, b), groups.hdistance(H1, b, a))


def test_gauge_dilation_homogeneity(rng):
    a = rng.standard_normal((40, 3))
    for r in (0.37, 2.0, 5.5):
        scaled = groups.gauge(H1, groups.dilate(H1, r, a))
        assert np.allclose(scaled, r * groups.gauge(H1, a), rtol=1e-13)


def test_gauge_power_of_two_dilation_exact(rng):
    a = rng.standard_normal((40, 3))
    for r in (0.5, 2.0, 4.0):
        scaled = groups.gauge(H1, groups.dilate(H1, r, a))
        assert np.array_equal(scaled, r * groups.gauge(H1, a))


def test_left_invariance(rng):
    a, b, g = rng.standard_normal((3, 20, 3))
    d0 = groups.hdistance(H1, a, b)
    d1 = groups.hdistance(H1, groups.compose(H1, g, a), groups.compose(H1, g, b))
    assert np.allclose(d0, d1, rtol=1e-11)


def test_dimension_mismatch_raises():
    with pytest.raises(ConfigError):
        groups.gauge(H1, np.zeros(2))
    with pytest.raises(ConfigError):
        groups.dilate(H1, -1.0, np.zeros(3))
