import json

import numpy as np
import pytest

from subspec.errors import ConfigError
from subspec.kernel import FracParams
from subspec.properties import (CheckReport, check_eigen_refinement,
                                check_linfty_stability,
                                check_positivity_simplicity, check_scaling,
                                check_sign_change, estimate_embedding_constant)
from subspec.ops import Field


def test_check_report_json_round_trip():
    rep = CheckReport("demo", {"n": 3}, "pass",
                      {"value": np.float64(1.5), "vec": np.array([1.0, 2.0])},
                      1e-8, "a statement")
    payload = rep.to_json()
    assert json.loads(json.dumps(payload)) == payload
    assert rep.passed


def test_positivity_simplicity(tiny_K):
    rep = check_positivity_simplicity(tiny_K, restarts=3, seed=1)
    assert rep.passed
    assert rep.measured["min_node_value"] > 0
    assert rep.measured["min_cosine"] > 1.0 - 1e-6


def test_scaling_check(tiny_grid):
    fp = FracParams(0.4, 2.0, 1)
    for r in (0.5, 2.0):
        rep = check_scaling(tiny_grid, fp, r)
        assert rep.passed, rep.measured


def test_sign_change_check(tiny_K):
    rep = check_sign_change(tiny_K)
    assert rep.passed
    assert rep.measured["nodal_positive_measure"] > 0
    assert rep.measured["nodal_negative_measure"] > 0


def test_sign_change_requires_p2(tiny_grid):
    from subspec.kernel import assemble

    K3 = assemble(tiny_grid, FracParams(0.3, 3.0, 1))
    with pytest.raises(ConfigError):
        check_sign_change(K3)


def test_embedding_constant_positive_and_monotone_restarts(tiny_K):
    fp = tiny_K.fp
    s1 = estimate_embedding_constant(tiny_K, fp.p_star, restarts=1, seed=0)
    s4 = estimate_embedding_constant(tiny_K, fp.p_star, restarts=4, seed=0)
    assert 0 < s1 <= s4
    with pytest.raises(ConfigError):
        estimate_embedding_constant(tiny_K, fp.p_star + 1.0)
    with pytest.raises(ConfigError):
        estimate_embedding_constant(tiny_K, -1.0)


def test_linfty_stability_harness(tiny_grid):
    def solve_at_h(h):
        return Field(np.full(tiny_grid.n_nodes, 1.0 + h), tiny_grid)

    rep = check_linfty_stability(solve_at_h, [0.5, 0.25])
    assert rep.passed

    def blow_up(h):
        return Field(np.full(tiny_grid.n_nodes, 1.0 / h**2), tiny_grid)

    assert not check_linfty_stability(blow_up, [0.5, 0.25]).passed


def test_eigen_refinement_harness():
    values = {0.5: 10.0, 0.25: 10.2}
    rep = check_eigen_refinement(lambda h: values[h], [0.5, 0.25])
    assert rep.passed
    values = {0.5: 10.0, 0.25: 14.0}
    assert not check_eigen_refinement(lambda h: values[h], [0.5, 0.25]).passed
