import math

import numpy as np
import pytest

import cdlab


LOC = cdlab.Family("gaussian-location")


def test_log_density():
    assert cdlab.log_density(LOC, 0.0, 0.0) == pytest.approx(-0.918939, abs=1e-6)
    scale = cdlab.Family("gaussian-scale")
    assert scale.log_density(2.0, 1.0) == pytest.approx(-0.5 * math.log(4 * math.pi) - 0.25)
    with pytest.raises(cdlab.DomainError):
        scale.log_density(-1.0, 0.0)


def test_permanent_and_esp():
    m = np.log(np.array([[1.0, 2.0], [3.0, 4.0]]))
    log_abs, sign = cdlab.permanent_log(m)
    assert sign == 1
    assert log_abs == pytest.approx(math.log(10.0))
    e = np.exp(cdlab.esp_log(np.log([1.0, 2.0, 3.0])))
    assert e == pytest.approx([1.0, 6.0, 11.0, 6.0])
    minors = cdlab.permanental_minors_log(m)
    assert np.exp(minors) == pytest.approx(np.array([[4.0, 3.0], [2.0, 1.0]]))
    with pytest.raises(cdlab.CapacityError):
        cdlab.permanent_log(np.zeros((26, 26)))


def test_rules_on_two_observations():
    ll = cdlab.loglik_matrix(LOC, [0.0, 1.0], [0.0, 1.0])
    w = cdlab.weights(ll)
    assert w.sum(axis=1) == pytest.approx([1.0, 1.0])
    e = math.e
    expected = [1 / (1 + e), e / (1 + e)]
    assert cdlab.pi_rule_enum(ll, [0.0, 1.0]) == pytest.approx(expected)
    assert cdlab.pi_rule_permanent(ll, [0.0, 1.0]) == pytest.approx(expected)
    spec = cdlab.TwoValuedSpec(1, 2, 0.0, 1.0)
    lr = [-0.5, 0.5]
    assert cdlab.pi_rule_two_valued(lr, spec) == pytest.approx(expected)
    s = cdlab.simple_rule(ll, [0.0, 1.0])
    assert s == pytest.approx(cdlab.simple_rule_two_valued(lr, spec))


def test_draw_instance_is_deterministic():
    a = cdlab.draw_instance(LOC, [0.0, 1.0, 2.0], seed=5, rep=3)
    b = cdlab.draw_instance(LOC, [2.0, 0.0, 1.0], seed=5, rep=3)
    assert a == b
    assert sorted(a[0]) == [0.0, 1.0, 2.0]


def test_mc_gap():
    r = cdlab.mc_gap(LOC, [0.0] * 5 + [1.0] * 5, "two-valued", reps=2000, seed=1)
    assert r["n"] == 10
    assert r["risk_diff"]["mean"] == r["risk_s"]["mean"] - r["risk_pi"]["mean"]
    assert r["risk_diff"]["mean"] >= -3 * r["risk_diff"]["stderr"]
    assert r["pythagoras_residual"] <= 3 * r["pythagoras_stderr"]
    same = cdlab.mc_gap(LOC, [0.3] * 4, "permanent", reps=50, seed=2)
    assert same["gap_sq"]["mean"] == 0.0
    with pytest.raises(cdlab.ContractError):
        cdlab.mc_gap(LOC, [0.0, 1.0], "enum", reps=1, seed=1)
    with pytest.raises(cdlab.ContractError):
        cdlab.mc_gap(LOC, [0.0, 1.0], "ryser", reps=10, seed=1)


def test_condition_checks():
    r = cdlab.check_two_valued_condition(LOC, 0.0, 1.0, reps=100000, seed=3)
    v = r["var_under_0"]
    assert abs(v["value"] - (math.e - 1)) <= 3 * v["stderr"]
    g2 = cdlab.check_G2(LOC, [0.5] * 4, reps=100, seed=1)
    assert g2["sum_sq_weights"]["value"] == pytest.approx(1.0)
    b1 = cdlab.check_B1(LOC, [0.0, 0.0, 1.0], reps=100, seed=1)
    assert b1["spread"] == 1.0
