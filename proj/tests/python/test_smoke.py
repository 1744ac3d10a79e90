import json
import math

import pytest

import refill_matching as rm


def test_constants():
    assert abs(rm.solve_alpha() - 0.603) < 1e-3
    assert abs(rm.cr_bound_frequent_refill() - 0.73325) < 5e-4
    assert rm.cr_bound_bmatching(1) == 0.5
    assert abs(rm.cr_bound_bmatching(2) - 5.0 / 9.0) < 1e-12


def test_lambert_w():
    assert rm.lambert_w(0.0) == 0.0
    assert abs(rm.lambert_w(math.e) - 1.0) < 1e-12
    x = 3.7
    w = rm.lambert_w(x)
    assert abs(w * math.exp(w) - x) < 1e-12


def test_step_budget():
    assert rm.step_budget(1, True, 0, 3) == 0
    assert rm.step_budget(3, False, 1, 3) == 3
    assert rm.step_budget(2, False, 5, None) == 7
    with pytest.raises(Exception):
        rm.step_budget(0, True, 1, 3)


def test_stationary_cross_check():
    sp = rm.stationary_point(2.0, 0.5, 1)
    assert abs(sp["z0"] - rm.stationary_z0_cap1(2.0, 0.5)) < 1e-10
    assert sp["residual"] <= 1e-12
    assert abs(sum(sp["profile"]) - 1.0) <= 1e-10


def test_simulation_round_trip():
    inst = rm.gen_erdos_renyi(50, 200, 2.0, 0.5, b0=1, cap=2, seed=17)
    parsed = json.loads(inst)
    assert parsed["n"] == 50 and parsed["T"] == 200

    trace = rm.simulate(inst, policy="greedy", seed=3, stride=10)
    assert 0 < trace["alg_size"] <= 200
    again = rm.simulate(inst, policy="greedy", seed=3, stride=10)
    assert again["choices"] == trace["choices"]

    value, witness = rm.opt_maxflow(inst)
    assert value >= trace["alg_size"]
    assert len(witness) == 200


def test_adversarial_block():
    result = rm.simulate_adversarial("kp", policy="balance", b0=2, seed=5, freeze=True)
    assert result["alg_size"] == 10
    value, _ = rm.opt_maxflow(result["instance_json"])
    assert value == rm.kp_opt_value(2) == 18


def test_ode_and_fluid_limit():
    sol = rm.integrate_ode(2.0, 0.5, K=3, b0=1, tau_end=5.0)
    assert sol["tau"][-1] == pytest.approx(5.0)
    for z in sol["z"][:: len(sol["z"]) // 7]:
        assert sum(z) == pytest.approx(1.0, abs=1e-9)
    assert sol["h"][-1] > 0


def test_budget_pool_closed_form():
    for z0 in range(4):
        for k in (1, 3):
            for mm in (1, 3, 4):
                for j in range(mm):
                    for t in range(30):
                        assert rm.budget_pool_closed_form(z0, k, mm, j, t) == \
                            rm.budget_pool_by_recurrence(z0, k, mm, j, t)


def test_experiment():
    spec = {
        "generator": "kp",
        "b0": 1,
        "policy": "balance",
        "replicates": 1,
        "seed": 2,
        "opt_mode": "maxflow",
    }
    report = json.loads(rm.run_experiment(json.dumps(spec)))
    assert report["cr_of_means"] == 0.5
