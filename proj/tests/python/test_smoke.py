import math

import numpy as np
import pytest

import nlqec


def test_version():
    assert nlqec.__version__


def test_fock_operators():
    space = nlqec.FockSpace(30)
    a = nlqec.annihilation_op(space)
    n = nlqec.number_op(space)
    assert np.allclose(a.conj().T @ a, n)
    t = nlqec.left_shift_op(space)
    s = nlqec.sqrt_number_op(space)
    assert np.allclose(t @ s, a)


def test_coherent_state_is_annihilation_eigenstate():
    space = nlqec.FockSpace(60)
    psi = nlqec.coherent_state(1.5, space)
    a = nlqec.annihilation_op(space)
    assert np.linalg.norm(a @ psi - 1.5 * psi) < 1e-8
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_truncation_guard():
    space = nlqec.FockSpace(50)
    with pytest.raises(Exception):
        nlqec.coherent_state(7.0, space)


def test_example1_pipeline():
    space = nlqec.FockSpace(60)
    family = nlqec.coherent_family(space)
    samples = nlqec.sample_explicit(
        family, [[1.0, 0.0], [1.5, 0.0], [2.0, 0.0], [2.5, 0.0]]
    )
    channel = nlqec.simplified_loss(space)
    v = nlqec.build_v_tensor(channel, samples)
    sol = nlqec.solve_factorization(v)
    assert sol.residual_rel <= 1e-9
    assert sol.dichotomy_ok
    assert np.allclose(sol.gamma, np.ones((2, 2), dtype=int))
    alphas = [p[0] for p in samples.params]
    assert np.allclose(sol.c[0, :], np.ones(4), atol=1e-6)
    assert np.allclose(sol.c[1, :], alphas, atol=1e-6)

    rec = nlqec.build_recovery(sol, channel, samples)
    for i in range(samples.size()):
        fid, _prob = nlqec.recovery_fidelity(samples.states[:, i], channel, rec)
        assert fid == pytest.approx(1.0, abs=1e-8)


def test_collective_dephasing_is_trace_preserving():
    ch = nlqec.collective_dephasing(0.4)
    assert ch.trace_preserving()
    assert ch.tp_defect < 1e-14


def test_scenario_runner():
    exit_code, report = nlqec.recover(nlqec.load_builtin("example2_dephasing_fixedphase"))
    assert exit_code == 0
    assert report["criterion"]["residual_rel"] <= 1e-12
    for row in report["recovery"]["fidelity"]:
        assert row["fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_cat_fidelity_law():
    exit_code, report = nlqec.recover(nlqec.load_builtin("example4_cat"))
    # the sampled criterion is satisfied to ~1e-11 at these alpha, so the
    # check itself reports exact; the fidelity law is still the paper's
    assert exit_code in (0, 2)
    for row in report["recovery"]["fidelity"]:
        alpha = row["params"][0]
        odd_branch = row["branch_fidelities"][1]
        assert odd_branch == pytest.approx(1.0 - 1.0 / (4 * alpha * alpha), abs=5e-3)


def test_config_validation_rejects_unknown_keys():
    config = nlqec.load_builtin("example1_coherent")
    config["typo"] = True
    with pytest.raises(Exception):
        nlqec.check(config)
