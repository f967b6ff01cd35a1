import numpy as np
import pytest

import qbound

THETA = np.array([0.3, 0.2, 0.1])
PAULIS = [qbound.pauli(k) for k in (1, 2, 3)]


def collective(n):
    out = []
    for p in PAULIS:
        total = np.zeros((2**n, 2**n), dtype=complex)
        for site in range(n):
            term = np.eye(1)
            for j in range(n):
                term = np.kron(term, p if j == site else np.eye(2))
            total += term
        out.append(total)
    return out


def test_rdm_matches_exact_for_ghz():
    rho = qbound.ghz_density(3, 3)
    rho1, rho2 = qbound.marginals(rho)
    exact = qbound.qfim_exact(collective(3), rho, THETA)
    rdm = qbound.qfim_rdm(rho1, rho2, PAULIS, THETA, 3)
    assert np.allclose(exact, rdm, atol=1e-9)
    assert np.allclose(exact, exact.T)


def test_closed_form_single_particle():
    rdm = qbound.qfim_rdm(np.eye(2) / 2, np.eye(4) / 4, PAULIS, THETA, 1)
    assert np.allclose(qbound.magfield_qfim1(THETA), rdm, atol=1e-10)


def test_fidelity_oracle_on_pure_rotation():
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    z = qbound.pauli(3)

    def family(t):
        u = np.diag(np.exp(-1j * t[0] * np.diag(z)))
        return u @ plus @ u.conj().T

    fid = qbound.fidelity_qfim(family, np.array([0.4]))
    assert fid[0, 0] == pytest.approx(4.0, abs=5e-4)


def test_cq_dominates_for_dephasing():
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    cq = qbound.noisy_cq_bound([qbound.pauli(3)], "dephasing", 0.2, plus, np.array([0.3]))
    assert cq.shape == (1, 1)
    assert cq[0, 0] >= 0.0


def test_unitality():
    lam = 0.3
    unital, _ = qbound.is_unital([np.sqrt(1 - lam / 2) * np.eye(2), np.sqrt(lam / 2) * qbound.pauli(3)])
    assert unital
    k = 1 - np.exp(-0.5)
    ad = [np.array([[1, 0], [0, np.sqrt(1 - k)]], dtype=complex), np.array([[0, np.sqrt(k)], [0, 0]], dtype=complex)]
    unital, residual = qbound.is_unital(ad)
    assert not unital and residual > 0


def test_run_config_and_errors():
    cfg = {
        "scenario_id": "py-smoke",
        "probe": {"type": "ghz", "direction": 3},
        "channel": {"type": "unitary"},
        "theta": [0.3, 0.2, 0.1],
        "n_list": [2, 3],
        "compute": ["jq_exact", "jq_rdm"],
    }
    report = qbound.run_config(cfg)
    assert report["scenario_id"] == "py-smoke"
    assert [p["n"] for p in report["points"]] == [2, 3]
    with pytest.raises(qbound.ConfigError):
        qbound.run_config({**cfg, "bogus": 1})
    with pytest.raises(ValueError):
        qbound.qfim_exact(collective(2), np.eye(3) / 3, THETA)


def test_check_suite_passes():
    results = qbound.check_suite(7)
    assert results and all(r["passed"] for r in results)


def test_magfield_preset():
    report = qbound.magfield(n_max=4)
    assert [p["n"] for p in report["points"]] == [2, 3, 4]
