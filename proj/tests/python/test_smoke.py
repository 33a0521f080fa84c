import math

import numpy as np
import pytest

import mhsplit


def test_round_trip():
    rng = np.random.default_rng(3)
    d = 5
    W = rng.standard_normal((d, d))
    G = 0.8 * W / max(abs(np.linalg.eigvals(W)))
    B = rng.standard_normal((d, d))
    Sigma = B @ B.T / d + 0.5 * np.eye(d)
    g = rng.standard_normal(d)
    M, N, beta = mhsplit.ar1_to_splitting(G, g, Sigma)
    G2, g2, S2 = mhsplit.splitting_to_ar1(M, N, beta)
    assert np.allclose(G2, G, atol=1e-10)
    assert np.allclose(g2, g, atol=1e-10)
    assert np.allclose(S2, Sigma, atol=1e-10)


def test_lyapunov_against_series():
    G = np.array([[0.5, 0.2], [-0.1, 0.3]])
    Sigma = np.eye(2)
    X = mhsplit.solve_discrete_lyapunov(G, Sigma)
    ref = np.zeros((2, 2))
    P = np.eye(2)
    for _ in range(200):
        ref += P @ Sigma @ P.T
        P = G @ P
    assert np.allclose(X, ref, atol=1e-12)


def test_constants():
    t = mhsplit.optimal_tuning("langevin")
    assert abs(t["s0"] - 0.8252) < 5e-4
    assert abs(t["acceptance"] - 0.574) < 1e-3
    assert mhsplit.optimal_L(0.0) == 3
    assert math.isclose(mhsplit.lstep_efficiency(3, 0.0), 3 ** (2 / 3) / 4.426)


def test_predict_rows():
    cfg = {
        "target": {"dim": 100},
        "proposal": {"family": "sla"},
        "chain": {"n_steps": 1000, "seed": 1},
        "sweep": {"parameter": "l", "values": [0.8, 1.2, 1.6]},
    }
    rows = mhsplit.predict(cfg)
    acc = [float(r["predicted_acceptance"]) for r in rows]
    assert len(acc) == 3
    assert acc[0] > acc[1] > acc[2]


def test_run_is_deterministic():
    cfg = {
        "target": {"dim": 20, "shift": "random"},
        "proposal": {"family": "pcn", "h": 0.5},
        "chain": {"n_steps": 2000, "seed": 7},
    }
    a = mhsplit.run(cfg, as_text=True)
    assert a == mhsplit.run(cfg, as_text=True)
    assert float(mhsplit.run(cfg)[0]["empirical_acceptance"]) == 1.0


def test_config_error():
    with pytest.raises(mhsplit.ConfigError):
        mhsplit.predict({"proposal": {"family": "nope", "h": 0.1}})


def test_verify_identities():
    ok, text = mhsplit.verify("identities")
    assert ok, text
