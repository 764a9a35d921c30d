import json
import math

import numpy as np
import pytest

import nnkr


def test_forward_adjoint_identity():
    e = nnkr.Ensemble.sample(5, 12, seed=3)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(12)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    t = (g + g.conj().T) / 2
    lhs = np.vdot(t, nnkr.forward(e, x)).real
    rhs = x @ nnkr.adjoint(e, t)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_sampling_is_deterministic():
    a = nnkr.Ensemble.sample(4, 6, law="complex-rademacher", seed=9).vectors
    b = nnkr.Ensemble.sample(4, 6, law="complex-rademacher", seed=9).vectors
    assert np.array_equal(a, b)
    assert np.allclose(np.abs(a), 1.0)


def test_noiseless_recovery():
    n, count = 10, 160
    e = nnkr.Ensemble.sample(n, count, seed=1)
    x = np.zeros(count)
    x[[3, 50, 77]] = [1.0, 0.5, 2.0]
    r = nnkr.solve_nnls(e, nnkr.forward(e, x))
    assert r["converged"]
    assert np.linalg.norm(r["x"] - x) < 1e-6
    assert r["kkt"] <= 1e-9


def test_fourth_order_poly_matches_p_norm():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(8)
    a = v[:4] + 1j * v[4:]
    ref = np.sum(nnkr.p_vectorize(np.outer(a, a.conj())) ** 2)
    assert nnkr.fourth_order_poly(v) == pytest.approx(ref, rel=1e-10)


def test_constant_chain():
    c = nnkr.constant_chain()["constants"]
    assert 11.28 <= c["c2"] <= 11.36
    assert 15.50 <= c["c3"] <= 15.55
    assert 3.04 <= c["c4"] <= 3.07
    rho, tau = nnkr.rip_to_nsp(0.5)
    assert rho == pytest.approx(0.6747, abs=1e-3)
    assert tau == pytest.approx(1.6528, abs=1e-3)
    big_c, big_d = nnkr.cd_constants(rho)
    assert 8.5 <= big_c <= 8.7 and 11.2 <= big_d <= 11.4


def test_errors_map_to_exceptions():
    with pytest.raises(nnkr.DomainError):
        nnkr.rip_to_nsp(0.9)
    with pytest.raises(nnkr.Error):
        nnkr.Ensemble.sample(1, 3)


def test_rip_identity_columns():
    assert nnkr.rip_exhaustive(np.eye(6)[:, :4], 2) < 1e-15


def test_cli():
    code, out, _ = nnkr.run_cli(["certify"])
    assert code == 0
    names = {c["name"]: c["value"] for c in json.loads(out)["constants"]}
    assert math.isclose(names["eta"], 1 / 3)
    code, _, err = nnkr.run_cli(["certify", "--delta", "0.9"])
    assert code == 3 and err
