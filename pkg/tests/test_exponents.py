import math

import numpy as np
import pytest
from scipy.optimize import minimize

from gutmanlab.distributions import bernoulli, point_mass
from gutmanlab.divergences import gjs, kl, renyi, tilted, triple_div
from gutmanlab.errors import DomainError, EnumerationBudgetError
from gutmanlab.exponents import (exponent_f, exponent_fn, exponent_k, fn_zero_upper_bound,
                                 slack_terms)
from gutmanlab.oracles import grid_exponent_f, grid_exponent_k

P1, P2 = bernoulli(0.2), bernoulli(0.4)
# exhaustive enumeration of the 21 x 21 lattice, see test_fn_matches_plain_loop
FN_GOLDEN = 0.0497684117388299


def test_zero_when_threshold_exceeds_gjs():
    s = exponent_f(P1, P2, 2, gjs(P1, P2, 2))
    assert s.value == 0.0 and np.array_equal(s.minimizers[0], P1)
    assert exponent_f(P1, P1, 2, 0.0).value == 0.0


def test_lambda_zero_closed_form():
    rng = np.random.default_rng(3)
    for alpha in (0.5, 1, 2, 5):
        p1, p2 = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        s = exponent_f(p1, p2, alpha, 0.0)
        g = alpha / (1 + alpha)
        assert s.value == pytest.approx(renyi(g, p1, p2), abs=1e-6)
        for q in s.minimizers:
            assert np.max(np.abs(q - tilted(p1, p2, g))) < 1e-4


def test_matches_grid_oracle():
    s = exponent_f(P1, P2, 2, 0.01)
    assert s.converged
    assert s.value == pytest.approx(grid_exponent_f(P1, P2, 2, 0.01), abs=1e-3)
    assert gjs(*s.minimizers, 2) <= 0.01 + 1e-9
    assert 0.01 - gjs(*s.minimizers, 2) <= 1e-9


def test_matches_general_purpose_optimizer():
    p1, p2, alpha, lam = np.array([0.5, 0.3, 0.2]), np.array([0.2, 0.3, 0.5]), 1.5, 0.02

    def unpack(z):
        q1 = np.abs(z[:3]) / np.abs(z[:3]).sum()
        q2 = np.abs(z[3:]) / np.abs(z[3:]).sum()
        return q1, q2

    obj = lambda z: alpha * kl(unpack(z)[0], p1) + kl(unpack(z)[1], p2)
    con = {"type": "ineq", "fun": lambda z: lam - gjs(*unpack(z), alpha)}
    best = min((minimize(obj, np.concatenate([p1, p2]) + d, constraints=[con], method="SLSQP",
                         options={"ftol": 1e-12, "maxiter": 500})
                for d in (0.0, 0.05)), key=lambda r: r.fun)
    s = exponent_f(p1, p2, alpha, lam)
    assert s.value == pytest.approx(best.fun, abs=1e-6)
    assert s.value <= best.fun + 1e-9


def test_monotone_and_continuous_in_lambda():
    lams = np.linspace(0, gjs(P1, P2, 2), 30)
    vals = np.array([exponent_f(P1, P2, 2, lam).value for lam in lams])
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[-1] == 0.0
    # no jump at the lambda = 0 branch, which is solved separately
    f0 = vals[0]
    gaps = [f0 - exponent_f(P1, P2, 2, lam).value for lam in (1e-4, 1e-6, 1e-8, 1e-10)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-4


def test_kkt_residual_small():
    rng = np.random.default_rng(8)
    for _ in range(5):
        p1, p2 = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        s = exponent_f(p1, p2, 1.3, 0.4 * gjs(p1, p2, 1.3))
        assert s.converged and s.residual < 1e-8


def test_zero_coordinates_stay_zero():
    p1, p2 = np.array([0.5, 0.5, 0.0]), np.array([0.2, 0.3, 0.5])
    s = exponent_f(p1, p2, 2, 0.05)
    assert s.converged and s.minimizers[0][2] == 0.0
    assert math.isfinite(s.value)


def test_disjoint_supports():
    a, b = point_mass(0, 2), point_mass(1, 2)
    assert exponent_f(a, b, 2, 0.5).value == math.inf
    assert exponent_f(a, b, 2, gjs(a, b, 2)).value == 0.0


def test_k_closed_form_and_trivial_case():
    rng = np.random.default_rng(4)
    for alpha in (0.5, 2):
        ps = [rng.dirichlet(np.ones(3)) for _ in range(3)]
        s = exponent_k(*ps, alpha, 0.0)
        assert s.value == pytest.approx(triple_div(2 * alpha / (1 + 2 * alpha), *ps), abs=1e-6)
    assert exponent_k(P1, P1, P1, 2, 0.01).value == 0.0


def test_k_matches_grid_oracle():
    pk = bernoulli(0.5)
    s = exponent_k(P1, P2, pk, 2, 0.005)
    assert s.converged
    assert s.value == pytest.approx(grid_exponent_k(P1, P2, pk, 2, 0.005), abs=2e-3)
    q1, q2, q3 = s.minimizers
    assert gjs(q2, q1, 2) <= 0.005 + 1e-9 and gjs(q3, q1, 2) <= 0.005 + 1e-9


def test_fn_golden_value():
    s = exponent_fn(P1, P2, 1, 0.0, 20)
    assert s.value == pytest.approx(FN_GOLDEN, abs=1e-15)


def test_fn_matches_plain_loop():
    best = math.inf
    for a in range(21):
        for b in range(21):
            if a == b:
                q = np.array([1 - a / 20, a / 20])
                best = min(best, kl(q, P1) + kl(q, P2))
    assert best == pytest.approx(FN_GOLDEN, abs=1e-15)


@pytest.mark.parametrize("lam", [0.0, 0.005, 0.02])
def test_fn_at_least_f(lam):
    for n in (10, 25):
        assert exponent_fn(P1, P2, 2, lam, n).value >= exponent_f(P1, P2, 2, lam).value - 1e-12


def test_fn_zero_upper_bound():
    rng = np.random.default_rng(9)
    for _ in range(6):
        p1, p2 = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        for alpha, n in ((1, 10), (2, 15), (0.5, 20)):
            assert exponent_fn(p1, p2, alpha, 0.0, n).value <= fn_zero_upper_bound(p1, p2, alpha, n)


def test_fn_budget_guard():
    with pytest.raises(EnumerationBudgetError):
        exponent_fn(np.full(4, 0.25), np.full(4, 0.25), 2, 0.0, 1000)


def test_slack_terms():
    s = slack_terms(5000, 2, 2, 3, P1, P2)
    assert s.gutman_correction == pytest.approx(2 * math.log(15001) / 5000, rel=1e-15)
    s = slack_terms(1000, 2, 2, 3, P1, P2)
    assert s.eta_nM == pytest.approx(3 * 2 * math.log(2001) / 2000 + 2 * math.log(1001) / 1000,
                                     rel=1e-15)
    terms = [slack_terms(n, 2, 2, 3, P1, P2) for n in (100, 1000, 10_000)]
    for field in ("tau_n", "rho_n", "eta_n", "eta_nM", "gutman_correction"):
        vals = [getattr(t, field) for t in terms]
        assert vals[0] > vals[1] > vals[2] > 0
    with pytest.raises(DomainError):
        slack_terms(100, 2, 2, 3, P1, P1)
