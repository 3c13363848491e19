import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gutmanlab.classifiers import (ClassifierSpec, Verdict, binary_reject_classify,
                                   decide_gutman_multi, decide_unnikrishnan,
                                   gutman_binary_classify, gutman_multi_classify,
                                   multi_structure, multi_threshold,
                                   second_order_region_check, threshold_chi2_dual,
                                   threshold_gutman_corrected, threshold_second_order,
                                   unnikrishnan_classify)
from gutmanlab.distributions import bernoulli
from gutmanlab.divergences import dispersion_v, gjs, gjs_types
from gutmanlab.errors import AssumptionViolation, DomainError
from gutmanlab.special import std_normal_cdf

P1, P2 = bernoulli(0.2), bernoulli(0.4)
# mpmath evaluations
LAMBDA_HAT_2000 = 0.05906313985258051
MULTI_LAMBDA_2000 = 0.11142423818364247


def seq(zeros, ones):
    return np.array([0] * zeros + [1] * ones)


def seq_with_gjs(target, y_ones, n, alpha=2):
    """Training sequence of length alpha n whose GJS to y is closest to target."""
    big_n = alpha * n
    ty = np.array([1 - y_ones / n, y_ones / n])
    cands = np.stack([1 - np.arange(big_n + 1) / big_n, np.arange(big_n + 1) / big_n], axis=1)
    c = int(np.argmin(np.abs(gjs_types(cands, ty, alpha) - target)))
    return seq(big_n - c, c)


def stats(xs, y, alpha=2):
    ty = np.bincount(y, minlength=2) / len(y)
    return [float(gjs_types(np.bincount(x, minlength=2) / len(x), ty, alpha)) for x in xs]


def test_second_order_threshold():
    assert threshold_second_order(P1, P2, 2, 100, 0.5) == pytest.approx(gjs(P1, P2, 2), abs=1e-15)
    assert threshold_second_order(P1, P2, 2, 2000, 0.2) == pytest.approx(LAMBDA_HAT_2000, abs=1e-13)
    assert threshold_second_order(P1, P2, 2, 10, 0.001) == 0.0
    with pytest.raises(DomainError):
        threshold_second_order(P1, P1, 2, 100, 0.2)


def test_corrected_threshold():
    assert threshold_gutman_corrected(0.01, 5000, 2, 2) == pytest.approx(
        0.01 - 2 * math.log(15001) / 5000, abs=1e-16)
    corr = [0.01 - threshold_gutman_corrected(0.01, n, 2, 2) for n in (10, 10**3, 10**5, 10**7)]
    assert all(c > 0 for c in corr) and np.all(np.diff(corr) < 0)


def test_chi2_threshold():
    for n, eps in ((10, 0.2), (333, 0.05)):
        assert threshold_chi2_dual(n, 3, eps) == pytest.approx(-math.log(eps) / n, rel=1e-12)
        assert threshold_chi2_dual(2 * n, 3, eps) == pytest.approx(threshold_chi2_dual(n, 3, eps) / 2)
    assert threshold_chi2_dual(1000, 2, 0.2) == pytest.approx(1.642374415149819 / 2000, rel=1e-12)


def test_multi_structure():
    st_ = multi_structure([P1, P2], 2)
    assert st_.istar.tolist() == [1, 0]
    s = multi_structure([bernoulli(0.1), bernoulli(0.2), bernoulli(0.8)], 2)
    assert s.istar.tolist() == [1, 0, 1]
    assert s.J1 == (0,) and s.J2 == (0,)
    assert s.theta[0] == pytest.approx(gjs(bernoulli(0.2), bernoulli(0.1), 2), abs=1e-15)


def test_multi_structure_symmetric_sets():
    # mirror-image laws with alpha = 1: every theta and second-order term agrees
    ps = [bernoulli(p) for p in (0.1, 0.3, 0.7, 0.9)]
    s = multi_structure(ps, 1, epsilon=0.2)
    assert s.J1 == (0, 1, 2, 3) and s.J2 == s.J1


def test_multi_structure_requires_unique_competitor():
    # both neighbours of Bern(0.5) are equally far
    with pytest.raises(AssumptionViolation):
        multi_structure([bernoulli(0.2), bernoulli(0.5), bernoulli(0.8)], 1)


def test_multi_threshold():
    ps = [bernoulli(0.1), bernoulli(0.35), bernoulli(0.7)]
    assert multi_threshold(ps, 2, 2000, [0.2] * 3) == pytest.approx(MULTI_LAMBDA_2000, abs=1e-13)
    two = [threshold_second_order(P1, P2, 2, 500, 0.2), threshold_second_order(P2, P1, 2, 500, 0.2)]
    assert multi_threshold([P1, P2], 2, 500, 0.2) == pytest.approx(min(two), abs=1e-15)
    theta = multi_structure(ps, 2).theta
    assert multi_threshold(ps, 2, 2000, 0.5) == pytest.approx(theta.min(), abs=1e-15)


def test_region_check():
    assert not second_order_region_check(0, 0, P1, P2, 2, 0.2)
    assert not second_order_region_check(5, 5, P1, P2, 2, 0.2)
    v12, v21 = math.sqrt(dispersion_v(P1, P2, 2)), math.sqrt(dispersion_v(P2, P1, 2))
    l2 = -1.0
    target = 0.2 - std_normal_cdf(l2 / v21)
    lo, hi = -10.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if std_normal_cdf(mid / v12) < target else (lo, mid)
    l1 = lo
    shift = 1e-9 * v12 / (std_normal_cdf(l1 / v12 + 1e-6) - std_normal_cdf(l1 / v12)) * 1e-6
    assert second_order_region_check(l1 - 10 * shift, l2, P1, P2, 2, 0.2)
    assert not second_order_region_check(l1 + 10 * shift, l2, P1, P2, 2, 0.2)


def test_gutman_binary_examples():
    assert gutman_binary_classify(np.ones(40, int), np.ones(20, int), 2, 0.0) == Verdict(0)
    assert gutman_binary_classify(seq(20, 20), seq(10, 10), 2, -1e-9) == Verdict(1)
    v = gutman_binary_classify(np.zeros(500, int), np.ones(250, int), 2, 0.1)
    assert v.label == "H2"
    assert 2 * math.log(1.5) + math.log(3) > 0.1


def test_boundary_counts_as_accept():
    x1, y = seq(30, 10), seq(10, 10)
    g = stats([x1], y)[0]
    assert gutman_binary_classify(x1, y, 2, g) == Verdict(0)


def test_length_mismatch_warns():
    with pytest.warns(UserWarning):
        gutman_binary_classify(seq(3, 3), seq(10, 10), 2, 0.1)
    with pytest.raises(DomainError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gutman_binary_classify([], seq(1, 1), 2, 0.1)


@settings(max_examples=40)
@given(st.integers(0, 60), st.integers(0, 30), st.floats(0, 0.3), st.integers(0, 2**31))
def test_binary_verdict_is_order_invariant_and_monotone(c1, cy, lam, s):
    rng = np.random.default_rng(s)
    x1, y = seq(60 - c1, c1), seq(30 - cy, cy)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = gutman_binary_classify(x1, y, 2, lam)
        assert gutman_binary_classify(rng.permutation(x1), rng.permutation(y), 2, lam) == v
        if v.decision == 0:
            assert gutman_binary_classify(x1, y, 2, lam + 0.05).decision == 0


def test_unnikrishnan_examples():
    y = seq(50, 50)
    assert unnikrishnan_classify([seq(100, 100), seq(100, 100), seq(200, 0)], y, 2, 0.01).is_reject
    xs = [seq_with_gjs(t, 50, 100) for t in (0.001, 0.05, 0.09)]
    g = stats(xs, y)
    assert np.allclose(g, (0.001, 0.05, 0.09), atol=2e-3)
    assert unnikrishnan_classify(xs, y, 2, 0.02) == Verdict(0)
    assert unnikrishnan_classify([seq(200, 0), seq(100, 100)], y, 2, 0.05).decision == 1


def test_unnikrishnan_ties():
    codes, tie = decide_unnikrishnan(np.array([0.3, 0.3, 0.5]), 0.2)
    assert codes == 0 and tie
    codes, tie = decide_unnikrishnan(np.array([[0.0, 0.5]]), 0.0)
    assert codes.tolist() == [0] and not tie[0]


def test_unnikrishnan_agrees_with_binary_rule():
    # with M = 2 and lambda <= min g the nearest type wins; the binary rule
    # thresholded midway between the two statistics makes the same call
    rng = np.random.default_rng(1)
    for _ in range(100):
        y = seq(*np.bincount(rng.integers(0, 2, 20), minlength=2))
        xs = [seq(40 - c, c) for c in rng.integers(0, 41, 2)]
        g = stats(xs, y)
        u = unnikrishnan_classify(xs, y, 2, min(g))
        if u.tie:
            continue
        assert u.decision == gutman_binary_classify(xs[0], y, 2, sum(g) / 2).decision


def test_gutman_multi_examples():
    assert decide_gutman_multi(np.array([0.2, 0.3, 0.4]), 0.1) == 0
    assert decide_gutman_multi(np.array([0.01, 0.02, 0.03]), 0.1) == -1
    assert decide_gutman_multi(np.array([0.2, 0.001, 0.3]), 0.01) == 1
    y = seq(50, 50)
    xs = [seq_with_gjs(t, 50, 100) for t in (0.2, 0.001, 0.3)]
    assert gutman_multi_classify(xs, y, 2, 0.01) == Verdict(1)


def test_binary_reject_examples():
    y = seq(50, 50)
    far = [seq(200, 0), seq(0, 200)]
    assert binary_reject_classify(far[0], far[1], y, 2, 0.01, 0.01) == Verdict(0)
    same = seq(100, 100)
    assert binary_reject_classify(same, same, y, 2, 0.01, 0.01).is_reject
    assert binary_reject_classify(seq(200, 0), same, y, 2, 0.01, 0.01) == Verdict(1)


def test_spec_validation():
    s = ClassifierSpec(2, 2.0, 2, "second_order", epsilon=0.2)
    assert s.resolve([P1, P2], 2000) == pytest.approx(LAMBDA_HAT_2000, abs=1e-13)
    c = ClassifierSpec(2, 2.0, 2, "gutman_corrected", epsilon=0.2)
    assert c.resolve([P1, P2], 2000) == pytest.approx(
        threshold_gutman_corrected(LAMBDA_HAT_2000, 2000, 2, 2), abs=1e-13)
    assert ClassifierSpec(2, 2.0, 2, "explicit", explicit_lambda=0.3).resolve([P1, P2], 9) == 0.3
    with pytest.raises(DomainError):
        ClassifierSpec(2, 2.0, 2, "explicit")
    with pytest.raises(DomainError):
        ClassifierSpec(2, 2.0, 2, "second_order", epsilon=1.0)
    with pytest.raises(DomainError):
        ClassifierSpec(2, 2.0, 2, "chi2_dual", epsilon=0.2, explicit_lambda=0.1)
