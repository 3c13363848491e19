"""Divergence-constrained exponent programs.

``exponent_f``  min alpha D(Q1||P1) + D(Q2||P2)  s.t. GJS(Q1, Q2, alpha) <= lambda
``exponent_k``  min D(Q1||Pj) + alpha D(Q2||Pi) + alpha D(Q3||Pk)
                s.t. GJS(Q2, Q1, alpha) <= lambda, GJS(Q3, Q1, alpha) <= lambda
``exponent_fn`` the first program restricted to the type lattice P_N x P_n.

Both continuous programs are solved through their Lagrangian. GJS has the
variational form GJS(Q1, Q2, alpha) = min_R alpha D(Q1||R) + D(Q2||R), attained
at the mixture, so for a fixed multiplier the Lagrangian is jointly convex in
(Q1, Q2, R) and every block update is a normalised geometric mean of a target
law and the current mixture.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .distributions import (as_distribution, check_same_alphabet,
                            enumerate_types, mix_arrays, training_length)
from .divergences import _rel_terms, dispersion_v, gjs, gjs_types, renyi, third_moment_t
from .errors import DomainError, EnumerationBudgetError

ENUMERATION_BUDGET = 10**8
CONSTRAINT_TOL = 1e-9
_MU_MAX = 1e12


@dataclass(frozen=True)
class ExponentSolution:
    """Optimal value with the minimising distributions.

    ``multiplier`` is the Lagrange multiplier of the GJS constraint (a pair
    for ``exponent_k``); ``residual`` is the KKT stationarity residual.
    """

    value: float
    minimizers: tuple
    multiplier: object
    converged: bool
    residual: float


@dataclass(frozen=True)
class SlackTerms:
    tau_n: float
    rho_n: float
    eta_n: float
    eta_nM: float
    gutman_correction: float


def _kl_vec(q, p):
    if np.any((q > 0) & (p == 0)):
        return math.inf
    return max(float(np.sum(_rel_terms(q, p))), 0.0)


def _log(p):
    with np.errstate(divide="ignore"):
        return np.log(p)


def _normalise_log(logw):
    return np.exp(logw - logsumexp(logw))


# ---------------------------------------------------------------------------
# exponent F


def _f_inner(lp1, lp2, alpha, s, log_r_guess=0.0):
    """Minimiser of the Lagrangian for multiplier mu = 1/s - 1.

    Stationarity gives Q_i ~ P_i^s R^(1-s) and R = mix(Q1, Q2), hence
    R ~ (alpha P1^s / Z1 + P2^s / Z2)^(1/s): the fixed point is pinned down by
    the single scalar r = Z1 / Z2, found by a bracketed root search.
    """
    log_a = math.log(alpha)

    def log_r_of(log_r):
        c = np.logaddexp(log_a, log_r)
        w1, w2 = math.exp(log_a - c), math.exp(log_r - c)
        inner = w1 * np.expm1(s * lp1) + w2 * np.expm1(s * lp2)
        with np.errstate(divide="ignore"):
            lr = np.log1p(np.maximum(inner, -1.0)) / s
        return lr - logsumexp(lr)

    def mismatch(log_r):
        lr = log_r_of(log_r)
        lz1 = logsumexp(s * lp1 + (1 - s) * lr)
        lz2 = logsumexp(s * lp2 + (1 - s) * lr)
        return lz1 - lz2 - log_r

    lo, hi = log_r_guess - 1.0, log_r_guess + 1.0
    while mismatch(lo) < 0:
        lo -= 2.0 * (hi - lo)
    while mismatch(hi) > 0:
        hi += 2.0 * (hi - lo)
    log_r = brentq(mismatch, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    lr = log_r_of(log_r)
    q1 = _normalise_log(s * lp1 + (1 - s) * lr)
    q2 = _normalise_log(s * lp2 + (1 - s) * lr)
    return q1, q2, log_r


def _spread(v, mask):
    v = v[mask]
    return float(v.max() - v.min()) if v.size else 0.0


def _f_kkt_residual(p1, p2, q1, q2, alpha, mu):
    m = mix_arrays(q1, q2, alpha)
    s1, s2 = q1 > 0, q2 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = np.log(q1 / p1) + mu * np.log(q1 / m)
        g2 = np.log(q2 / p2) + mu * np.log(q2 / m)
    return max(_spread(g1, s1), _spread(g2, s2)) / (1.0 + mu)


def _single_q_program(targets, weights, tol=1e-15, max_iter=10_000):
    """min_Q sum_i w_i D(Q || P_i) by entropic mirror descent."""
    common = np.all([p > 0 for p in targets], axis=0)
    k = len(targets[0])
    if not common.any():
        return math.inf, np.full(k, np.nan), True, 0.0
    lps = [np.log(p[common]) for p in targets]
    wsum = float(sum(weights))
    eta = 0.5 / wsum
    logq = np.full(common.sum(), -math.log(common.sum()))
    converged = False
    for _ in range(max_iter):
        grad = sum(w * (logq - lp) for w, lp in zip(weights, lps))
        new = logq - eta * grad
        new -= logsumexp(new)
        if np.max(np.abs(new - logq)) < tol:
            logq = new
            converged = True
            break
        logq = new
    q = np.zeros(k)
    q[common] = np.exp(logq)
    q /= q.sum()
    value = sum(w * _kl_vec(q, p) for w, p in zip(weights, targets))
    grad = sum(w * (np.log(q[common]) - lp) for w, lp in zip(weights, lps))
    return value, q, converged, float(grad.max() - grad.min())


def exponent_f(p1, p2, alpha, lam):
    """F(P1, P2, alpha, lambda).

    Returns value 0 at (P1, P2) when lambda >= GJS(P1, P2, alpha). For
    0 < lambda < GJS the multiplier is bisected (geometrically) until the
    constraint is active to within 1e-9.
    """
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    check_same_alphabet(p1, p2)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    g0 = gjs(p1, p2, alpha)
    if lam >= g0:
        return ExponentSolution(0.0, (p1, p2), 0.0, True, 0.0)
    overlap = (p1 > 0) & (p2 > 0)
    if not overlap.any():
        # disjoint supports pin GJS at its maximum for every feasible pair
        return ExponentSolution(math.inf, (p1, p2), math.inf, True, 0.0)
    if lam == 0:
        value, q, ok, res = _single_q_program([p1, p2], [alpha, 1.0])
        return ExponentSolution(value, (q, q.copy()), math.inf, ok, res)

    union = (p1 > 0) | (p2 > 0)
    lp1, lp2 = _log(p1[union]), _log(p2[union])

    def solve(mu, guess):
        q1u, q2u, lr = _f_inner(lp1, lp2, alpha, 1.0 / (1.0 + mu), guess)
        q1 = np.zeros_like(p1)
        q2 = np.zeros_like(p2)
        q1[union], q2[union] = q1u, q2u
        return q1, q2, lr, float(gjs_types(q1, q2, alpha))

    guess = 0.0
    mu_lo, mu_hi = 0.0, 1.0
    hi_sol = solve(mu_hi, guess)
    while hi_sol[3] > lam and mu_hi < _MU_MAX:
        mu_lo, mu_hi = mu_hi, 4.0 * mu_hi
        hi_sol = solve(mu_hi, hi_sol[2])
    if hi_sol[3] > lam:
        q1, q2 = hi_sol[:2]
        value = alpha * _kl_vec(q1, p1) + _kl_vec(q2, p2)
        return ExponentSolution(value, (q1, q2), mu_hi, False,
                                _f_kkt_residual(p1, p2, q1, q2, alpha, mu_hi))
    guess = hi_sol[2]
    for _ in range(400):
        if lam - hi_sol[3] <= CONSTRAINT_TOL:
            break
        mu = math.sqrt(mu_lo * mu_hi) if mu_lo > 0 else 0.5 * mu_hi
        sol = solve(mu, guess)
        guess = sol[2]
        if sol[3] > lam:
            mu_lo = mu
        else:
            mu_hi, hi_sol = mu, sol
        if mu_hi - mu_lo <= 1e-15 * mu_hi:
            break
    q1, q2, _, g = hi_sol
    value = alpha * _kl_vec(q1, p1) + _kl_vec(q2, p2)
    residual = _f_kkt_residual(p1, p2, q1, q2, alpha, mu_hi)
    converged = (lam - g) <= CONSTRAINT_TOL and residual < 1e-6
    return ExponentSolution(value, (q1, q2), mu_hi, converged, residual)


# ---------------------------------------------------------------------------
# exponent K


def _k_inner(lpj, lpi, lpk, alpha, mu2, mu3, state, tol=1e-12, max_iter=200_000):
    q1, q2, q3 = state
    lsum = 1.0 + mu2 + mu3
    for it in range(max_iter):
        r2 = mix_arrays(q2, q1, alpha)
        r3 = mix_arrays(q3, q1, alpha)
        lr2, lr3 = _log(r2), _log(r3)
        n2 = _normalise_log((lpi + mu2 * lr2) / (1.0 + mu2))
        n3 = _normalise_log((lpk + mu3 * lr3) / (1.0 + mu3))
        with np.errstate(invalid="ignore"):
            l1 = (lpj + mu2 * lr2 + mu3 * lr3) / lsum
        n1 = _normalise_log(np.where(np.isnan(l1), -np.inf, l1))
        delta = max(np.max(np.abs(n1 - q1)), np.max(np.abs(n2 - q2)), np.max(np.abs(n3 - q3)))
        q1, q2, q3 = n1, n2, n3
        if delta < tol:
            return (q1, q2, q3), True
    return (q1, q2, q3), False


def _k_residual(pj, pi, pk, q, alpha, mu2, mu3):
    q1, q2, q3 = q
    r2 = mix_arrays(q2, q1, alpha)
    r3 = mix_arrays(q3, q1, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = np.log(q1 / pj) + mu2 * np.log(q1 / r2) + mu3 * np.log(q1 / r3)
        g2 = np.log(q2 / pi) + mu2 * np.log(q2 / r2)
        g3 = np.log(q3 / pk) + mu3 * np.log(q3 / r3)
    return max(_spread(g1, q1 > 0) / (1 + mu2 + mu3),
               _spread(g2, q2 > 0) / (1 + mu2),
               _spread(g3, q3 > 0) / (1 + mu3))


def exponent_k(pj, pi, pk, alpha, lam, max_sweeps=200):
    """K(Pj, Pi, Pk, lambda) with one multiplier per GJS constraint.

    Multipliers are found by cyclic coordinate bisection on the concave dual.
    """
    pj = as_distribution(pj, "Pj")
    pi = as_distribution(pi, "Pi")
    pk = as_distribution(pk, "Pk")
    check_same_alphabet(pj, pi, pk)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    g2, g3 = gjs(pi, pj, alpha), gjs(pk, pj, alpha)
    if lam >= g2 and lam >= g3:
        return ExponentSolution(0.0, (pj, pi, pk), (0.0, 0.0), True, 0.0)
    if lam == 0:
        value, q, ok, res = _single_q_program([pj, pi, pk], [1.0, alpha, alpha])
        return ExponentSolution(value, (q, q.copy(), q.copy()), (math.inf, math.inf), ok, res)

    lpj, lpi, lpk = _log(pj), _log(pi), _log(pk)
    state = (np.array(pj), np.array(pi), np.array(pk))
    mu = [0.0, 0.0]

    def constraints(st):
        q1, q2, q3 = st
        return float(gjs_types(q2, q1, alpha)), float(gjs_types(q3, q1, alpha))

    def solve(m2, m3, st):
        return _k_inner(lpj, lpi, lpk, alpha, m2, m3, st)

    inner_ok = True
    for _ in range(max_sweeps):
        for c in (0, 1):
            trial = list(mu)
            trial[c] = 0.0
            st0, ok0 = solve(*trial, state)
            if constraints(st0)[c] <= lam:
                mu, state = trial, st0
                inner_ok &= ok0
                continue
            lo, hi = 0.0, max(mu[c], 1.0)
            trial[c] = hi
            st_hi, ok = solve(*trial, state)
            while constraints(st_hi)[c] > lam and hi < _MU_MAX:
                lo, hi = hi, 4.0 * hi
                trial[c] = hi
                st_hi, ok = solve(*trial, st_hi)
            for _ in range(200):
                if lam - constraints(st_hi)[c] <= CONSTRAINT_TOL or hi - lo <= 1e-14 * hi:
                    break
                mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
                trial[c] = mid
                st_mid, ok_mid = solve(*trial, st_hi)
                if constraints(st_mid)[c] > lam:
                    lo = mid
                else:
                    hi, st_hi, ok = mid, st_mid, ok_mid
            trial[c] = hi
            mu, state = trial, st_hi
            inner_ok &= ok
        c2, c3 = constraints(state)
        feasible = c2 <= lam + CONSTRAINT_TOL and c3 <= lam + CONSTRAINT_TOL
        slack_ok = all(m == 0 or lam - c <= CONSTRAINT_TOL for m, c in zip(mu, (c2, c3)))
        if feasible and slack_ok:
            break
    q1, q2, q3 = state
    value = _kl_vec(q1, pj) + alpha * _kl_vec(q2, pi) + alpha * _kl_vec(q3, pk)
    residual = _k_residual(pj, pi, pk, state, alpha, *mu)
    c2, c3 = constraints(state)
    converged = bool(inner_ok and c2 <= lam + CONSTRAINT_TOL and c3 <= lam + CONSTRAINT_TOL
                     and residual < 1e-6)
    return ExponentSolution(value, (q1, q2, q3), tuple(mu), converged, residual)


# ---------------------------------------------------------------------------
# lattice exponent F_n


def lattice_cells(n, alpha, alphabet_size):
    big_n = training_length(n, alpha)
    return (big_n + 1) ** (alphabet_size - 1) * (n + 1) ** (alphabet_size - 1)


def check_budget(n, alpha, alphabet_size, budget=ENUMERATION_BUDGET):
    cells = lattice_cells(n, alpha, alphabet_size)
    if cells > budget:
        raise EnumerationBudgetError(
            f"type lattice has ~{cells:.3g} cells, above the budget of {budget:.3g}")
    return cells


def _kl_rows(types, p):
    # D(T || P) for each row of a type matrix
    bad = np.any((types > 0) & (p == 0), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = _rel_terms(types, np.broadcast_to(p, types.shape)).sum(axis=1)
    return np.where(bad, np.inf, np.maximum(vals, 0.0))


def exponent_fn(p1, p2, alpha, lam, n, budget=ENUMERATION_BUDGET, chunk=2**22):
    """F_n: exact minimum of alpha D(Q1||P1) + D(Q2||P2) over the lattice
    P_N x P_n with N = ceil(alpha n), subject to GJS(Q1, Q2, alpha) <= lambda."""
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    check_same_alphabet(p1, p2)
    if not alpha > 0 or n < 1:
        raise DomainError("alpha must be positive and n >= 1")
    k = len(p1)
    check_budget(n, alpha, k, budget)
    big_n = training_length(n, alpha)
    t1 = enumerate_types(big_n, k) / big_n
    t2 = enumerate_types(n, k) / n
    o1 = alpha * _kl_rows(t1, p1)
    o2 = _kl_rows(t2, p2)
    best, arg = math.inf, None
    rows = max(1, chunk // len(t2))
    for start in range(0, len(t1), rows):
        a = t1[start:start + rows]
        g = gjs_types(a[:, None, :], t2[None, :, :], alpha)
        obj = np.where(g <= lam, o1[start:start + rows, None] + o2[None, :], np.inf)
        idx = np.unravel_index(np.argmin(obj), obj.shape)
        if obj[idx] < best:
            best, arg = float(obj[idx]), (start + idx[0], idx[1])
    if arg is None:
        return ExponentSolution(math.inf, (), 0.0, True, 0.0)
    return ExponentSolution(best, (t1[arg[0]], t2[arg[1]]), 0.0, True, 0.0)


# ---------------------------------------------------------------------------
# slack terms


def gutman_correction(n, alpha, alphabet_size):
    """|X| log((1 + alpha) n + 1) / n."""
    return alphabet_size * math.log((1 + alpha) * n + 1) / n


def slack_terms(n, alpha, alphabet_size, m, p1, p2):
    if n < 2:
        raise DomainError("slack terms need n >= 2")
    k = alphabet_size
    tau = 2 * (1 + alpha**2) * k / (2 * alpha**2 * n**2)
    v = dispersion_v(p1, p2, alpha)
    if v == 0:
        raise DomainError("dispersion is zero; rho_n undefined for identical laws")
    rho = 6 * third_moment_t(p1, p2, alpha) / math.sqrt(n * v**3) + tau
    eta = k * math.log(n + 1) / n + 2 * k * math.log(1 + alpha * n) / (alpha * n)
    eta_m = m * k * math.log(n * alpha + 1) / (n * alpha) + k * math.log(n + 1) / n
    return SlackTerms(tau, rho, eta, eta_m, gutman_correction(n, alpha, k))


def fn_zero_upper_bound(p1, p2, alpha, n):
    """Upper bound on F_n(P1, P2, alpha, 0) through the tilted law."""
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    k = len(p1)
    n_prime = min(n, training_length(n, alpha))
    with np.errstate(divide="ignore"):
        penalty = -np.sum(alpha * np.log(p1) + np.log(p2))
    return (renyi(alpha / (1 + alpha), p1, p2)
            + (1 + alpha) * k * math.log(n_prime) / n_prime + penalty / n_prime)
