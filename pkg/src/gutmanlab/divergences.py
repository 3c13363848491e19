"""Divergence functionals, information densities and their moments.

All values are in nats. Terms with zero outer weight are dropped before any
logarithm is taken (0 log 0 = 0), and +inf is returned explicitly when a
relative entropy is infinite.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import as_distribution, check_same_alphabet, mix_arrays
from .errors import DomainError


@dataclass(frozen=True)
class MomentPair:
    """Dispersion ``v`` (nats^2) and third absolute moment ``t`` (nats^3)."""

    v: float
    t: float


class GJSGradient(NamedTuple):
    """Partials of GJS w.r.t. each argument; NaN off the respective support."""

    d1: np.ndarray
    d2: np.ndarray
    mask1: np.ndarray
    mask2: np.ndarray


class GJSHessianDiag(NamedTuple):
    d11: np.ndarray
    d22: np.ndarray
    d12: np.ndarray


def _pair(p1, p2):
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    check_same_alphabet(p1, p2)
    return p1, p2


def _check_alpha(alpha, allow_zero=True):
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha < 0 or (alpha == 0 and not allow_zero):
        raise DomainError(f"alpha must be a positive real, got {alpha}")
    return alpha


def _rel_terms(q, m):
    # elementwise q log(q / m) with 0 log 0 = 0; callers guarantee m > 0 where q > 0
    pos = q > 0
    safe_q = np.where(pos, q, 1.0)
    safe_m = np.where(pos, m, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        ratio = safe_q / safe_m
    # the ratio form is exact when q == m; fall back to a log difference when it overflows
    logr = np.where((ratio > 0) & np.isfinite(ratio), np.log(np.where(ratio > 0, ratio, 1.0)),
                    np.log(safe_q) - np.log(safe_m))
    return np.where(pos, q * logr, 0.0)


def kl(q, p):
    """D(Q || P); +inf iff supp(Q) is not contained in supp(P)."""
    q, p = _pair(q, p)
    if np.any((q > 0) & (p == 0)):
        return np.inf
    return max(float(np.sum(_rel_terms(q, p))), 0.0)


def gjs_types(q1, q2, alpha):
    """Vectorised GJS over arrays whose last axis is the alphabet.

    Inputs are not validated; they broadcast against each other.
    """
    q1 = np.asarray(q1, float)
    q2 = np.asarray(q2, float)
    m = mix_arrays(q1, q2, alpha)
    out = alpha * _rel_terms(q1, m).sum(axis=-1) + _rel_terms(q2, m).sum(axis=-1)
    return np.maximum(out, 0.0)


def gjs(p1, p2, alpha):
    """Generalized Jensen-Shannon divergence alpha D(P1||M) + D(P2||M),
    M = (alpha P1 + P2) / (1 + alpha). Always finite."""
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha)
    if alpha == 0:
        return 0.0
    return float(gjs_types(p1, p2, alpha))


def _density_vectors(p1, p2, alpha):
    m = alpha * p1 + p2
    s1, s2 = p1 > 0, p2 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        i1 = np.where(s1, np.log((1 + alpha) * p1 / np.where(s1, m, 1.0)), np.nan)
        i2 = np.where(s2, np.log((1 + alpha) * p2 / np.where(s2, m, 1.0)), np.nan)
    return i1, i2


def info_density(i, x, p1, p2, alpha):
    """log((1 + alpha) P_i(x) / (alpha P1(x) + P2(x))) for i in {1, 2}."""
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    if i not in (1, 2):
        raise DomainError(f"density index must be 1 or 2, got {i}")
    if not 0 <= x < len(p1):
        raise DomainError(f"symbol {x} outside alphabet")
    pi = p1 if i == 1 else p2
    if pi[x] == 0:
        raise DomainError(f"P{i}({x}) = 0: density undefined off the support")
    return float(np.log((1 + alpha) * pi[x] / (alpha * p1[x] + p2[x])))


def information_densities(p1, p2, alpha):
    """Both density vectors, NaN where the corresponding P_i vanishes."""
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    return _density_vectors(p1, p2, alpha)


def _central_moment(p, f, order):
    s = p > 0
    w, v = p[s], f[s]
    mean = np.dot(w, v)
    return float(np.dot(w, np.abs(v - mean) ** order))


def dispersion_v(p1, p2, alpha):
    """alpha Var_P1[i_1] + Var_P2[i_2]."""
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    i1, i2 = _density_vectors(p1, p2, alpha)
    return alpha * _central_moment(p1, i1, 2) + _central_moment(p2, i2, 2)


def third_moment_t(p1, p2, alpha):
    """alpha E_P1|i_1 - E i_1|^3 + E_P2|i_2 - E i_2|^3."""
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    i1, i2 = _density_vectors(p1, p2, alpha)
    return alpha * _central_moment(p1, i1, 3) + _central_moment(p2, i2, 3)


def moments(p1, p2, alpha):
    return MomentPair(dispersion_v(p1, p2, alpha), third_moment_t(p1, p2, alpha))


def renyi(gamma, p1, p2):
    """Renyi divergence D_gamma(P1 || P2) for gamma > 0, gamma != 1."""
    p1, p2 = _pair(p1, p2)
    gamma = float(gamma)
    if not gamma > 0 or gamma == 1.0:
        raise DomainError(f"Renyi order must be positive and != 1, got {gamma}")
    s1 = p1 > 0
    if gamma > 1 and np.any(s1 & (p2 == 0)):
        return np.inf
    both = s1 & (p2 > 0)
    total = float(np.sum(p1[both] ** gamma * p2[both] ** (1.0 - gamma)))
    if total == 0.0:
        return np.inf
    return max(np.log(total) / (gamma - 1.0), 0.0)


def tilted(p1, p2, gamma):
    """P^(gamma) proportional to P1^gamma P2^(1 - gamma)."""
    p1, p2 = _pair(p1, p2)
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"tilting parameter must lie in [0, 1], got {gamma}")
    if gamma == 1.0:
        return p1
    if gamma == 0.0:
        return p2
    w = p1 ** gamma * p2 ** (1.0 - gamma)
    z = w.sum()
    if z == 0:
        raise DomainError("P1 and P2 have disjoint supports; tilted distribution undefined")
    return as_distribution(w / z)


def triple_div(gamma, pj, pi, pk):
    """(1 / (gamma - 1)) log sum_x Pj^(1-gamma) Pi^(gamma/2) Pk^(gamma/2)."""
    pj = as_distribution(pj, "Pj")
    pi = as_distribution(pi, "Pi")
    pk = as_distribution(pk, "Pk")
    check_same_alphabet(pj, pi, pk)
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"order must lie in (0, 1), got {gamma}")
    total = float(np.sum(pj ** (1.0 - gamma) * (pi * pk) ** (0.5 * gamma)))
    if total == 0.0:
        return np.inf
    return max(np.log(total) / (gamma - 1.0), 0.0)


def gjs_gradient(p1, p2, alpha):
    """Unconstrained partials: dGJS/dP1(x) = alpha i_1(x), dGJS/dP2(x) = i_2(x).

    Coordinates outside supp(P1) (resp. supp(P2)) are excluded: NaN in the
    vector and False in the accompanying mask.
    """
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    i1, i2 = _density_vectors(p1, p2, alpha)
    return GJSGradient(alpha * i1, i2, p1 > 0, p2 > 0)


def gjs_hessian_diag(p1, p2, alpha):
    """Diagonal second partials of GJS, one value per symbol.

    d11 = alpha P2 / (P1 (alpha P1 + P2)), d22 = alpha P1 / (P2 (alpha P1 + P2)),
    d12 = -alpha / (alpha P1 + P2); NaN off the relevant supports.
    """
    p1, p2 = _pair(p1, p2)
    alpha = _check_alpha(alpha, allow_zero=False)
    m = alpha * p1 + p2
    s1, s2 = p1 > 0, p2 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        d11 = np.where(s1, alpha * p2 / (p1 * m), np.nan)
        d22 = np.where(s2, alpha * p1 / (p2 * m), np.nan)
        d12 = np.where(s1 & s2, -alpha / m, np.nan)
    return GJSHessianDiag(d11, d22, d12)


def pairwise_moments(p1, p2, p3, alpha):
    """Dispersion and third-moment functionals for the competition between
    training laws P1 and P2 for a test law P3.

    v = alpha Var_P1[i_1(.|P1,P3)] + alpha Var_P2[i_1(.|P2,P3)]
        + Var_P3[i_2(.|P1,P3) - i_2(.|P2,P3)], and t likewise with third
    absolute central moments.
    """
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    p3 = as_distribution(p3, "P3")
    check_same_alphabet(p1, p2, p3)
    alpha = _check_alpha(alpha, allow_zero=False)
    a13, b13 = _density_vectors(p1, p3, alpha)
    a23, b23 = _density_vectors(p2, p3, alpha)
    diff = b13 - b23
    if np.any(np.isnan(diff[p3 > 0])):
        raise DomainError("information density undefined on supp(P3)")
    v = (alpha * _central_moment(p1, a13, 2) + alpha * _central_moment(p2, a23, 2)
         + _central_moment(p3, diff, 2))
    t = (alpha * _central_moment(p1, a13, 3) + alpha * _central_moment(p2, a23, 3)
         + _central_moment(p3, diff, 3))
    return MomentPair(v, t)
