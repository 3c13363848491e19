"""Threshold formulas and type-based decision rules.

Hypotheses are indexed from 0 in the API: ``Verdict.decision == 0`` is H1.
Every rule looks only at empirical types, so the order of samples never
matters. The ``decide_*`` helpers act on precomputed GJS statistics and are
vectorised over leading axes; the simulation harness uses them directly.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .distributions import (as_distribution, check_same_alphabet, empirical_type,
                            training_length)
from .divergences import dispersion_v, gjs, gjs_types
from .errors import AssumptionViolation, DomainError
from .special import chi2_isf, std_normal_cdf, std_normal_inv_cdf

REJECT = -1
UNIQUENESS_TOL = 1e-12
MODES = ("second_order", "gutman_corrected", "chi2_dual", "explicit")


@dataclass(frozen=True)
class Verdict:
    """``decision`` is a 0-based hypothesis index or None for rejection.

    ``tie`` is set when the nearest training type was not unique and the
    smallest index was taken.
    """

    decision: object
    tie: bool = False

    @property
    def is_reject(self):
        return self.decision is None

    @property
    def label(self):
        return "reject" if self.decision is None else f"H{self.decision + 1}"

    @classmethod
    def from_code(cls, code, tie=False):
        code = int(code)
        return cls(None if code == REJECT else code, bool(tie))


@dataclass(frozen=True)
class MultiStructure:
    theta: np.ndarray
    istar: np.ndarray
    J1: tuple
    J2: tuple


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    return eps


@dataclass(frozen=True)
class ClassifierSpec:
    M: int
    alpha: float
    alphabet_size: int
    threshold_mode: str
    epsilon: object = None
    explicit_lambda: object = None

    def __post_init__(self):
        if self.M < 2 or self.alphabet_size < 2 or not self.alpha > 0:
            raise DomainError("need M >= 2, alphabet_size >= 2 and alpha > 0")
        if self.threshold_mode not in MODES:
            raise DomainError(f"unknown threshold mode {self.threshold_mode!r}")
        if (self.explicit_lambda is not None) != (self.threshold_mode == "explicit"):
            raise DomainError("explicit_lambda is required by, and only by, mode 'explicit'")
        if self.threshold_mode != "explicit":
            if self.epsilon is None:
                raise DomainError(f"mode {self.threshold_mode!r} needs epsilon")
            for e in np.atleast_1d(self.epsilon):
                _check_eps(e)

    def eps_vector(self):
        eps = np.atleast_1d(np.asarray(self.epsilon, float))
        if eps.size == 1:
            eps = np.full(self.M, eps[0])
        if eps.size != self.M:
            raise DomainError(f"epsilon vector has {eps.size} entries, expected {self.M}")
        return eps

    def resolve(self, dists, n):
        """Threshold for sample size ``n`` under training laws ``dists``."""
        mode = self.threshold_mode
        if mode == "explicit":
            return float(self.explicit_lambda)
        if mode == "chi2_dual":
            return threshold_chi2_dual(n, self.alphabet_size, float(self.eps_vector()[0]))
        if self.M == 2:
            lam = threshold_second_order(dists[0], dists[1], self.alpha, n,
                                         float(self.eps_vector()[0]))
        else:
            lam = multi_threshold(dists, self.alpha, n, self.eps_vector())
        if mode == "gutman_corrected":
            lam = threshold_gutman_corrected(lam, n, self.alpha, self.alphabet_size)
        return lam


# ---------------------------------------------------------------------------
# thresholds


def threshold_second_order(p1, p2, alpha, n, epsilon):
    """GJS(P1, P2) + sqrt(V / n) Phi^-1(eps), clamped below at 0."""
    if n < 2:
        raise DomainError("second-order threshold needs n >= 2")
    eps = _check_eps(epsilon)
    v = dispersion_v(p1, p2, alpha)
    if v == 0:
        raise DomainError("dispersion is zero (identical laws); threshold undefined")
    lam = gjs(p1, p2, alpha) + math.sqrt(v / n) * std_normal_inv_cdf(eps)
    return max(lam, 0.0)


def threshold_gutman_corrected(lam, n, alpha, alphabet_size):
    """lambda - |X| log((1 + alpha) n + 1) / n; may be negative."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return lam - alphabet_size * math.log((1 + alpha) * n + 1) / n


def threshold_chi2_dual(n, alphabet_size, epsilon):
    """G^{-1}_{|X|-1}(eps) / (2n)."""
    if alphabet_size < 2 or n < 1:
        raise DomainError("need alphabet_size >= 2 and n >= 1")
    return chi2_isf(alphabet_size - 1, _check_eps(epsilon)) / (2 * n)


def multi_structure(dists, alpha, epsilon=None):
    """Nearest-competitor structure of M training laws.

    theta[j] = min_{i != j} GJS(P_i, P_j), istar[j] its argmin, J1 the
    indices attaining min_j theta[j], J2 the subset of J1 minimising
    sqrt(V(P_istar(j), P_j)) Phi^-1(eps_j) (equal to J1 without epsilon).
    """
    dists = [as_distribution(p, f"P{j + 1}") for j, p in enumerate(dists)]
    m = len(dists)
    if m < 2:
        raise DomainError("need at least two hypotheses")
    check_same_alphabet(*dists)
    g = np.full((m, m), np.inf)
    for i in range(m):
        for j in range(m):
            if i != j:
                g[i, j] = gjs(dists[i], dists[j], alpha)
    theta = g.min(axis=0)
    istar = g.argmin(axis=0)
    for j in range(m):
        col = np.sort(g[:, j])
        if m > 2 and col[1] - col[0] <= UNIQUENESS_TOL:
            raise AssumptionViolation(f"nearest competitor of hypothesis {j + 1} is not unique")
        if theta[j] == 0:
            raise AssumptionViolation(f"hypothesis {j + 1} coincides with another")
    j1 = tuple(int(j) for j in np.flatnonzero(theta - theta.min() <= UNIQUENESS_TOL))
    if epsilon is None:
        j2 = j1
    else:
        eps = np.broadcast_to(np.asarray(epsilon, float), (m,))
        second = np.array([math.sqrt(dispersion_v(dists[istar[j]], dists[j], alpha))
                           * std_normal_inv_cdf(eps[j]) for j in j1])
        j2 = tuple(j for j, s in zip(j1, second) if s - second.min() <= UNIQUENESS_TOL)
    return MultiStructure(theta, istar, j1, j2)


def multi_threshold(dists, alpha, n, epsilon):
    """min_j GJS(P_istar(j), P_j) + sqrt(V(P_istar(j), P_j) / n) Phi^-1(eps_j)."""
    if n < 2:
        raise DomainError("multi threshold needs n >= 2")
    st = multi_structure(dists, alpha)
    m = len(dists)
    eps = np.broadcast_to(np.asarray(epsilon, float), (m,))
    vals = []
    for j in range(m):
        pi, pj = dists[st.istar[j]], dists[j]
        v = dispersion_v(pi, pj, alpha)
        vals.append(gjs(pi, pj, alpha) + math.sqrt(v / n) * std_normal_inv_cdf(_check_eps(eps[j])))
    return max(min(vals), 0.0)


def second_order_region_check(l1, l2, p1, p2, alpha, epsilon):
    """Phi(L1 / sqrt V(P1,P2)) + Phi(L2 / sqrt V(P2,P1)) <= eps, for any real L."""
    v12 = dispersion_v(p1, p2, alpha)
    v21 = dispersion_v(p2, p1, alpha)
    if v12 == 0 or v21 == 0:
        raise DomainError("dispersion is zero; region undefined")
    total = std_normal_cdf(l1 / math.sqrt(v12)) + std_normal_cdf(l2 / math.sqrt(v21))
    return total <= epsilon


# ---------------------------------------------------------------------------
# rules on GJS statistics


def decide_gutman_binary(g, lam):
    """0 (H1) where g <= lam, else 1 (H2)."""
    return np.where(np.asarray(g) <= lam, 0, 1)


def decide_binary_reject(g1, g2, lam1, lam2):
    g1, g2 = np.asarray(g1), np.asarray(g2)
    return np.where(g2 > lam2, 0, np.where(g1 > lam1, 1, REJECT))


def decide_unnikrishnan(g, lam):
    """Codes and tie flags for statistics ``g`` of shape (..., M)."""
    g = np.asarray(g, float)
    istar = np.argmin(g, axis=-1)
    two = np.partition(g, 1, axis=-1)
    gmin, h = two[..., 0], two[..., 1]
    tie = h == gmin
    return np.where(h >= lam, istar, REJECT), tie


def decide_gutman_multi(g, lam):
    """First clause wins: H1 when every other statistic exceeds lam;
    H_j (j > 1) when g_j <= lam and every other statistic exceeds lam."""
    g = np.asarray(g, float)
    m = g.shape[-1]
    out = np.full(g.shape[:-1], REJECT)
    undecided = np.ones(g.shape[:-1], bool)
    for j in range(m):
        others = np.delete(g, j, axis=-1).min(axis=-1) > lam
        fire = others if j == 0 else others & (g[..., j] <= lam)
        fire &= undecided
        out = np.where(fire, j, out)
        undecided &= ~fire
    return out


# ---------------------------------------------------------------------------
# rules on sequences


def _types(seqs):
    k = 2
    for s in seqs:
        s = np.asarray(s)
        if s.size == 0:
            raise DomainError("empty sequence")
        if np.issubdtype(s.dtype, np.integer):
            k = max(k, int(s.max()) + 1)
    return [empirical_type(s, k).distribution for s in seqs]


def _check_lengths(xs, y, alpha):
    big_n = training_length(len(y), alpha)
    for x in xs:
        if len(x) != big_n:
            warnings.warn(f"training length {len(x)} differs from ceil(alpha n) = {big_n}",
                          stacklevel=3)


def gutman_binary_classify(x1, y, alpha, lam, x2=None):
    """H1 iff GJS(type(x1), type(y), alpha) <= lam. ``x2`` is ignored."""
    _check_lengths([x1], y, alpha)
    t1, ty = _types([x1, y])
    return Verdict.from_code(decide_gutman_binary(gjs_types(t1, ty, alpha), lam))


def binary_reject_classify(x1, x2, y, alpha, lam1, lam2):
    """H1 if g2 > lam2; else H2 if g1 > lam1; else reject."""
    _check_lengths([x1, x2], y, alpha)
    t1, t2, ty = _types([x1, x2, y])
    code = decide_binary_reject(gjs_types(t1, ty, alpha), gjs_types(t2, ty, alpha), lam1, lam2)
    return Verdict.from_code(code)


def _multi_stats(xs, y, alpha):
    if len(xs) < 2:
        raise DomainError("need at least two training sequences")
    _check_lengths(xs, y, alpha)
    types = _types(list(xs) + [y])
    ty = types[-1]
    return np.array([gjs_types(t, ty, alpha) for t in types[:-1]])


def unnikrishnan_classify(xs, y, alpha, lam):
    """Nearest training type, unless the runner-up is also within lam."""
    code, tie = decide_unnikrishnan(_multi_stats(xs, y, alpha), lam)
    return Verdict.from_code(code, tie)


def gutman_multi_classify(xs, y, alpha, lam):
    return Verdict.from_code(decide_gutman_multi(_multi_stats(xs, y, alpha), lam))
