"""Monte Carlo and exact evaluation of error probabilities.

Every rule depends on the samples only through their types, so trials draw
type counts directly (multinomial, or binomial for two symbols) instead of
sequences. Trials are grouped into fixed-size blocks; block ``b`` of
hypothesis ``h`` uses the stream ``make_stream(seed, b, h)``. The block layout
does not depend on the number of worker threads, so results never do either.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gammaln, xlogy

from .classifiers import REJECT, decide_gutman_multi, decide_unnikrishnan
from .distributions import (as_distribution, bernoulli, check_same_alphabet,
                            enumerate_types, make_stream, training_length)
from .divergences import gjs_types
from .errors import DomainError
from .exponents import ENUMERATION_BUDGET, check_budget, lattice_cells
from .special import chi2_cdf

BLOCK = 8192
RULES = {"unnikrishnan": lambda g, lam: decide_unnikrishnan(g, lam)[0],
         "gutman_multi": decide_gutman_multi}


@dataclass(frozen=True)
class SimulationReport:
    """Estimated probabilities with their binomial standard errors."""

    estimates: dict
    stderr: dict
    trials: int
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {"estimates": dict(self.estimates), "stderr": dict(self.stderr),
                "trials": self.trials, "seed": self.seed, "config": dict(self.config)}


@dataclass(frozen=True)
class ExactReport:
    """beta1 = P(GJS > lam | H1), beta2 = P(GJS <= lam | H2).

    The complements are summed separately over the rest of the lattice, so
    ``beta1 + beta1_complement`` checks the enumeration.
    """

    beta1: float
    beta2: float
    enumerated_cells: int
    beta1_complement: float
    beta2_complement: float


@dataclass(frozen=True)
class MaxType1Result:
    report: SimulationReport
    argmax: np.ndarray
    grid: np.ndarray
    beta1: np.ndarray


@dataclass(frozen=True)
class WeakConvergenceResult:
    ks_distance: float
    samples: np.ndarray
    degenerate: bool


def binomial_stderr(p, trials):
    return math.sqrt(p * (1.0 - p) / trials)


def _check_trials(trials):
    if trials < 1:
        raise DomainError("trials must be >= 1")


def _blocks(trials):
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(-(-trials // BLOCK))]


def _map_blocks(fn, trials, threads):
    blocks = _blocks(trials)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda bs: fn(*bs), blocks))
    return [fn(*bs) for bs in blocks]


def draw_types(rng, p, length, size):
    """``size`` type vectors (as frequencies) of i.i.d. length-``length`` samples."""
    p = np.asarray(p, float)
    if len(p) == 2:
        c = rng.binomial(length, p[1], size=size)
        counts = np.stack([length - c, c], axis=1)
    else:
        counts = rng.multinomial(length, p, size=size)
    return counts / length


def _report(counts, trials, seed, config):
    est = {k: v / trials for k, v in counts.items()}
    err = {k: binomial_stderr(v, trials) for k, v in est.items()}
    return SimulationReport(est, err, trials, int(seed), config)


def mc_binary(p1, p2, alpha, n, lam, trials, seed, threads=1):
    """Monte Carlo type-I and type-II error of the binary rule.

    beta1: H1 trials (X1, Y ~ P1) with GJS > lam. beta2: H2 trials
    (X1 ~ P1, Y ~ P2) with GJS <= lam.
    """
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    check_same_alphabet(p1, p2)
    _check_trials(trials)
    big_n = training_length(n, alpha)

    def block(b, size):
        out = []
        for h, law in enumerate((p1, p2)):
            rng = make_stream(seed, b, h)
            t1 = draw_types(rng, p1, big_n, size)
            ty = draw_types(rng, law, n, size)
            g = gjs_types(t1, ty, alpha)
            out.append(int(np.sum(g > lam)) if h == 0 else int(np.sum(g <= lam)))
        return out

    parts = np.sum(_map_blocks(block, trials, threads), axis=0)
    config = {"p1": p1.tolist(), "p2": p2.tolist(), "alpha": alpha, "n": n, "lambda": lam}
    return _report({"beta1": int(parts[0]), "beta2": int(parts[1])}, trials, seed, config)


def log_multinomial(counts, p):
    """log P(type = counts) under i.i.d. draws from ``p``; rows of ``counts``."""
    counts = np.asarray(counts, float)
    length = counts.sum(axis=-1)
    with np.errstate(divide="ignore"):
        return (gammaln(length + 1) - gammaln(counts + 1).sum(axis=-1)
                + xlogy(counts, np.asarray(p, float)).sum(axis=-1))


def exact_binary(p1, p2, alpha, n, lam, budget=ENUMERATION_BUDGET, chunk=2**22):
    """Exact error probabilities of the binary rule by summing over type pairs."""
    p1 = as_distribution(p1, "P1")
    p2 = as_distribution(p2, "P2")
    check_same_alphabet(p1, p2)
    k = len(p1)
    check_budget(n, alpha, k, budget)
    big_n = training_length(n, alpha)
    c1 = enumerate_types(big_n, k)
    cy = enumerate_types(n, k)
    w1 = np.exp(log_multinomial(c1, p1))
    wy1 = np.exp(log_multinomial(cy, p1))
    wy2 = np.exp(log_multinomial(cy, p2))
    t1, ty = c1 / big_n, cy / n
    b1 = b1c = b2 = b2c = 0.0
    rows = max(1, chunk // len(ty))
    for s in range(0, len(t1), rows):
        accept = gjs_types(t1[s:s + rows, None, :], ty[None, :, :], alpha) <= lam
        w = w1[s:s + rows]
        b1c += w @ (accept @ wy1)
        b1 += w @ (~accept @ wy1)
        b2 += w @ (accept @ wy2)
        b2c += w @ (~accept @ wy2)
    clip = lambda x: min(max(float(x), 0.0), 1.0)
    return ExactReport(clip(b1), clip(b2), lattice_cells(n, alpha, k), clip(b1c), clip(b2c))


def mc_multi(dists, alpha, n, lam, rule, trials, seed, threads=1):
    """Per-hypothesis error (beta_j) and rejection (zeta_j) rates of an M-ary rule."""
    if rule not in RULES:
        raise DomainError(f"unknown rule {rule!r}; choose from {sorted(RULES)}")
    dists = [as_distribution(p, f"P{j + 1}") for j, p in enumerate(dists)]
    if len(dists) < 2:
        raise DomainError("need at least two hypotheses")
    check_same_alphabet(*dists)
    _check_trials(trials)
    m = len(dists)
    big_n = training_length(n, alpha)
    decide = RULES[rule]

    def block(b, size):
        out = np.zeros((m, 2), dtype=np.int64)
        for j in range(m):
            rng = make_stream(seed, b, j)
            train = np.stack([draw_types(rng, p, big_n, size) for p in dists], axis=1)
            ty = draw_types(rng, dists[j], n, size)
            codes = decide(gjs_types(train, ty[:, None, :], alpha), lam)
            out[j, 0] = np.sum((codes != j) & (codes != REJECT))
            out[j, 1] = np.sum(codes == REJECT)
        return out

    parts = np.sum(_map_blocks(block, trials, threads), axis=0)
    counts = {}
    for j in range(m):
        counts[f"beta{j + 1}"] = int(parts[j, 0])
        counts[f"zeta{j + 1}"] = int(parts[j, 1])
    config = {"dists": [p.tolist() for p in dists], "alpha": alpha, "n": n,
              "lambda": lam, "rule": rule}
    return _report(counts, trials, seed, config)


def max_type1_search(alpha, n, lam, grid_step, trials_per_point, seed, threads=1):
    """Largest Monte Carlo type-I error over Bern(p), p on a grid in (0, 1).

    Under H1 both the training and test samples follow the same law, so the
    type-I error depends on that law alone.
    """
    if not 0.0 < grid_step < 0.5:
        raise DomainError("grid_step must lie in (0, 0.5)")
    _check_trials(trials_per_point)
    big_n = training_length(n, alpha)
    grid = np.arange(1, int(round(1.0 / grid_step))) * grid_step
    grid = grid[grid < 1.0]

    def point(idx):
        law = bernoulli(grid[idx])
        hits = 0
        for b, size in _blocks(trials_per_point):
            rng = make_stream(seed, idx, b)
            g = gjs_types(draw_types(rng, law, big_n, size), draw_types(rng, law, n, size), alpha)
            hits += int(np.sum(g > lam))
        return hits / trials_per_point

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            beta1 = np.array(list(pool.map(point, range(len(grid)))))

    else:
        beta1 = np.array([point(i) for i in range(len(grid))])
    best = int(np.argmax(beta1))
    est = float(beta1[best])
    config = {"alpha": alpha, "n": n, "lambda": lam, "grid_step": grid_step,
              "argmax_p": float(grid[best])}
    report = SimulationReport({"max_beta1": est},
                              {"max_beta1": binomial_stderr(est, trials_per_point)},
                              trials_per_point, int(seed), config)
    return MaxType1Result(report, bernoulli(grid[best]), grid, beta1)


def ks_distance(samples, cdf):
    """Kolmogorov-Smirnov distance between the empirical law of ``samples``
    and a continuous cdf."""
    x = np.sort(np.asarray(samples, float))
    m = len(x)
    f = np.array([cdf(v) for v in x])
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(m) / m
    return float(max(upper.max(), lower.max()))


def weak_convergence_check(p, alpha, n, trials, seed, threads=1):
    """KS distance between the law of 2n GJS under H1 and chi^2_{|X|-1}.

    A law with a single support point makes the statistic identically 0;
    this is reported with ``degenerate=True``.
    """
    p = as_distribution(p)
    _check_trials(trials)
    big_n = training_length(n, alpha)

    def block(b, size):
        rng = make_stream(seed, b, 0)
        return 2 * n * gjs_types(draw_types(rng, p, big_n, size), draw_types(rng, p, n, size), alpha)

    samples = np.concatenate(_map_blocks(block, trials, threads))
    dof = len(p) - 1
    degenerate = bool(np.count_nonzero(p) < 2)
    return WeakConvergenceResult(ks_distance(samples, lambda v: chi2_cdf(dof, v)),
                                 samples, degenerate)
