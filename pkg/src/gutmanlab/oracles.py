"""Brute-force grid oracles for the binary-alphabet exponent programs.

Exhaustive scans over Bernoulli parameters. Slow and coarse, but they share
no code path with the Lagrangian solvers, so they serve as independent checks.
"""

import numpy as np

from .divergences import _rel_terms, gjs_types


def _bern_grid(step):
    a = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    return np.stack([1.0 - a, a], axis=-1)


def _kl_grid(q, p):
    p = np.asarray(p, float)
    bad = np.any((q > 0) & (p == 0), axis=-1)
    vals = _rel_terms(q, np.broadcast_to(p, q.shape)).sum(axis=-1)
    return np.where(bad, np.inf, np.maximum(vals, 0.0))


def grid_exponent_f(p1, p2, alpha, lam, step=1e-3):
    """Grid minimum of alpha D(Q1||P1) + D(Q2||P2) over GJS(Q1, Q2) <= lam."""
    q = _bern_grid(step)
    o1 = alpha * _kl_grid(q, p1)
    o2 = _kl_grid(q, p2)
    g = gjs_types(q[:, None, :], q[None, :, :], alpha)
    obj = np.where(g <= lam, o1[:, None] + o2[None, :], np.inf)
    return float(obj.min())


def grid_exponent_k(pj, pi, pk, alpha, lam, step=2e-3):
    """Grid minimum of the three-law program.

    For fixed Q1 the Q2 and Q3 terms decouple, so each is minimised
    separately over its own feasible set.
    """
    q = _bern_grid(step)
    o1 = _kl_grid(q, pj)
    o2 = alpha * _kl_grid(q, pi)
    o3 = alpha * _kl_grid(q, pk)
    # rows index Q1, columns index the other argument
    feas = gjs_types(q[None, :, :], q[:, None, :], alpha) <= lam
    best2 = np.where(feas, o2[None, :], np.inf).min(axis=1)
    best3 = np.where(feas, o3[None, :], np.inf).min(axis=1)
    return float(np.min(o1 + best2 + best3))
