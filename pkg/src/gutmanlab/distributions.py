"""Finite-alphabet distributions, empirical types and seeded sampling.

Distributions are plain 1-D float arrays indexed by symbol ``0..|X|-1``;
``as_distribution`` validates and returns a read-only copy.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

SUM_TOL = 1e-12


def as_distribution(probs, name="distribution"):
    p = np.array(probs, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError(f"{name} must be a vector over at least 2 symbols")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise DomainError(f"{name} sums to {p.sum():.15g}, not 1")
    p.setflags(write=False)
    return p


def bernoulli(p):
    """Bern(p) on {0, 1}: probability ``p`` on symbol 1."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Bernoulli parameter must be in [0, 1], got {p}")
    return as_distribution([1.0 - p, p])


def point_mass(symbol, alphabet_size):
    p = np.zeros(alphabet_size)
    p[symbol] = 1.0
    return as_distribution(p)


def check_same_alphabet(*dists):
    sizes = {len(d) for d in dists}
    if len(sizes) != 1:
        raise DomainError(f"alphabet mismatch: sizes {sorted(sizes)}")


def support(p):
    return np.asarray(p) > 0


@dataclass(frozen=True)
class EmpiricalType:
    """Symbol counts of a sequence of length ``n``."""

    counts: tuple
    n: int

    def __post_init__(self):
        if self.n < 1 or sum(self.counts) != self.n or min(self.counts) < 0:
            raise DomainError("counts must be nonnegative and sum to n >= 1")

    @classmethod
    def from_counts(cls, counts):
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts))

    @property
    def alphabet_size(self):
        return len(self.counts)

    @property
    def distribution(self):
        return as_distribution(np.asarray(self.counts, dtype=float) / self.n)


def empirical_type(seq, alphabet_size):
    seq = np.asarray(seq)
    if seq.size == 0:
        raise DomainError("empirical type of an empty sequence")
    if seq.ndim != 1 or not np.issubdtype(seq.dtype, np.integer):
        raise DomainError("sequence must be a 1-D array of integer symbols")
    if seq.min() < 0 or seq.max() >= alphabet_size:
        raise DomainError(f"symbol outside alphabet [0, {alphabet_size - 1}]")
    return EmpiricalType.from_counts(np.bincount(seq, minlength=alphabet_size))


def training_length(n, alpha):
    """N = ceil(alpha * n)."""
    # guard against float fuzz such as 2.0000000000000004 * n
    x = alpha * n
    r = round(x)
    return int(r) if abs(x - r) < 1e-9 else math.ceil(x)


def make_stream(seed, *key):
    """Counter-based generator for ``(seed, *key)``.

    Philox keyed through SeedSequence; identical keys reproduce identical draws
    regardless of the order in which streams are created.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample(dist, n, stream):
    """n i.i.d. symbols from ``dist``."""
    if n < 1:
        raise DomainError("sample length must be at least 1")
    p = as_distribution(dist)
    return stream.choice(len(p), size=int(n), p=p)


def mixture(p1, p2, alpha):
    """(alpha * P1 + P2) / (1 + alpha), entrywise."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    check_same_alphabet(p1, p2)
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    return mix_arrays(p1, p2, alpha)


def mix_arrays(q1, q2, alpha):
    # written as q2 + w (q1 - q2) so that q1 == q2 returns q2 bit-for-bit
    w = alpha / (1.0 + alpha)
    return q2 + w * (q1 - q2)


def in_typical_set(t, p, n):
    """True iff max_x |t(x) - P(x)| <= sqrt(log n / n)."""
    if n < 2:
        raise DomainError("typical set needs n >= 2")
    if t.n != n:
        raise DomainError(f"type has length {t.n}, expected {n}")
    p = as_distribution(p)
    check_same_alphabet(t.counts, p)
    dev = np.max(np.abs(np.asarray(t.counts) / n - p))
    return bool(dev <= math.sqrt(math.log(n) / n))


def enumerate_types(n, alphabet_size):
    """All count vectors of length ``alphabet_size`` summing to ``n``.

    Returns an int array of shape (C(n + k - 1, k - 1), k).
    """
    k = alphabet_size
    if k == 1:
        return np.array([[n]])
    if k == 2:
        c = np.arange(n + 1)
        return np.stack([n - c, c], axis=1)
    rows = []
    for first in range(n, -1, -1):
        rest = enumerate_types(n - first, k - 1)
        rows.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.concatenate(rows)


def count_types(n, alphabet_size):
    return math.comb(n + alphabet_size - 1, alphabet_size - 1)
