"""Probabilistic range oracle.

Machine ``M`` reads two validity qubits prepared over uniform superpositions
of all ``N`` tours, ``m`` of which fall in the queried range, and answers
``False`` only when both read 0. The probability of that event is
``(1 - m/N) * (sqrt(1 - m/N) - sqrt(m/N))**2 / 2``: exactly 1/2 when
``m = 0`` and strictly below 1/2 otherwise, with a gap that shrinks as
``N`` grows. Repetition therefore cannot sharpen the verdict reliably.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .distsim import LengthDistribution
from .errors import OutOfRangeError, UsageError

POLICIES = ("strict", "permissive")


@dataclass(frozen=True)
class RangeQuery:
    """Tour-length interval ``[lo, hi)`` with verifier slack ``delta``."""

    lo: float
    hi: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise OutOfRangeError(f"empty range [{self.lo}, {self.hi})")
        if self.delta < 0:
            raise OutOfRangeError(f"delta must be >= 0, got {self.delta}")

    def upper(self, policy: str = "strict") -> float:
        if policy == "strict":
            return self.hi
        if policy == "permissive":
            return self.hi + self.delta
        raise ValueError(f"unknown slack policy {policy!r}; expected one of {POLICIES}")

    def mask(self, lengths: np.ndarray, policy: str = "strict") -> np.ndarray:
        return (lengths >= self.lo) & (lengths < self.upper(policy))


@dataclass(frozen=True)
class OracleOutcome:
    answer: bool
    trials: int
    true_count: int


def count_in_range(dist: LengthDistribution, q: RangeQuery, policy: str = "strict") -> tuple[int, int]:
    m = int(np.count_nonzero(q.mask(np.asarray(dist.lengths), policy)))
    return m, len(dist.lengths)


def both_zero_probability(m: int, N: int) -> float:
    if N < 1:
        raise OutOfRangeError(f"N must be >= 1, got {N}")
    if not 0 <= m <= N:
        raise OutOfRangeError(f"m={m} outside [0, N={N}]")
    frac = m / N
    return (1 - frac) * (math.sqrt(1 - frac) - math.sqrt(frac)) ** 2 / 2


def oracle_sample(m: int, N: int, rng: np.random.Generator) -> bool:
    """One run of ``M``: False with the both-zero probability."""
    return bool(rng.random() >= both_zero_probability(m, N))


def oracle_repeated(m: int, N: int, trials: int, rng: np.random.Generator) -> OracleOutcome:
    """Majority vote over ``trials`` runs.

    The vote is only meaningful when ``0.5 - both_zero_probability(m, N)``
    is large compared with ``1/sqrt(trials)``; for ``m = 0`` it is a fair
    coin regardless of ``trials``.
    """
    if trials < 1 or trials % 2 == 0:
        raise UsageError(f"trials must be a positive odd number, got {trials}")
    p_false = both_zero_probability(m, N)
    true_count = int(np.count_nonzero(rng.random(trials) >= p_false))
    return OracleOutcome(answer=2 * true_count > trials, trials=trials, true_count=true_count)


def oracle_exact(dist: LengthDistribution, q: RangeQuery, policy: str = "strict") -> bool:
    """The ideal oracle: are there any tours in the range?"""
    return count_in_range(dist, q, policy)[0] > 0


def amplification_gap(N: int) -> float:
    """``1/2 - both_zero_probability(1, N)``: the best-case margin a single valid tour buys."""
    return 0.5 - both_zero_probability(1, N)


def experiment(m: int, N: int, trials: int, rng: np.random.Generator) -> dict:
    """Empirical false rate of ``trials`` independent runs against the formula."""
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    p = both_zero_probability(m, N)
    false_count = int(np.count_nonzero(rng.random(trials) < p))
    return {"m": m, "N": N, "formula_p": p, "empirical_p": false_count / trials, "trials": trials}


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["m", "N", "formula_p", "empirical_p", "trials"],
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in writer.fieldnames})
    return buf.getvalue()
