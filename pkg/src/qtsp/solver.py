"""End-to-end solvers and exact baselines.

``solve_gaussian`` tilts the tour distribution towards short tours and keeps
the best of a batch of readouts. ``solve_oracle`` scans epsilon-wide length
bins from 2 upwards, asks the range oracle about each, and projects the
uniform wave onto the first bin that answers yes. The exact baselines
(``held_karp``, ``brute_force``) supply the optimum the approximations are
checked against.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .distsim import (
    LengthDistribution,
    boltzmann_exact,
    enumerate_lengths,
    gaussian_fit,
    sis_draws,
)
from .errors import DegenerateFitError, OutOfRangeError, SearchFailureError, SizeLimitError
from .geometry import EuclideanInstance, tour_length
from .oracle import RangeQuery, count_in_range, oracle_exact, oracle_repeated
from .permcode import ENUMERATION_LIMIT, Perm, decode, unrank
from .wavesim import sample_ranks

HELD_KARP_LIMIT = 15
BOUND_TOL = 1e-9

# Default instantiation of the unspecified resource constants.
REPETITION_CONSTANT = 4.0
FAIL_PROBABILITY = 1e-3
PILOT_SIZE = 10_000


@dataclass
class SolveResult:
    tour: Perm
    length: float
    samples_used: int = 0
    oracle_calls: int = 0
    opt: float | None = None
    opt_gap: float | None = None
    details: dict = field(default_factory=dict)

    def with_baseline(self, opt: float) -> "SolveResult":
        self.opt = opt
        self.opt_gap = self.length - opt
        return self

    def to_json(self, seed: int | None = None) -> dict:
        out = asdict(self)
        out["tour"] = list(self.tour)
        out["seed"] = seed
        return out


@dataclass(frozen=True)
class BinIndexing:
    """Epsilon-wide bins tiling ``[2, sqrt(2) n)``, numbered from 1.

    The outermost edges are widened (first bin down to ``2 - 1e-9``, last bin
    to infinity) so lengths at the proven bounds are never lost to rounding.
    """

    n: int
    eps: float
    lo: float = 2.0

    def __post_init__(self):
        if not self.eps > 0:
            raise OutOfRangeError(f"epsilon must be positive, got {self.eps}")
        if self.n < 2:
            raise OutOfRangeError(f"n must be >= 2, got {self.n}")

    @property
    def hi(self) -> float:
        return math.sqrt(2.0) * self.n

    @property
    def count(self) -> int:
        return max(1, math.ceil((self.hi - self.lo) / self.eps))

    def edges(self, i: int) -> tuple[float, float]:
        if not 1 <= i <= self.count:
            raise OutOfRangeError(f"bin {i} outside [1, {self.count}]")
        left = self.lo - BOUND_TOL if i == 1 else self.lo + (i - 1) * self.eps
        right = math.inf if i == self.count else self.lo + i * self.eps
        return left, right

    def query(self, i: int, delta: float = 0.0) -> RangeQuery:
        left, right = self.edges(i)
        return RangeQuery(lo=left, hi=right, delta=delta)


def bin_of(length: float, bins: BinIndexing) -> int:
    """1-based bin holding ``length``; bins are half-open so a boundary belongs to the upper bin."""
    if length < bins.lo - BOUND_TOL:
        raise OutOfRangeError(f"length {length} below the lower bound {bins.lo}")
    i = math.floor((length - bins.lo) / bins.eps) + 1
    i = min(max(i, 1), bins.count)
    # reconcile the floor with the edges actually used for queries
    while i > 1 and length < bins.edges(i)[0]:
        i -= 1
    while i < bins.count and length >= bins.edges(i)[1]:
        i += 1
    return i


def _dist(inst: EuclideanInstance) -> np.ndarray:
    return np.ascontiguousarray(inst.distance_matrix())


def held_karp(inst: EuclideanInstance) -> tuple[float, Perm]:
    if not 2 <= inst.n <= HELD_KARP_LIMIT:
        raise SizeLimitError(f"held_karp supports 2 <= n <= {HELD_KARP_LIMIT}, got {inst.n}")
    length, tour = kernels.held_karp(_dist(inst))
    return float(length), tuple(int(v) + 1 for v in tour)


def brute_force(inst: EuclideanInstance, limit: int | None = None) -> tuple[float, Perm]:
    dist = enumerate_lengths(inst, limit)
    r = int(np.argmin(dist.lengths))
    return float(dist.lengths[r]), decode(unrank(r, inst.n))


def nearest_neighbor(inst: EuclideanInstance) -> tuple[float, Perm]:
    """Best greedy nearest-neighbour tour over all start points."""
    dist = _dist(inst)
    best = None
    for s in range(inst.n):
        length, tour = kernels.nearest_neighbor(dist, s)
        if best is None or length < best[0]:
            best = (float(length), tuple(int(v) + 1 for v in tour))
    return best


def _pilot_lengths(inst, table, pilot, rng):
    if table is not None:
        return table.lengths[rng.integers(0, len(table.lengths), size=pilot)]
    perms = rng.permuted(np.tile(np.arange(inst.n), (pilot, 1)), axis=1)
    return kernels.tour_lengths(_dist(inst), perms)


def solve_gaussian(
    inst: EuclideanInstance,
    epsilon: float,
    rng: np.random.Generator,
    alpha: float | None = None,
    repetitions: int | None = None,
    pilot: int = PILOT_SIZE,
    c: float = REPETITION_CONSTANT,
    fail: float = FAIL_PROBABILITY,
    limit: int | None = None,
    table: LengthDistribution | None = None,
) -> SolveResult:
    """Sample tours from the alpha-tilted distribution and keep the shortest.

    With ``alpha`` unset, ``ln alpha = (mu - x_min) / sigma^2`` moves the
    centre of the tilted pilot Gaussian onto the estimated shortest length.
    With ``repetitions`` unset, ``K = ceil(c (sigma/x_min)^2 ln(1/fail) / eps^2)``.
    Readouts come from the exact tilted table when ``n`` is within the
    enumeration limit, otherwise from importance-resampled sequential draws.
    """
    if not epsilon > 0:
        raise OutOfRangeError(f"epsilon must be positive, got {epsilon}")
    limit = ENUMERATION_LIMIT if limit is None else limit
    n = inst.n
    exact = n <= limit
    if exact and table is None:
        table = enumerate_lengths(inst, limit)

    pilot_lengths = _pilot_lengths(inst, table if exact else None, pilot, rng)
    nn_length, nn_tour = nearest_neighbor(inst)
    x_min_hat = min(float(pilot_lengths.min()), nn_length)
    try:
        fit = gaussian_fit(pilot_lengths)
    except DegenerateFitError:
        # every tour has the same length (n <= 3): any tour is optimal
        return SolveResult(tour=nn_tour, length=tour_length(inst, nn_tour), samples_used=0,
                           details={"pilot": pilot, "degenerate": True})

    if alpha is None:
        log_alpha = max((fit.mu - x_min_hat) / fit.sigma ** 2, 1e-12)
        alpha = math.exp(log_alpha)
    if repetitions is None:
        p_n = fit.sigma / x_min_hat
        repetitions = math.ceil(c * p_n ** 2 * math.log(1 / fail) / epsilon ** 2)
    repetitions = max(int(repetitions), 1)

    if exact:
        probs = boltzmann_exact(table, alpha)
        ranks = sample_ranks(probs, repetitions, rng)
        lengths = table.lengths[ranks]
        k = int(np.argmin(lengths))
        tour = decode(unrank(int(ranks[k]), n))
    else:
        codes, lengths, log_w = sis_draws(inst, alpha, repetitions, rng)
        w = np.exp(log_w - log_w.max())
        picks = sample_ranks(w / w.sum(), repetitions, rng)
        lengths = lengths[picks]
        k = int(np.argmin(lengths))
        tour = decode(tuple(int(a) for a in codes[picks[k]]))

    return SolveResult(
        tour=tour,
        length=tour_length(inst, tour),
        samples_used=repetitions,
        details={
            "alpha": alpha,
            "log_alpha": math.log(alpha),
            "repetitions": repetitions,
            "pilot": pilot,
            "mu_hat": fit.mu,
            "sigma_hat": fit.sigma,
            "x_min_hat": x_min_hat,
            "sampler": "exact-table" if exact else "sis-resampling",
        },
    )


def solve_oracle(
    inst: EuclideanInstance,
    epsilon: float,
    rng: np.random.Generator,
    mode: str = "exact",
    trials: int = 1001,
    policy: str = "strict",
    limit: int | None = None,
    table: LengthDistribution | None = None,
) -> SolveResult:
    """Linear range search with the oracle, then projection onto the first yes-bin.

    ``mode="exact"`` uses the ideal oracle; ``mode="sampled"`` runs the
    probabilistic machine ``trials`` times per bin and takes the majority.
    Raises :class:`SearchFailureError` when no bin answers yes or when the
    chosen bin is empty (projection onto a zero-amplitude component).
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    if table is None:
        table = enumerate_lengths(inst, limit)
    bins = BinIndexing(n=inst.n, eps=epsilon)
    delta = epsilon
    lengths = np.asarray(table.lengths)
    N = len(lengths)

    i0 = None
    calls = 0
    for i in range(1, bins.count + 1):
        q = bins.query(i, delta)
        calls += 1
        if mode == "exact":
            yes = oracle_exact(table, q, policy)
        else:
            m, _ = count_in_range(table, q, policy)
            yes = oracle_repeated(m, N, trials, rng).answer
        if yes:
            i0 = i
            break
    if i0 is None:
        raise SearchFailureError(f"no bin answered yes after {calls} oracle calls")

    members = np.flatnonzero(bins.query(i0, delta).mask(lengths, policy))
    if members.size == 0:
        raise SearchFailureError(f"bin {i0} answered yes but holds no tour; projection is empty",
                                 bin_index=i0)
    r = int(members[rng.integers(members.size)])
    tour = decode(unrank(r, inst.n))
    return SolveResult(
        tour=tour,
        length=tour_length(inst, tour),
        oracle_calls=calls,
        details={
            "i_0": i0,
            "bin": [v if math.isfinite(v) else None for v in bins.edges(i0)],
            "bin_count": bins.count,
            "bin_population": int(members.size),
            "delta": delta,
            "mode": mode,
            "policy": policy,
            **({"trials": trials} if mode == "sampled" else {}),
        },
    )
