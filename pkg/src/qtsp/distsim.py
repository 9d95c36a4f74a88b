"""Exact tour-length distributions and the tilted-Gaussian analysis.

Two coordinate systems appear here. :func:`sigma_ratio` works in raw
(normalized-instance) length units with the fitted Gaussian
``g(x) ~ exp(-(x - mu)^2 / (2 sigma^2))``. :func:`h_function` works in the
rescaled frame where the tilted Gaussian is ``exp(-x^2)`` centred at 0; a raw
length ``L`` maps to ``(L - c) / (sqrt(2) * sigma)`` with ``c = mu - ln(alpha) * sigma^2``
the centre after tilting, see :func:`to_h_coordinates`.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import kernels
from .errors import DegenerateFitError, DimensionError, OutOfRangeError
from .geometry import EuclideanInstance, length_bounds
from .permcode import Code, check_limit, unrank
from .wavesim import check_alpha, sample_ranks

QUAD_EPSABS = 1e-10
LENGTH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LengthDistribution:
    """``lengths[r]`` is the tour length of the code with rank ``r``."""

    lengths: np.ndarray
    n: int

    def __post_init__(self):
        if self.lengths.shape != (math.factorial(self.n),):
            raise DimensionError(f"table for n={self.n} must have {math.factorial(self.n)} entries")
        self.lengths.setflags(write=False)

    @property
    def x_min(self) -> float:
        return float(self.lengths.min())

    @property
    def x_max(self) -> float:
        return float(self.lengths.max())

    def within_bounds(self, tol: float = LENGTH_TOL) -> bool:
        lo, hi = length_bounds(self.n)
        return bool(self.lengths.min() >= lo - tol and self.lengths.max() <= hi + tol)


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    sigma: float
    sample_count: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise DegenerateFitError(f"sigma must be positive, got {self.sigma}")


def enumerate_lengths(inst: EuclideanInstance, limit: int | None = None) -> LengthDistribution:
    check_limit(inst.n, limit)
    dist = np.ascontiguousarray(inst.distance_matrix())
    return LengthDistribution(lengths=kernels.enumerate_lengths(dist), n=inst.n)


def boltzmann_exact(dist: LengthDistribution, alpha: float) -> np.ndarray:
    """``P(r) = alpha**-L_r / sum alpha**-L``, evaluated in log space."""
    logits = -math.log(check_alpha(alpha)) * np.asarray(dist.lengths)
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def boltzmann_sample(table: np.ndarray, rng: np.random.Generator) -> Code:
    n = _size_of(len(table))
    return unrank(int(sample_ranks(table, 1, rng)[0]), n)


def _size_of(count: int) -> int:
    n, f = 1, 1
    while f < count:
        n += 1
        f *= n
    if f != count:
        raise DimensionError(f"table size {count} is not a factorial")
    return n


def sis_draws(inst: EuclideanInstance, alpha: float, size: int, rng: np.random.Generator):
    """Batch of sequential insertion draws.

    Returns ``(codes, lengths, log_weights)`` where ``log_weights`` is
    ``log(alpha**-L / q)`` for the realized proposal probability ``q``.
    """
    log_alpha = math.log(check_alpha(alpha))
    dist = np.ascontiguousarray(inst.distance_matrix())
    uniforms = rng.random((size, inst.n - 1))
    codes, lengths, log_q = kernels.sis_draw(dist, log_alpha, uniforms)
    return codes, lengths, -log_alpha * lengths - log_q


def sis_sample(inst: EuclideanInstance, alpha: float, rng: np.random.Generator) -> tuple[Code, float]:
    codes, _, log_w = sis_draws(inst, alpha, 1, rng)
    return tuple(int(a) for a in codes[0]), float(math.exp(log_w[0]))


def self_normalized_mean(values: np.ndarray, log_weights: np.ndarray) -> tuple[float, float]:
    """Self-normalized importance estimate and its delta-method standard error."""
    w = np.exp(log_weights - log_weights.max())
    w /= w.sum()
    est = float(np.dot(w, values))
    se = float(math.sqrt(np.sum(w ** 2 * (values - est) ** 2)))
    return est, se


def gaussian_fit(samples: Sequence[float]) -> GaussianFit:
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise DegenerateFitError("need at least 2 samples")
    mu = float(x.mean())
    sigma = float(x.std(ddof=1))
    if sigma <= 1e-12 * max(1.0, abs(mu)):
        raise DegenerateFitError("samples have zero variance")
    return GaussianFit(mu=mu, sigma=sigma, sample_count=int(x.size))


def default_pq(fit: GaussianFit, x_min: float, x_max: float) -> tuple[float, float]:
    """Empirical ``p(n) = sigma/x_min`` and ``q(n) = x_max/sigma``.

    These satisfy ``x_min/sigma >= 1/p`` and ``x_max/sigma <= q`` with equality.
    """
    return fit.sigma / x_min, x_max / fit.sigma


def tilted_center(fit: GaussianFit, alpha: float) -> float:
    """Centre of ``alpha**-x * g(x)``: multiplying a Gaussian by ``e^{-lambda x}`` shifts it by ``-lambda sigma^2``."""
    return fit.mu - math.log(check_alpha(alpha)) * fit.sigma ** 2


def to_h_coordinates(fit: GaussianFit, alpha: float, x_min: float, x_max: float, epsilon: float):
    """Map a raw-units ``sigma_ratio`` query onto ``h_function`` arguments ``(x, eps_xmin, range_width)``."""
    c = tilted_center(fit, alpha)
    s = math.sqrt(2.0) * fit.sigma
    hi = min(x_min * (1 + epsilon), x_max)
    return (x_min - c) / s, (hi - x_min) / s, (x_max - x_min) / s


def sigma_ratio(
    source: LengthDistribution | GaussianFit,
    alpha: float,
    epsilon: float,
    x_min: float | None = None,
    x_max: float | None = None,
    mode: str | None = None,
) -> float:
    """Probability mass of tours within ``(1 + epsilon) * x_min`` under the tilted law.

    ``mode="exact"`` (default for a :class:`LengthDistribution`) sums the
    discrete table; ``mode="gaussian"`` integrates ``alpha**-x g(x)`` over
    ``[x_min, x_min (1+eps)]`` and ``[x_min, x_max]`` by adaptive quadrature,
    fitting ``g`` to the table first if given one. ``x_min``/``x_max`` default
    to the table extremes and are required when ``source`` is a fit.
    """
    log_alpha = math.log(check_alpha(alpha))
    if epsilon <= 0:
        raise OutOfRangeError(f"epsilon must be positive, got {epsilon}")
    if isinstance(source, LengthDistribution):
        x_min = source.x_min if x_min is None else x_min
        x_max = source.x_max if x_max is None else x_max
        mode = mode or "exact"
    else:
        if x_min is None or x_max is None:
            raise OutOfRangeError("x_min and x_max are required with a GaussianFit")
        mode = mode or "gaussian"
    if not x_min < x_max:
        raise OutOfRangeError(f"empty integration range [{x_min}, {x_max}]")
    upper = min(x_min * (1 + epsilon), x_max)

    if mode == "exact":
        if not isinstance(source, LengthDistribution):
            raise OutOfRangeError("exact mode needs a LengthDistribution")
        L = np.asarray(source.lengths)
        logits = -log_alpha * L
        w = np.exp(logits - logits.max())
        inside = (L >= x_min - LENGTH_TOL) & (L <= x_max + LENGTH_TOL)
        num = w[inside & (L <= upper + LENGTH_TOL)].sum()
        return float(num / w[inside].sum())
    if mode != "gaussian":
        raise ValueError(f"unknown mode {mode!r}")

    fit = gaussian_fit(source.lengths) if isinstance(source, LengthDistribution) else source
    mu, s2 = fit.mu, fit.sigma ** 2

    def log_integrand(x):
        return -log_alpha * x - (x - mu) ** 2 / (2 * s2)

    # subtract the maximum over [x_min, x_max] so large alpha cannot underflow
    peak = min(max(mu - log_alpha * s2, x_min), x_max)
    shift = log_integrand(peak)
    f = lambda x: math.exp(log_integrand(x) - shift)
    points = [peak] if x_min < peak < x_max else None
    if upper >= x_max:
        return 1.0
    den, _ = integrate.quad(f, x_min, x_max, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200,
                            points=points)
    num_points = [peak] if x_min < peak < upper else None
    num, _ = integrate.quad(f, x_min, upper, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200,
                            points=num_points)
    return float(min(num / den, 1.0))


def h_function(x: float, eps_xmin: float, range_width: float) -> float:
    """``int_x^{x+eps_xmin} e^{-t^2} dt / int_x^{x+range_width} e^{-t^2} dt``."""
    if not eps_xmin > 0:
        raise OutOfRangeError(f"eps_xmin must be positive, got {eps_xmin}")
    if range_width < eps_xmin:
        raise OutOfRangeError(f"range_width {range_width} smaller than eps_xmin {eps_xmin}")
    if range_width == eps_xmin:
        return 1.0
    # with t = x + s, e^{-t^2} = e^{-x^2} e^{-2xs - s^2}; the e^{-x^2} factor cancels
    s_peak = min(max(-x, 0.0), range_width)
    shift = -2 * x * s_peak - s_peak ** 2
    f = lambda s: math.exp(-2 * x * s - s * s - shift)
    num, _ = integrate.quad(f, 0.0, eps_xmin, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)
    den, _ = integrate.quad(f, 0.0, range_width, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)
    return float(min(num / den, 1.0))


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionError(f"tables differ in shape: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def histogram(dist: LengthDistribution, bins: int | Sequence[float] = 20) -> list[tuple[float, float, int]]:
    counts, edges = np.histogram(dist.lengths, bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]


def histogram_csv(rows: list[tuple[float, float, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "count"])
    for lo, hi, c in rows:
        writer.writerow([repr(lo), repr(hi), c])
    return buf.getvalue()
