"""Monte Carlo plumbing: sample sets, KS distances, and power estimation.

Replication is deterministic: replica i draws from substream i of the
caller's base stream and reductions run in fixed replica order, so a
repeated call with the same (seed, replicas) is bit-identical no matter
how the work is scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np

from .graphcore import RngStream

T = TypeVar("T")


@dataclass(frozen=True)
class SampleSet:
    """Scalar statistic samples plus provenance tags."""

    values: np.ndarray
    model_tag: str = ""
    seed_info: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("SampleSet needs a nonempty 1-d value array")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class MeanVar:
    mean: float
    variance: float
    standard_error: float


@dataclass(frozen=True)
class PowerReport:
    """Threshold-test summary for a null/alternative sample pair."""

    power: float
    size: float
    threshold: float
    replicas: int
    power_se: float
    size_se: float
    mean_null: float
    mean_alt: float
    sd_null: float
    sd_alt: float


def mean_var(values: Sequence[float] | np.ndarray | SampleSet) -> MeanVar:
    """Sample mean, unbiased variance, and standard error of the mean."""
    if isinstance(values, SampleSet):
        values = values.values
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least two samples")
    m = float(x.mean())
    v = float(x.var(ddof=1))
    return MeanVar(m, v, float(np.sqrt(v / x.size)))


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|."""
    xa = np.sort(_values(a))
    xb = np.sort(_values(b))
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / xa.size
    fb = np.searchsorted(xb, grid, side="right") / xb.size
    return float(np.abs(fa - fb).max())


def ks_distance_cdf(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample KS statistic of samples against a reference CDF."""
    x = np.sort(_values(samples))
    n = x.size
    fx = np.asarray(cdf(x), dtype=np.float64)
    upper = np.arange(1, n + 1) / n - fx
    lower = fx - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def tv_lower_bound(a, b) -> float:
    """Lower bound on the total variation distance between the two sampled
    distributions.

    Any event gives a TV lower bound; the KS statistic optimizes over
    half-line events, so it never exceeds the true TV up to sampling
    fluctuations and is exactly the TV in the large-sample limit for
    distributions whose densities cross once.
    """
    return ks_distance(a, b)


def weighted_midpoint(m0: float, s0: float, m1: float, s1: float) -> float:
    """Threshold between two sample clouds: the standard-deviation-weighted
    midpoint of the means, which equalizes the two Chebyshev tail bounds.
    Falls back to the plain midpoint when both spreads vanish."""
    if s0 + s1 == 0.0:
        return (m0 + m1) / 2.0
    return (m0 * s1 + m1 * s0) / (s0 + s1)


def power_test(gen_null: Callable[[RngStream], T],
               gen_alt: Callable[[RngStream], T],
               statistic: Callable[[T], float],
               replicas: int,
               rng: RngStream,
               jobs: int = 1) -> PowerReport:
    """Estimate size and power of the threshold test separating two models.

    The threshold is the standard-deviation-weighted midpoint of the two
    sample means, which equalizes the two Chebyshev tail bounds.  The
    test rejects toward the alternative mean.  Null replica i uses
    substream i, alternative replica i uses substream replicas + i.
    """
    if replicas < 100:
        raise ValueError("need at least 100 replicas")
    null_vals = replicate(lambda s: statistic(gen_null(s)), replicas, rng, jobs=jobs)
    alt_vals = replicate(lambda s: statistic(gen_alt(s)), replicas, rng,
                         jobs=jobs, offset=replicas)
    return power_from_samples(null_vals, alt_vals)


def power_from_samples(null_vals: np.ndarray, alt_vals: np.ndarray) -> PowerReport:
    """PowerReport for precomputed statistic samples; the test rejects on
    the alternative's side of the weighted midpoint."""
    null_vals = _values(null_vals)
    alt_vals = _values(alt_vals)
    if null_vals.size != alt_vals.size or null_vals.size < 2:
        raise ValueError("need equal sample counts of at least 2")
    replicas = null_vals.size
    m0, m1 = float(null_vals.mean()), float(alt_vals.mean())
    s0, s1 = float(null_vals.std(ddof=1)), float(alt_vals.std(ddof=1))
    thr = weighted_midpoint(m0, s0, m1, s1)
    if m1 >= m0:
        power = float((alt_vals >= thr).mean())
        size = float((null_vals >= thr).mean())
    else:
        power = float((alt_vals <= thr).mean())
        size = float((null_vals <= thr).mean())
    return PowerReport(
        power=power, size=size, threshold=float(thr), replicas=replicas,
        power_se=_binom_se(power, replicas), size_se=_binom_se(size, replicas),
        mean_null=m0, mean_alt=m1, sd_null=s0, sd_alt=s1,
    )


def replicate(fn: Callable[[RngStream], float], replicas: int, rng: RngStream,
              jobs: int = 1, offset: int = 0) -> np.ndarray:
    """Evaluate fn on substreams offset..offset+replicas-1 in index order.

    jobs > 1 fans the evaluations out over threads; results are written
    back by replica index, so the output is independent of jobs.
    """
    if replicas < 1:
        raise ValueError("replicas must be positive")
    streams = [rng.substream(offset + i) for i in range(replicas)]
    if jobs <= 1:
        return np.array([fn(s) for s in streams], dtype=np.float64)
    out = np.empty(replicas, dtype=np.float64)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for i, val in enumerate(pool.map(fn, streams)):
            out[i] = val
    return out


def _values(x) -> np.ndarray:
    if isinstance(x, SampleSet):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a nonempty 1-d sample array")
    return arr


def _binom_se(p: float, n: int) -> float:
    return float(np.sqrt(p * (1.0 - p) / n))
