"""Polya urn simulators and limit-law checks.

Urns with nonnegative integer replacement matrices: single-run trajectories,
vectorized ensembles, the beta-binomial marginal law of the classical
two-color urn, and KS verification of the Beta / Dirichlet / scaled-Dirichlet
limits plus the sqrt-n scaling of the triangular replacement rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import beta as beta_dist

from .graphcore import RngStream
from .harness import ks_distance, ks_distance_cdf

__all__ = [
    "UrnState",
    "UrnTrajectory",
    "LimitLawResult",
    "TriangularScaling",
    "TRIANGULAR_REPLACEMENT",
    "urn_run",
    "urn_run_batch",
    "beta_binomial_pmf",
    "limit_law_check",
    "triangular_urn_scaling",
]

# drawing color 0 adds two color-0 balls; drawing color 1 adds one of each
TRIANGULAR_REPLACEMENT = np.array([[2, 0], [1, 1]], dtype=np.int64)
TRIANGULAR_REPLACEMENT.setflags(write=False)


@dataclass(frozen=True, eq=False)
class UrnState:
    """Ball counts per color plus the replacement rule.

    ``replacement[i]`` lists the balls added, one entry per color, when a
    ball of color i is drawn.  Every row must add at least one ball so the
    urn grows at each step.
    """

    counts: np.ndarray
    replacement: np.ndarray

    def __post_init__(self):
        counts = _int_vector(self.counts, "counts")
        if counts.size == 0:
            raise ValueError("counts must be a nonempty vector")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if int(counts.sum()) < 1:
            raise ValueError("urn must start with at least one ball")
        m = counts.size
        repl = np.asarray(self.replacement)
        if repl.shape != (m, m):
            raise ValueError(f"replacement must be {m}x{m} to match counts")
        repl = _int_matrix(repl, "replacement")
        if np.any(repl < 0):
            raise ValueError("replacement entries must be nonnegative")
        if np.any(repl.sum(axis=1) == 0):
            raise ValueError("every replacement row must add at least one ball")
        counts.setflags(write=False)
        repl.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "replacement", repl)

    @classmethod
    def classic(cls, *counts: int) -> "UrnState":
        """Identity replacement: the drawn ball returns with one copy."""
        return cls(np.asarray(counts), np.eye(len(counts), dtype=np.int64))

    @classmethod
    def k_per_step(cls, counts: Sequence[int], k: int) -> "UrnState":
        """k copies of the drawn color are added at each step."""
        if k < 1:
            raise ValueError("k must be a positive integer")
        m = len(counts)
        return cls(np.asarray(counts), k * np.eye(m, dtype=np.int64))

    @classmethod
    def triangular(cls, blue: int, red: int) -> "UrnState":
        return cls(np.asarray([blue, red]), TRIANGULAR_REPLACEMENT)

    @property
    def colors(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class UrnTrajectory:
    """Counts of a single run recorded at requested checkpoints."""

    totals: np.ndarray  # (s,) total balls at each checkpoint
    counts: np.ndarray  # (s, m) per-color counts

    def __post_init__(self):
        totals = _int_vector(self.totals, "totals")
        counts = _int_matrix(np.asarray(self.counts), "counts")
        if counts.ndim != 2 or counts.shape[0] != totals.size:
            raise ValueError("counts must have one row per checkpoint")
        if np.any(np.diff(totals) <= 0):
            raise ValueError("checkpoint totals must be strictly increasing")
        if np.any(counts.sum(axis=1) != totals):
            raise ValueError("counts rows must sum to the recorded totals")
        totals.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "counts", counts)

    def snapshots(self) -> list[tuple[int, np.ndarray]]:
        return [(int(t), row) for t, row in zip(self.totals, self.counts)]

    def fractions(self) -> np.ndarray:
        return self.counts / self.totals[:, None]


class LimitLawResult(NamedTuple):
    ks: float  # max KS over marginals
    marginal_ks: tuple
    alpha: tuple  # Beta parameters per marginal
    beta: tuple
    n_final: int  # terminal total actually reached
    runs: int


class TriangularScaling(NamedTuple):
    totals: tuple  # total-ball counts actually reached
    samples: tuple  # one array of Y_n/sqrt(n) per total
    ks_consecutive: tuple
    means: tuple


def urn_run(initial: UrnState, steps: int, checkpoints: Iterable[int],
            rng: RngStream) -> UrnTrajectory:
    """Run one urn for `steps` draws, recording (total, counts) snapshots.

    Checkpoints are draw indices in [0, steps]; index 0 is the initial
    state.  Each draw picks color i with probability counts_i/total and
    adds replacement row i.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    marks = _checkpoint_indices(checkpoints, steps)
    gen = rng.generator()
    us = gen.random(steps)
    counts = [int(c) for c in initial.counts]
    repl = [[int(x) for x in row] for row in initial.replacement]
    row_tot = [sum(row) for row in repl]
    m = len(counts)
    total = sum(counts)
    mark_set = set(marks.tolist())
    rec_t: list[int] = []
    rec_c: list[list[int]] = []
    if 0 in mark_set:
        rec_t.append(total)
        rec_c.append(counts.copy())
    for s in range(1, steps + 1):
        x = us[s - 1] * total
        acc = 0
        color = m - 1
        for i in range(m):
            acc += counts[i]
            if x < acc:
                color = i
                break
        row = repl[color]
        for i in range(m):
            counts[i] += row[i]
        total += row_tot[color]
        if s in mark_set:
            rec_t.append(total)
            rec_c.append(counts.copy())
    return UrnTrajectory(np.asarray(rec_t, dtype=np.int64),
                         np.asarray(rec_c, dtype=np.int64))


def urn_run_batch(initial: UrnState, steps: int, runs: int, rng: RngStream,
                  checkpoints: Iterable[int] | None = None) -> np.ndarray:
    """Run an ensemble of urns in lockstep; returns counts of shape
    (len(checkpoints), runs, m).

    Checkpoints default to [steps].  The whole ensemble consumes a single
    stream (one uniform per run per step, in run order), so results are
    reproducible from (seed, stream) alone but do not match stitching
    `runs` calls of urn_run together.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if runs < 1:
        raise ValueError("runs must be positive")
    marks = _checkpoint_indices([steps] if checkpoints is None else checkpoints, steps)
    gen = rng.generator()
    m = initial.colors
    counts = np.tile(initial.counts.astype(np.int64), (runs, 1))
    repl = initial.replacement
    row_tot = repl.sum(axis=1)
    totals = np.full(runs, initial.total, dtype=np.int64)
    out = np.empty((marks.size, runs, m), dtype=np.int64)
    pos = 0
    if marks.size and marks[0] == 0:
        out[0] = counts
        pos = 1
    for s in range(1, steps + 1):
        x = gen.random(runs) * totals
        cum = np.cumsum(counts, axis=1)
        chosen = (cum <= x[:, None]).sum(axis=1)
        counts += repl[chosen]
        totals += row_tot[chosen]
        if pos < marks.size and marks[pos] == s:
            out[pos] = counts
            pos += 1
    return out


def beta_binomial_pmf(n: int, b: int, r: int, k: int) -> float:
    """P(k of the first n draws are the b-color) in a classical two-color
    urn started from (b, r) balls: C(n,k) * b^(k-rising) * r^((n-k)-rising)
    / (b+r)^(n-rising), evaluated in log space.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    if b < 1 or r < 1:
        raise ValueError("initial counts must be positive")
    log_p = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
             + gammaln(b + k) - gammaln(b)
             + gammaln(r + n - k) - gammaln(r)
             + gammaln(b + r) - gammaln(b + r + n))
    return float(np.exp(log_p))


def limit_law_check(initial: UrnState, law: str, n_final: int, runs: int,
                    rng: RngStream) -> LimitLawResult:
    """KS distance between terminal color fractions and the stated limit.

    law "beta": two colors, identity replacement, limit Beta(b, r).
    law "dirichlet": identity replacement, marginal i ~ Beta(r_i, T - r_i).
    law "dirichlet_scaled": replacement k*I, marginal i ~ Beta(r_i/k, (T-r_i)/k).
    Dirichlet marginals come from the aggregation property (coordinate i
    versus everything else), so the reported value is the max marginal KS.
    """
    alpha, bet = _limit_marginals(initial, law)
    k = int(initial.replacement[0, 0])
    if n_final <= initial.total:
        raise ValueError("n_final must exceed the initial total")
    steps = (n_final - initial.total) // k
    reached = initial.total + steps * k
    final = urn_run_batch(initial, steps, runs, rng)[0]
    fractions = final / reached
    per_marginal = tuple(
        ks_distance_cdf(fractions[:, i], beta_dist(alpha[i], bet[i]).cdf)
        for i in range(initial.colors))
    return LimitLawResult(ks=max(per_marginal), marginal_ks=per_marginal,
                          alpha=alpha, beta=bet, n_final=reached, runs=runs)


def triangular_urn_scaling(initial: UrnState, n_values: Sequence[int],
                           runs: int, rng: RngStream) -> TriangularScaling:
    """Distribution of (red count)/sqrt(total) at each requested total.

    Requires the [[2, 0], [1, 1]] replacement rule and at least one red
    ball initially; red is the slow color whose count grows like sqrt(n).
    Each total gets an independent ensemble (substream i); the stability
    report is the KS distance between consecutive totals.
    """
    if not np.array_equal(initial.replacement, TRIANGULAR_REPLACEMENT):
        raise ValueError("scaling check requires replacement [[2, 0], [1, 1]]")
    if int(initial.counts[1]) < 1:
        raise ValueError("need at least one red ball initially")
    if runs < 2:
        raise ValueError("runs must be at least 2")
    n_values = [int(n) for n in n_values]
    if len(n_values) < 1 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly increasing")
    if n_values[0] <= initial.total:
        raise ValueError("n_values must exceed the initial total")
    totals, samples, means = [], [], []
    for i, n in enumerate(n_values):
        steps = (n - initial.total) // 2  # every step adds exactly 2 balls
        reached = initial.total + 2 * steps
        final = urn_run_batch(initial, steps, runs, rng.substream(i))[0]
        scaled = final[:, 1] / np.sqrt(reached)
        totals.append(reached)
        samples.append(scaled)
        means.append(float(scaled.mean()))
    ks = tuple(ks_distance(a, b) for a, b in zip(samples, samples[1:]))
    return TriangularScaling(totals=tuple(totals), samples=tuple(samples),
                             ks_consecutive=ks, means=tuple(means))


def _limit_marginals(initial: UrnState, law: str) -> tuple[tuple, tuple]:
    repl = initial.replacement
    m = initial.colors
    diag = np.diag(repl)
    is_scaled_identity = (np.array_equal(repl, np.diag(diag))
                          and np.all(diag == diag[0]) and diag[0] >= 1)
    if law == "beta":
        if m != 2:
            raise ValueError("beta limit requires exactly two colors")
        if not np.array_equal(repl, np.eye(2, dtype=np.int64)):
            raise ValueError("beta limit requires identity replacement")
        k = 1
    elif law == "dirichlet":
        if not np.array_equal(repl, np.eye(m, dtype=np.int64)):
            raise ValueError("dirichlet limit requires identity replacement")
        k = 1
    elif law == "dirichlet_scaled":
        if not is_scaled_identity:
            raise ValueError(
                "scaled dirichlet limit requires replacement k*identity")
        k = int(diag[0])
    else:
        raise ValueError(f"unknown limit law: {law!r}")
    if np.any(initial.counts < 1):
        raise ValueError("limit laws require at least one ball of each color")
    r = initial.counts.astype(np.float64)
    total = float(initial.total)
    alpha = tuple(float(x / k) for x in r)
    bet = tuple(float((total - x) / k) for x in r)
    return alpha, bet


def _checkpoint_indices(checkpoints: Iterable[int], steps: int) -> np.ndarray:
    marks = np.unique(np.asarray(list(checkpoints), dtype=np.int64))
    if marks.size == 0:
        raise ValueError("need at least one checkpoint")
    if marks[0] < 0 or marks[-1] > steps:
        raise ValueError("checkpoints must lie in [0, steps]")
    return marks


def _int_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    out = arr.astype(np.int64)
    if not np.array_equal(out, arr):
        raise ValueError(f"{name} must be integers")
    return out


def _int_matrix(arr: np.ndarray, name: str) -> np.ndarray:
    out = arr.astype(np.int64)
    if not np.array_equal(out, arr):
        raise ValueError(f"{name} must be integers")
    return out
