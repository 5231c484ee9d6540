"""Random geometric graphs on the sphere, triangle statistics, Wishart and
GOE ensembles, and dimension estimation.

The detection statistic throughout is the signed triangle count
tau(G) = sum over triples of (A_ij - p)(A_ik - p)(A_jk - p); geometry
inflates its mean by order n^3/sqrt(d) while the null keeps mean 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import scipy.sparse as _sparse
from scipy.special import betainc

from .graphcore import Graph, RngStream
from .harness import replicate, weighted_midpoint

WISHART_KINDS = ("wishart", "goe_shifted", "wishart_scaled_nodiag", "goe_nodiag")
ENTRY_DISTS = ("gaussian", "uniform-scaled", "rademacher")

# above this size dense O(n^2)/O(n^3) paths give way to edge-based ones
_DENSE_LIMIT = 4096


@dataclass(frozen=True)
class SpherePoints:
    """n unit-norm rows in R^d, i.i.d. uniform on the sphere."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError("coords must be an (n, d) matrix")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class GaussianMatrix:
    """Symmetric random-matrix sample tagged with its ensemble."""

    kind: str
    values: np.ndarray
    entry_dist: str = "gaussian"

    def __post_init__(self):
        if self.kind not in WISHART_KINDS:
            raise ValueError(f"kind must be one of {WISHART_KINDS}")
        if self.entry_dist not in ENTRY_DISTS:
            raise ValueError(f"entry_dist must be one of {ENTRY_DISTS}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("values must be a square matrix")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


class TriangleMoments(NamedTuple):
    mean: float
    variance: float


@dataclass(frozen=True)
class DetectionResult:
    verdict: str
    statistic: float


@dataclass(frozen=True)
class CalibrationResult:
    mean_er: float
    mean_geo: float
    sd_er: float
    sd_geo: float
    tau_threshold: float


@dataclass(frozen=True)
class SparseTriangleResult:
    mean_T_er: float
    mean_T_geo: float
    power: float
    size: float
    threshold: float


def sample_sphere(n: int, d: int, rng: RngStream) -> SpherePoints:
    """n i.i.d. uniform points on S^{d-1}: normalized standard Gaussians."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng.generator()
    raw = gen.standard_normal((n, d))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    while (norms == 0.0).any():
        bad = norms[:, 0] == 0.0
        raw[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return SpherePoints(raw / norms)


def threshold(p: float, d: int) -> float:
    """The t with P(<X1, X2> >= t) = p for independent uniform sphere points.

    (1+T)/2 is Beta((d-1)/2, (d-1)/2) distributed; the defining equation
    is inverted by monotone bisection (200 iterations, well past the
    1e-10 tolerance on the attained probability).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if d < 2:
        raise ValueError("dimension must be at least 2")
    a = (d - 1) / 2.0
    lo, hi = -1.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        upper = 1.0 - betainc(a, a, (1.0 + mid) / 2.0)
        if upper > p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return (lo + hi) / 2.0


def rgg_from_points(points: SpherePoints, p: float) -> Graph:
    """Geometric graph on given points: edge iff inner product >= t_{p,d}."""
    t = threshold(p, points.d)
    n = points.n
    if n <= _DENSE_LIMIT:
        gram = points.coords @ points.coords.T
        adj = np.triu(gram >= t, 1)
        adj |= adj.T
        return Graph._trusted(adj)
    if points.d == 2 and t > 0.0:
        return _rgg_circle(points.coords, t)
    return Graph.from_edges(n, _edges_by_chunks(points.coords, t))


def sample_rgg(n: int, p: float, d: int, rng: RngStream) -> Graph:
    """Random geometric graph G(n, p, d)."""
    return rgg_from_points(sample_sphere(n, d, rng), p)


def sample_er(n: int, p: float, rng: RngStream) -> Graph:
    """Erdos-Renyi G(n, p) with i.i.d. Bernoulli(p) edges."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng.generator()
    if n <= _DENSE_LIMIT:
        adj = np.triu(gen.random((n, n)) < p, 1)
        adj |= adj.T
        return Graph._trusted(adj)
    return Graph.from_edges(n, _sparse_bernoulli_edges(n, p, gen))


def triangle_count(g: Graph) -> int:
    """Number of triangles T(G) = Tr(A^3)/6.

    Dense matrix product at desk scale; for larger graphs the count runs
    over sparse adjacency products, which is exact and much faster when
    the graph is sparse.
    """
    n = g.n
    if n <= 2048:
        a = g.adj.astype(np.float32)
        return int(round(float(((a @ a) * a).sum(dtype=np.float64)) / 6.0))
    e = g.edges()
    if e.size == 0:
        return 0
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    A = _sparse.csr_matrix(
        (np.ones(rows.size, dtype=np.float64), (rows, cols)), shape=(n, n))
    return int(round(((A @ A).multiply(A)).sum() / 6.0))


def signed_triangle_stat(g: Graph, p: float) -> float:
    """Signed triangle statistic tau(G) = Tr(B^3)/6 with B the adjacency
    centered by p off the diagonal and zero on it."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    B = g.adj.astype(np.float64) - p
    np.fill_diagonal(B, 0.0)
    return float(((B @ B) * B).sum()) / 6.0


def triangle_moments_er(n: int, p: float) -> TriangleMoments:
    """Closed-form mean and variance of T(G(n, p)):
    mean = C(n,3) p^3,
    variance = C(n,3)(p^3 - p^6) + 2 C(n,4) C(4,2)(p^5 - p^6).

    The covariance sum runs over ordered pairs of distinct triangles
    sharing an edge: 2 C(4,2) per 4-subset.  Exact by enumeration over
    all graphs at small n.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    c3 = math.comb(n, 3)
    shared = 2 * math.comb(n, 4) * math.comb(4, 2)
    mean = c3 * p ** 3
    var = c3 * (p ** 3 - p ** 6) + shared * (p ** 5 - p ** 6)
    return TriangleMoments(float(mean), float(var))


def sample_wishart(n: int, d: int, entry_dist: str = "gaussian",
                   kind: str = "wishart", rng: RngStream | None = None) -> GaussianMatrix:
    """Sample one of the ensembles:

    - wishart: Y Y^T with Y an n x d matrix of i.i.d. unit-variance entries;
    - goe_shifted: sqrt(d) M(n) + d I with M(n) symmetric, off-diagonal
      variance 1 and diagonal variance 2;
    - wishart_scaled_nodiag: (X X^T - diag(X X^T)) / sqrt(d);
    - goe_nodiag: M(n) with the diagonal zeroed.

    entry_dist picks the entry law (mean 0, variance 1); the GOE kinds
    use it for the Wigner entries with the diagonal scaled by sqrt(2).
    """
    if rng is None:
        raise ValueError("rng stream is required")
    if kind not in WISHART_KINDS:
        raise ValueError(f"kind must be one of {WISHART_KINDS}")
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    gen = rng.generator()
    if kind in ("wishart", "wishart_scaled_nodiag"):
        Y = _draw_entries(gen, (n, d), entry_dist)
        W = Y @ Y.T
        W = (W + W.T) / 2.0
        if kind == "wishart_scaled_nodiag":
            np.fill_diagonal(W, 0.0)
            W /= math.sqrt(d)
    else:
        flat = _draw_entries(gen, (n, n), entry_dist)
        M = np.triu(flat, 1)
        M = M + M.T
        if kind == "goe_shifted":
            np.fill_diagonal(M, math.sqrt(2.0) * _draw_entries(gen, (n,), entry_dist))
            W = math.sqrt(d) * M + d * np.eye(n)
        else:
            W = M
    return GaussianMatrix(kind=kind, values=W, entry_dist=entry_dist)


def h_map(w: GaussianMatrix | np.ndarray) -> Graph:
    """Threshold a symmetric matrix to a graph: edge iff W_ij >= 0, i != j.

    Applied to a Wishart matrix W(n, d) this has exactly the law of
    G(n, 1/2, d); applied to the shifted GOE it gives G(n, 1/2).
    """
    values = w.values if isinstance(w, GaussianMatrix) else np.asarray(w, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError("need a square matrix")
    if not np.array_equal(values, values.T):
        raise ValueError("matrix must be symmetric")
    adj = values >= 0.0
    np.fill_diagonal(adj, False)
    return Graph._trusted(adj)


def tr_cubed(w: GaussianMatrix | np.ndarray) -> float:
    """Trace of the matrix cube."""
    V = w.values if isinstance(w, GaussianMatrix) else np.asarray(w, dtype=np.float64)
    return float(((V @ V) * V.T).sum())


def detect_geometry(g: Graph, n: int, p: float, tau_threshold: float) -> DetectionResult:
    """Threshold test on the signed triangle statistic."""
    if g.n != n:
        raise ValueError("graph size does not match n")
    stat = signed_triangle_stat(g, p)
    verdict = "geometric" if stat >= tau_threshold else "random"
    return DetectionResult(verdict=verdict, statistic=stat)


def calibrate_tau(n: int, p: float, d: int, replicas: int,
                  rng: RngStream) -> CalibrationResult:
    """Monte Carlo moments of tau under G(n,p) and G(n,p,d), plus the
    standard-deviation-weighted midpoint threshold between the means.

    Null replica i uses substream i, geometric replica i substream
    replicas + i.
    """
    if replicas < 100:
        raise ValueError("need at least 100 replicas for calibration")
    er = replicate(lambda s: signed_triangle_stat(sample_er(n, p, s), p),
                   replicas, rng)
    geo = replicate(lambda s: signed_triangle_stat(sample_rgg(n, p, d, s), p),
                    replicas, rng, offset=replicas)
    m0, s0 = float(er.mean()), float(er.std(ddof=1))
    m1, s1 = float(geo.mean()), float(geo.std(ddof=1))
    return CalibrationResult(mean_er=m0, mean_geo=m1, sd_er=s0, sd_geo=s1,
                             tau_threshold=weighted_midpoint(m0, s0, m1, s1))


def estimate_dimension(g: Graph, n: int, p: float, candidates: Sequence[int],
                       calibration_table: Mapping[int, float]) -> int:
    """Nearest-calibrated-mean dimension estimate; ties prefer smaller d."""
    if g.n != n:
        raise ValueError("graph size does not match n")
    cands = sorted(set(int(c) for c in candidates))
    if not cands:
        raise ValueError("candidates must be nonempty")
    missing = [c for c in cands if c not in calibration_table]
    if missing:
        raise ValueError(f"calibration table missing candidates {missing}")
    stat = signed_triangle_stat(g, p)
    best, best_gap = cands[0], math.inf
    for c in cands:
        gap = abs(calibration_table[c] - stat)
        if gap < best_gap:
            best, best_gap = c, gap
    return best


def sparse_triangle_experiment(n: int, c: float, d: int, replicas: int,
                               rng: RngStream) -> SparseTriangleResult:
    """Triangle-count test at edge probability c/n between G(n, c/n) and
    G(n, c/n, d); reports the two means and the power of the weighted-
    midpoint threshold test. No claim is made about the d >> log^3(n)
    conjecture; this is measurement machinery.
    """
    if c < 0 or c / n > 1.0:
        raise ValueError("need 0 <= c/n <= 1")
    if replicas < 2:
        raise ValueError("need at least two replicas")
    p = c / n
    er = replicate(lambda s: float(triangle_count(sample_er(n, p, s))),
                   replicas, rng)
    geo = replicate(lambda s: float(triangle_count(sample_rgg(n, p, d, s))),
                    replicas, rng, offset=replicas)
    m0, s0 = float(er.mean()), float(er.std(ddof=1))
    m1, s1 = float(geo.mean()), float(geo.std(ddof=1))
    thr = weighted_midpoint(m0, s0, m1, s1)
    if m1 >= m0:
        power, size = float((geo >= thr).mean()), float((er >= thr).mean())
    else:
        power, size = float((geo <= thr).mean()), float((er <= thr).mean())
    return SparseTriangleResult(mean_T_er=m0, mean_T_geo=m1, power=power,
                                size=size, threshold=thr)


def _draw_entries(gen: np.random.Generator, shape, entry_dist: str) -> np.ndarray:
    if entry_dist == "gaussian":
        return gen.standard_normal(shape)
    if entry_dist == "uniform-scaled":
        return gen.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
    if entry_dist == "rademacher":
        return 2.0 * gen.integers(0, 2, size=shape).astype(np.float64) - 1.0
    raise ValueError(f"entry_dist must be one of {ENTRY_DISTS}")


def _rgg_circle(coords: np.ndarray, t: float) -> Graph:
    """Exact d=2 geometric graph via sorted angles: edge iff the circular
    angle gap is at most arccos(t). Same edge rule as the Gram-matrix
    path, built in O(n log n + m)."""
    n = coords.shape[0]
    delta = math.acos(min(max(t, -1.0), 1.0))
    theta = np.arctan2(coords[:, 1], coords[:, 0])
    order = np.argsort(theta, kind="stable")
    th = theta[order]
    ext = np.concatenate([th, th + 2.0 * math.pi])
    hi = np.searchsorted(ext, th + delta, side="right")
    starts = np.arange(n) + 1
    lens = np.maximum(hi - starts, 0)
    total = int(lens.sum())
    if total == 0:
        return Graph.from_edges(n, [])
    i_flat = np.repeat(np.arange(n), lens)
    seg_starts = np.repeat(starts, lens)
    seg_offset = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
    j_flat = (seg_starts + seg_offset) % n
    u = order[i_flat]
    v = order[j_flat]
    edges = np.column_stack([np.minimum(u, v), np.maximum(u, v)])
    return Graph.from_edges(n, edges)


def _edges_by_chunks(coords: np.ndarray, t: float):
    """Edge list of the geometric graph via row-chunked Gram products."""
    n = coords.shape[0]
    chunk = max(1, int(2_000_000 // max(n, 1)))
    edges = []
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        gram = coords[start:stop] @ coords.T
        mask = gram >= t
        mask &= np.arange(n)[None, :] > np.arange(start, stop)[:, None]
        u, v = np.nonzero(mask)
        edges.append(np.column_stack([u + start, v]))
    return np.concatenate(edges, axis=0)


def _sparse_bernoulli_edges(n: int, p: float, gen: np.random.Generator) -> np.ndarray:
    """Bernoulli(p) subset of the C(n,2) pair slots via geometric skipping;
    exactly the G(n, p) law without touching all pairs."""
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return np.empty((0, 2), dtype=np.int64)
    if p == 1.0:
        u, v = np.triu_indices(n, 1)
        return np.column_stack([u, v])
    mean = total * p
    positions = np.empty(0, dtype=np.int64)
    last = -1
    while True:
        need = int((total * p - max(last, 0) * p) + 12 * math.sqrt(mean + 1) + 16)
        gaps = gen.geometric(p, size=max(need, 16))
        new = (np.cumsum(gaps) + last).astype(np.int64)
        positions = np.concatenate([positions, new])
        last = int(positions[-1])
        if last >= total - 1:
            break
    positions = positions[positions < total]
    return _linear_to_pair(positions, n)


def _linear_to_pair(k: np.ndarray, n: int) -> np.ndarray:
    """Invert the row-major upper-triangle enumeration of pairs (i < j),
    where pair (i, j) has index i*n - i(i+1)/2 + (j - i - 1)."""

    def row_start(i):
        return i * n - i * (i + 1) // 2

    kf = k.astype(np.float64)
    i = np.floor(((2 * n - 1) - np.sqrt((2 * n - 1) ** 2 - 8.0 * kf)) / 2.0).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    # float sqrt can land one row off; fix up exactly
    too_far = row_start(i) > k
    i[too_far] -= 1
    too_near = k >= row_start(i + 1)
    i[too_near] += 1
    j = k - row_start(i) + i + 1
    return np.column_stack([i, j])
