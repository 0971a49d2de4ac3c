"""Binary pairwise grid MRF: topology, potentials, sufficient statistics, samplers.

Configurations are 0/1 integer arrays of length ``d`` (row-major node order);
datasets are ``(n, d)`` arrays.  Each edge ``j`` carries a parameter
``theta[j] in (0,1)`` and contributes ``theta[j]`` to the unnormalized
probability when its endpoints agree and ``1 - theta[j]`` when they disagree.

Everything here is pure given an explicit ``numpy.random.Generator``; grids
and arrays can be shared freely across parallel workers.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """A rows x cols lattice with a canonical edge ordering.

    Nodes are numbered row-major.  Horizontal edges (left-right neighbors,
    row-major order) come first, then vertical edges (top-bottom neighbors,
    row-major order).  Every edge is stored as ``(u, v)`` with ``u < v``, so
    parameter index j <-> edge identity is reproducible across runs.
    """

    rows: int
    cols: int
    edges: np.ndarray  # (p, 2) int64, u < v
    d: int
    p: int
    # derived lookup tables, built once in build_grid
    adjacency: tuple = field(repr=False, compare=False, default=())
    edge_index: dict = field(repr=False, compare=False, default_factory=dict)

    def neighbors(self, v):
        """(neighbor node array, incident edge index array) for site v."""
        return self.adjacency[v]


def build_grid(rows: int, cols: int) -> GridSpec:
    """Construct the canonical GridSpec for a full rows x cols lattice."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be positive, got {rows}x{cols}")
    if rows * cols < 2:
        raise ValueError("grid needs at least two nodes")
    edges = []
    for r in range(rows):
        for c in range(cols - 1):
            u = r * cols + c
            edges.append((u, u + 1))
    for r in range(rows - 1):
        for c in range(cols):
            u = r * cols + c
            edges.append((u, u + cols))
    edges = np.asarray(edges, dtype=np.int64)
    d = rows * cols
    p = edges.shape[0]

    nbrs = [[] for _ in range(d)]
    eidx = [[] for _ in range(d)]
    index = {}
    for j, (u, v) in enumerate(edges):
        u, v = int(u), int(v)
        nbrs[u].append(v)
        eidx[u].append(j)
        nbrs[v].append(u)
        eidx[v].append(j)
        index[(u, v)] = j
    adjacency = tuple(
        (np.asarray(nbrs[v], dtype=np.int64), np.asarray(eidx[v], dtype=np.int64))
        for v in range(d)
    )
    return GridSpec(rows=rows, cols=cols, edges=edges, d=d, p=p,
                    adjacency=adjacency, edge_index=index)


def validate_theta(theta, grid: GridSpec) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (grid.p,):
        raise ValueError(f"theta must have shape ({grid.p},), got {theta.shape}")
    if np.any(theta <= 0.0) or np.any(theta >= 1.0):
        raise ValueError("theta components must lie strictly inside (0, 1)")
    return theta


def agreement_matrix(x, grid: GridSpec) -> np.ndarray:
    """Per-edge agreement indicators; x is (d,) or (n, d), result (p,) or (n, p)."""
    x = np.asarray(x)
    u = x[..., grid.edges[:, 0]]
    v = x[..., grid.edges[:, 1]]
    return (u == v).astype(np.float64)


def unnormalized_log_prob(x, theta, grid: GridSpec) -> float:
    """log of the unnormalized probability of one configuration."""
    x = np.asarray(x)
    if x.shape != (grid.d,):
        raise ValueError(f"configuration must have shape ({grid.d},), got {x.shape}")
    theta = validate_theta(theta, grid)
    s = agreement_matrix(x, grid)
    return float(s @ np.log(theta) + (1.0 - s) @ np.log1p(-theta))


@dataclass(frozen=True)
class SufficientStats:
    """Per-edge agreement counts over an observed dataset."""

    agree: np.ndarray  # (p,) int64
    n: int


def sufficient_stats(data, grid: GridSpec) -> SufficientStats:
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[1] != grid.d:
        raise ValueError(f"dataset must have shape (n, {grid.d}), got {data.shape}")
    if data.shape[0] == 0:
        raise ValueError("dataset must be non-empty")
    s = agreement_matrix(data, grid)
    return SufficientStats(agree=s.sum(axis=0).astype(np.int64), n=data.shape[0])


# ---------------------------------------------------------------------------
# Gibbs sampling
# ---------------------------------------------------------------------------

def conditional_prob_one(x, v, theta, grid: GridSpec) -> float:
    """P(X_v = 1 | all other sites) under the pairwise potentials."""
    f1 = 1.0
    f0 = 1.0
    nbrs, eidx = grid.adjacency[v]
    for u, j in zip(nbrs, eidx):
        t = theta[j]
        if x[u]:
            f1 *= t
            f0 *= 1.0 - t
        else:
            f1 *= 1.0 - t
            f0 *= t
    return f1 / (f0 + f1)


def _sweep_one(x, theta_list, adjacency, u_row):
    """One systematic scan of a single configuration, in place."""
    for v, (nbrs, eidx) in enumerate(adjacency):
        f1 = 1.0
        f0 = 1.0
        for u, j in zip(nbrs, eidx):
            t = theta_list[j]
            if x[u]:
                f1 *= t
                f0 *= 1.0 - t
            else:
                f1 *= 1.0 - t
                f0 *= t
        x[v] = 1 if u_row[v] * (f0 + f1) < f1 else 0


def gibbs_sweep(x, theta, grid: GridSpec, rng) -> np.ndarray:
    """One systematic full sweep in node order; returns a new configuration.

    Consumes exactly ``d`` uniforms from ``rng`` (one per site), so seeded
    streams replay identically.
    """
    theta = validate_theta(theta, grid)
    x = np.asarray(x).astype(np.int8).copy()
    if x.shape != (grid.d,):
        raise ValueError(f"configuration must have shape ({grid.d},), got {x.shape}")
    u = rng.random(grid.d)
    _sweep_one(x, theta.tolist(), grid.adjacency, u)
    return x


def sweep_pool(x, theta, grid: GridSpec, rng, sweeps: int = 1) -> None:
    """Advance a whole (s, d) particle block by systematic sweeps, in place.

    Vectorized over particles; each particle consumes one uniform per site per
    sweep, matching the single-chain scan.
    """
    theta = np.asarray(theta, dtype=np.float64)
    s = x.shape[0]
    for _ in range(sweeps):
        u = rng.random((s, grid.d))
        for v, (nbrs, eidx) in enumerate(grid.adjacency):
            th = theta[eidx]
            xn = x[:, nbrs]
            f1 = np.where(xn == 1, th, 1.0 - th).prod(axis=1)
            f0 = np.where(xn == 0, th, 1.0 - th).prod(axis=1)
            x[:, v] = u[:, v] * (f0 + f1) < f1


def sample_dataset(theta, grid: GridSpec, n: int, rng,
                   burn_in_sweeps: int = 1000, spacing_sweeps: int = 10) -> np.ndarray:
    """Draw n configurations from one Gibbs chain, thinned by spacing_sweeps."""
    theta = validate_theta(theta, grid)
    if n < 1:
        raise ValueError("n must be positive")
    if burn_in_sweeps < 0:
        raise ValueError("burn_in_sweeps must be nonnegative")
    tl = theta.tolist()
    adj = grid.adjacency
    x = rng.integers(0, 2, size=grid.d).astype(np.int8)
    for _ in range(burn_in_sweeps):
        _sweep_one(x, tl, adj, rng.random(grid.d))
    out = np.empty((n, grid.d), dtype=np.int8)
    out[0] = x
    for i in range(1, n):
        for _ in range(max(spacing_sweeps, 1)):
            _sweep_one(x, tl, adj, rng.random(grid.d))
        out[i] = x
    return out


def coupled_pairs(theta, grid: GridSpec, n: int, rng, max_sweeps: int = 1000):
    """Run n independent monotone-coupled chain pairs from all-zeros/all-ones.

    Both chains of a pair share the same per-site uniform each sweep.  Returns
    ``(states, coalesced, sweeps_used)`` where sweeps_used is -1 for pairs that
    never met.  Requires theta >= 0.5 componentwise for the monotonicity
    guarantee (callers check).
    """
    theta = np.asarray(theta, dtype=np.float64)
    d = grid.d
    lo = np.zeros((n, d), dtype=np.int8)
    hi = np.ones((n, d), dtype=np.int8)
    done = np.zeros(n, dtype=bool)
    sweeps_used = np.full(n, -1, dtype=np.int64)
    for sweep in range(max_sweeps):
        u = rng.random((n, d))
        for v, (nbrs, eidx) in enumerate(grid.adjacency):
            th = theta[eidx]
            for x in (lo, hi):
                xn = x[:, nbrs]
                f1 = np.where(xn == 1, th, 1.0 - th).prod(axis=1)
                f0 = np.where(xn == 0, th, 1.0 - th).prod(axis=1)
                x[:, v] = u[:, v] * (f0 + f1) < f1
        newly = ~done & np.all(lo == hi, axis=1)
        sweeps_used[newly] = sweep + 1
        done |= newly
        if done.all():
            break
    return lo.copy(), done, sweeps_used


def coalesced_sample(theta, grid: GridSpec, rng, max_sweeps: int = 1000):
    """One draw from a coalescence-checked pair of coupled chains.

    Returns ``(configuration, coalesced, sweeps_used)``.  When some
    theta[j] < 0.5 the monotone coupling gives no guarantee, so this signals
    by falling back to a plain burn-in from a random start and reporting
    ``coalesced=False``.
    """
    theta = validate_theta(theta, grid)
    if np.any(theta < 0.5):
        warnings.warn("theta has components below 0.5; coupled chains are not "
                      "monotone, falling back to plain burn-in", stacklevel=2)
        x = rng.integers(0, 2, size=grid.d).astype(np.int8)
        tl = theta.tolist()
        for _ in range(max_sweeps):
            _sweep_one(x, tl, grid.adjacency, rng.random(grid.d))
        return x, False, max_sweeps
    states, done, sweeps_used = coupled_pairs(theta, grid, 1, rng, max_sweeps)
    return states[0], bool(done[0]), int(sweeps_used[0]) if done[0] else max_sweeps


# ---------------------------------------------------------------------------
# Dataset serialization (.mrfdat)
# ---------------------------------------------------------------------------

def save_dataset(path, data, grid: GridSpec) -> None:
    """Write one configuration per line ('0'/'1' chars), after a "rows cols n" header."""
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[1] != grid.d:
        raise ValueError(f"dataset must have shape (n, {grid.d}), got {data.shape}")
    lines = [f"{grid.rows} {grid.cols} {data.shape[0]}\n"]
    for row in data:
        lines.append("".join("1" if b else "0" for b in row) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.writelines(lines)


def load_dataset(path):
    """Read a .mrfdat file; returns ``(data, rows, cols)``."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: bad header, expected 'rows cols n'")
        rows, cols, n = (int(t) for t in header)
        d = rows * cols
        data = np.empty((n, d), dtype=np.int8)
        for i in range(n):
            line = fh.readline().strip()
            if len(line) != d or set(line) - {"0", "1"}:
                raise ValueError(f"{path}: line {i + 2} is not {d} binary chars")
            data[i] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return data, rows, cols
