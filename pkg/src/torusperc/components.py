"""Cluster extraction and statistics.

Partitions at a single level come from a compiled connected-components pass
over the open edge set. Sweeps over an ascending grid reuse one sorted edge
stream and a union-find forest, so the whole grid costs a single pass; at
every grid point the snapshot is exactly the partition of the open set at
that level (the coupling is monotone), which the tests cross-check against
independent single-level builds.

Also here: restricted percolation (level p2 on the vertex set of the large
p1-components) and the pair count N(p1,p2;M), computed through the
squared-sizes identity
    N = sum_{C in comp_{p2}} |C|^2 - sum_{A in restricted comps} |A|^2,
both sides counting ordered vertex pairs connected at p2, the right-hand
sum only those pairs joined without ever leaving the large p1-components.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from . import lattice
from .coupling import sorted_edge_arrays
from .errors import RangeError


class UnionFind:
    """Disjoint-set forest with union by size and path compression."""

    def __init__(self, n):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.count = n

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.count -= 1
        return rx

    def roots(self):
        """Root of every element (fully compressed)."""
        parent = self.parent
        # two compaction sweeps: after the first, every chain has length <= 1
        parent = parent[parent]
        while not np.array_equal(parent, parent[parent]):
            parent = parent[parent]
        self.parent = parent
        return parent.copy()


@dataclass
class ComponentPartition:
    """Components of one percolation level (possibly on a restricted graph).

    labels  : per-vertex component label in [0, K); -1 for vertices excluded
              by a restriction.
    sizes   : size of component k at sizes[k].
    sorted_sizes : the same sizes in nonincreasing order.
    restriction  : None, or a short dict describing how the edge/vertex set
              was restricted.
    """

    p: float
    labels: np.ndarray
    sizes: np.ndarray
    restriction: dict = None
    sorted_sizes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.sorted_sizes = np.sort(self.sizes)[::-1].copy()

    @property
    def num_components(self):
        return len(self.sizes)

    @property
    def participating(self):
        """Number of vertices carrying a label."""
        return int(self.sizes.sum())

    def chi_hat(self, volume=None):
        """Per-realization susceptibility estimator sum |C|^2 / V."""
        V = self.labels.size if volume is None else volume
        return float(np.sum(self.sizes.astype(np.float64) ** 2) / V)

    def component_of(self, v):
        return int(self.labels[v])


def _partition_from_edges(V, tails, heads, p, restriction=None, keep=None):
    """Label connected components of the graph (V vertices, given edges).

    keep: optional boolean mask of participating vertices; excluded vertices
    get label -1 and do not appear in sizes.
    """
    graph = coo_matrix(
        (np.ones(len(tails), dtype=np.int8), (tails, heads)), shape=(V, V)
    )
    _, raw = _cc(graph.tocsr(), directed=False)
    if keep is None:
        labels, sizes = _compact(raw)
    else:
        labels = np.full(V, -1, dtype=np.int64)
        kept = np.flatnonzero(keep)
        sub, sizes = _compact(raw[kept])
        labels[kept] = sub
    return ComponentPartition(p=p, labels=labels, sizes=sizes, restriction=restriction)


def _compact(raw):
    uniq, compact = np.unique(raw, return_inverse=True)
    sizes = np.bincount(compact, minlength=len(uniq)).astype(np.int64)
    return compact.astype(np.int64), sizes


def build_components(cfg, p):
    """Components of the open set at level p."""
    spec = cfg.spec
    mask = cfg.open_mask(p)
    tails, heads = lattice.all_edge_endpoints(spec)
    return _partition_from_edges(spec.V, tails[mask], heads[mask], p)


def sweep(cfg, p_grid):
    """Partitions at every grid point, in one Kruskal-style pass.

    p_grid must be ascending. Edges are drained from the sorted stream; at
    each grid point the union-find state is exactly the partition of the open
    set there, and a snapshot is taken.
    """
    grid = list(p_grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise RangeError("p_grid must be ascending")
    if not grid:
        return []
    spec = cfg.spec
    order, weights = sorted_edge_arrays(cfg)
    tails, heads = lattice.all_edge_endpoints(spec)
    uf = UnionFind(spec.V)
    snapshots = []
    pos = 0
    E = len(order)
    for p in grid:
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"grid point {p} outside [0,1]")
        stop = int(np.searchsorted(weights, p, side="right"))
        while pos < stop:
            e = order[pos]
            uf.union(tails[e], heads[e])
            pos += 1
        labels, sizes = _compact(uf.roots())
        snapshots.append(ComponentPartition(p=float(p), labels=labels, sizes=sizes))
    return snapshots


@dataclass(frozen=True)
class ClusterMoments:
    """Power sums of component sizes above a threshold.

    s1..s4 sum |A|^k over components of size >= M only; chi_hat is always over
    the full partition (the susceptibility estimator does not threshold).
    """

    M: int
    s1: float
    s2: float
    s3: float
    s4: float
    chi_hat: float
    max_size: int
    num_large: int


def cluster_moments(part, M, volume=None):
    """Exact S_k over comp_{p,M} plus the untresholded chi_hat and max size."""
    if M < 1:
        raise RangeError(f"M must be >= 1, got {M}")
    sizes = part.sizes.astype(np.float64)
    large = sizes[sizes >= M]
    V = part.labels.size if volume is None else volume
    return ClusterMoments(
        M=int(M),
        s1=float(large.sum()),
        s2=float((large**2).sum()),
        s3=float((large**3).sum()),
        s4=float((large**4).sum()),
        chi_hat=float((sizes**2).sum() / V),
        max_size=int(sizes.max()) if sizes.size else 0,
        num_large=int(large.size),
    )


def default_threshold(spec, exponent=0.6):
    """Default large-component cutoff M = round(V^exponent).

    The exponent must sit in (1/2, 2/3); the alternative chi^5/V rule is
    `chi_threshold`.
    """
    if not 0.5 < exponent < 2.0 / 3.0:
        raise RangeError(f"threshold exponent must be in (1/2, 2/3), got {exponent}")
    return max(1, round(spec.V**exponent))


def chi_threshold(chi_hat, spec):
    """Alternative cutoff M = chi^5 / V (floored at 1)."""
    return max(1, round(chi_hat**5 / spec.V))


def restricted_components(cfg, p1, p2, M):
    """Percolation at p2 restricted to the vertex set of comp_{p1,M}.

    Vertices in p1-components smaller than M are dropped; the remaining
    vertices keep every p2-open edge internal to the kept set. Each surviving
    p1-component stays connected (its p1-open internal edges are still open),
    so every output component has size >= M.
    """
    if not p1 <= p2:
        raise RangeError(f"need p1 <= p2, got ({p1}, {p2})")
    if M < 1:
        raise RangeError(f"M must be >= 1, got {M}")
    spec = cfg.spec
    base = build_components(cfg, p1)
    keep = base.sizes[base.labels] >= M
    tails, heads = lattice.all_edge_endpoints(spec)
    open2 = cfg.open_mask(p2)
    internal = open2 & keep[tails] & keep[heads]
    return _partition_from_edges(
        spec.V,
        tails[internal],
        heads[internal],
        p2,
        restriction={"kind": "large-p1-components", "p1": p1, "M": int(M)},
        keep=keep,
    )


def n_count(cfg, p1, p2, M):
    """Ordered pairs connected at p2 only through small p1-components.

    Computed by the squared-sizes identity; includes coincident pairs (u,u)
    for u in a small p1-component, matching the identity's bookkeeping.
    """
    full = build_components(cfg, p2)
    restricted = restricted_components(cfg, p1, p2, M)
    total = int(np.sum(full.sizes.astype(np.int64) ** 2))
    inside = int(np.sum(restricted.sizes.astype(np.int64) ** 2))
    return total - inside
