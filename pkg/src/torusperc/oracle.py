"""Exact enumeration oracles on tiny graphs.

Everything here is brute force on purpose: statistics are summed over all
2^E single-level configurations (or 3^E two-level classifications) with their
exact probability weights, giving ground truth the Monte Carlo estimators are
tested against. Scalar accumulators use Kahan compensation so the only error
left is in the p^a (1-p)^b weights themselves (relative error well under
1e-12 for E <= 16).

The two-level oracle computes the pair count N(p1,p2;M) twice per
configuration: through the squared-sizes identity, and directly from its
path-based definition by enumerating simple paths; the two must agree
configuration by configuration, as integers.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import lattice
from .errors import RangeError, ResourceCapError

MAX_VERTICES = 24
MAX_EDGES = 16


class _Kahan:
    """Compensated scalar accumulator."""

    __slots__ = ("total", "c")

    def __init__(self):
        self.total = 0.0
        self.c = 0.0

    def add(self, x):
        y = x - self.c
        t = self.total + y
        self.c = (t - self.total) - y
        self.total = t


@dataclass(frozen=True)
class TinyGraph:
    """A small explicit graph the enumeration oracles can afford."""

    num_vertices: int
    edges: tuple

    def __post_init__(self):
        if self.num_vertices > MAX_VERTICES:
            raise ResourceCapError(
                f"{self.num_vertices} vertices exceeds oracle cap {MAX_VERTICES}"
            )
        if len(self.edges) > MAX_EDGES:
            raise ResourceCapError(
                f"{len(self.edges)} edges exceeds oracle cap {MAX_EDGES}"
            )
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise RangeError(f"self-loop at {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise RangeError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise RangeError(f"duplicate edge ({u},{v})")
            seen.add(key)

    @classmethod
    def from_spec(cls, spec):
        es = tuple((u, v) for _, u, v in lattice.edges(spec))
        return cls(num_vertices=spec.V, edges=es)

    @classmethod
    def cycle(cls, n):
        return cls(num_vertices=n, edges=tuple((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def complete(cls, n):
        return cls(num_vertices=n,
                   edges=tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def _components_of(num_vertices, edge_list):
    """Component label per vertex plus component sizes (tiny union-find)."""
    parent = list(range(num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edge_list:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[rv] = ru
    labels = [find(v) for v in range(num_vertices)]
    compact = {}
    out = []
    for r in labels:
        if r not in compact:
            compact[r] = len(compact)
        out.append(compact[r])
    sizes = [0] * len(compact)
    for lbl in out:
        sizes[lbl] += 1
    return out, sizes


@dataclass(frozen=True)
class ExactStats:
    """Single-level exact statistics.

    chi[v] = E|C(v)|; second_moment[v] = E|C(v)|^2; pair_conn[u,v] = P(u<->v);
    delta_frob2 = E sum_{a,b} Delta_ab^2 over ordered pairs of distinct
    components of size >= M.
    """

    p: float
    M: int
    chi: np.ndarray
    second_moment: np.ndarray
    pair_conn: np.ndarray
    delta_frob2: float


def exact_stats(g, p, M=1):
    """Sum the statistics over all 2^E configurations with exact weights."""
    E = len(g.edges)
    nv = g.num_vertices
    chi = np.zeros(nv)
    second = np.zeros(nv)
    pair = np.zeros((nv, nv))
    frob = _Kahan()
    weights = [p**k * (1.0 - p) ** (E - k) for k in range(E + 1)]
    for mask in range(1 << E):
        open_edges = [g.edges[i] for i in range(E) if mask >> i & 1]
        labels, sizes = _components_of(nv, open_edges)
        w = weights[bin(mask).count("1")]
        size_of = np.array([sizes[l] for l in labels], dtype=np.float64)
        chi += w * size_of
        second += w * size_of**2
        lab = np.array(labels)
        pair += w * (lab[:, None] == lab[None, :])
        # Delta between distinct components of size >= M
        counts = {}
        for i in range(E):
            if mask >> i & 1:
                continue
            u, v = g.edges[i]
            a, b = labels[u], labels[v]
            if a == b or sizes[a] < M or sizes[b] < M:
                continue
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
        frob.add(w * 2.0 * sum(c * c for c in counts.values()))
    return ExactStats(p=float(p), M=int(M), chi=chi, second_moment=second,
                      pair_conn=pair, delta_frob2=frob.total)


# --- two-level ----------------------------------------------------------------


def _simple_paths_all_visit_small(g, open_adj, u, v, small):
    """True iff every simple open path u->v passes through a small-set vertex.

    Depth-first enumeration of simple paths; returns False the moment one
    clean path (no small vertex) is found. Endpoints count as visited
    vertices, so a small endpoint taints every path.
    """
    if u in small or v in small:
        return True
    stack = [(u, {u})]
    while stack:
        node, seen = stack.pop()
        for nxt in open_adj[node]:
            if nxt in seen or nxt in small:
                continue
            if nxt == v:
                return False  # found a path avoiding small vertices
            stack.append((nxt, seen | {nxt}))
    return True


@dataclass(frozen=True)
class ExactTwoLevel:
    """Two-level exact results.

    expected_n        : E N(p1,p2;M) (ordered pairs, coincident included).
    identity_matches  : the identity-based and path-based N agreed for every
                        one of the 3^E configurations.
    restricted_law    : dict {descending size tuple: probability} of the
                        restricted-component partition.
    edge_class_probs  : per-edge (P(U<=p1), P(p1<U<=p2), P(U>p2)); the class
                        vector is i.i.d. across edges under the coupling.
    """

    p1: float
    p2: float
    M: int
    expected_n: float
    identity_matches: bool
    restricted_law: dict
    edge_class_probs: np.ndarray


def exact_two_level(g, p1, p2, M):
    """Enumerate the 3^E edge classifications of the two-level coupling.

    Classes per edge: open at p1 (weight p1), sprinkled open in (p1,p2]
    (weight p2-p1), closed at p2 (weight 1-p2). For every configuration the
    pair count N is evaluated both through the squared-sizes identity and by
    the direct path definition, and asserted equal.
    """
    if not 0.0 <= p1 <= p2 <= 1.0:
        raise RangeError(f"need 0 <= p1 <= p2 <= 1, got ({p1}, {p2})")
    E = len(g.edges)
    nv = g.num_vertices
    if 3**E > 3**MAX_EDGES:
        raise ResourceCapError(f"3^{E} configurations exceed the cap")
    class_w = (p1, p2 - p1, 1.0 - p2)
    expected = _Kahan()
    law = {}
    matches = True
    for classes in product(range(3), repeat=E):
        # the identity check runs on every configuration, weighted or not
        w = 1.0
        for c in classes:
            w *= class_w[c]
        open1 = [g.edges[i] for i in range(E) if classes[i] == 0]
        open2 = [g.edges[i] for i in range(E) if classes[i] <= 1]
        labels1, sizes1 = _components_of(nv, open1)
        labels2, sizes2 = _components_of(nv, open2)
        small = {v for v in range(nv) if sizes1[labels1[v]] < M}
        # restricted percolation: p2-open edges internal to the large vertex set
        open_r = [(u, v) for u, v in open2 if u not in small and v not in small]
        labels_r, _ = _components_of(nv, open_r)
        rest_sizes = {}
        for v in range(nv):
            if v not in small:
                rest_sizes[labels_r[v]] = rest_sizes.get(labels_r[v], 0) + 1
        n_identity = sum(s * s for s in sizes2) - sum(
            s * s for s in rest_sizes.values()
        )
        # direct path-based count over ordered pairs (incl. coincident)
        adj = [[] for _ in range(nv)]
        for u, v in open2:
            adj[u].append(v)
            adj[v].append(u)
        n_direct = 0
        for u in range(nv):
            for v in range(nv):
                if labels2[u] != labels2[v]:
                    continue
                if u == v:
                    n_direct += 1 if u in small else 0
                    continue
                if _simple_paths_all_visit_small(g, adj, u, v, small):
                    n_direct += 1
        if n_identity != n_direct:
            matches = False
        expected.add(w * n_identity)
        key = tuple(sorted(rest_sizes.values(), reverse=True))
        law[key] = law.get(key, 0.0) + w
    probs = np.array([[p1, p2 - p1, 1.0 - p2]] * E)
    return ExactTwoLevel(
        p1=float(p1), p2=float(p2), M=int(M),
        expected_n=expected.total, identity_matches=matches,
        restricted_law=law, edge_class_probs=probs,
    )
