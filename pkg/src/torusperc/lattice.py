"""Torus geometry: vertices, edge models, canonical ids, wrap-around distances.

The graph is the d-dimensional discrete torus with side n. Two edge models are
supported: nearest-neighbor (vertices at L1 distance exactly 1, degree m = 2d)
and spread-out (vertices at Linf distance at most L, degree m = (2L+1)^d - 1).

Vertices are indexed in mixed radix with axis 0 fastest-varying, so
index = sum_i coord[i] * n^i. Each undirected edge gets exactly one id: the
neighbor offsets are split into +/- pairs, one representative per pair is kept
(the "half offsets", enumerated in a fixed order), and the edge {v, v+o} with
half offset o of rank r has id v * (m/2) + r. Ids therefore cover
[0, V*m/2) with no duplicates, which keeps runs reproducible regardless of
traversal order.

Everything here is immutable after construction and safe to share between
workers.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import RangeError, ResourceCapError

NEAREST_NEIGHBOR = "nn"
SPREAD_OUT = "spread"

# Reject tori whose vertex count exceeds this unless the caller raises the cap.
DEFAULT_MAX_VOLUME = 1 << 26


@dataclass(frozen=True)
class TorusSpec:
    """The torus Z_n^d with its edge model.

    d, n     : dimension and side length (n >= 3 so neighbor sets have no
               duplicates; same reason the spread-out model needs 2L+1 <= n).
    model    : NEAREST_NEIGHBOR or SPREAD_OUT.
    L        : spread-out radius (ignored for nearest-neighbor).
    max_volume : cap on V = n^d; construction fails above it.
    """

    d: int
    n: int
    model: str = NEAREST_NEIGHBOR
    L: int = 1
    max_volume: int = DEFAULT_MAX_VOLUME

    def __post_init__(self):
        if self.d < 1:
            raise RangeError(f"dimension must be >= 1, got {self.d}")
        if self.n < 2:
            raise RangeError(f"side length must be >= 2, got {self.n}")
        if self.model not in (NEAREST_NEIGHBOR, SPREAD_OUT):
            raise RangeError(f"unknown edge model {self.model!r}")
        if self.model == SPREAD_OUT:
            if self.L < 1:
                raise RangeError(f"spread-out radius must be >= 1, got {self.L}")
            if 2 * self.L + 1 > self.n:
                raise RangeError(
                    f"spread-out radius L={self.L} needs 2L+1 <= n={self.n}; "
                    "otherwise the neighbor set has duplicates"
                )
        else:
            # Same duplicate-avoidance constraint as spread-out with L=1:
            # at n=2 the offsets +e_i and -e_i hit the same vertex.
            if self.n < 3:
                raise RangeError("nearest-neighbor model needs n >= 3")
        # n^d computed in exact integer arithmetic; no silent overflow.
        volume = self.n**self.d
        if volume > self.max_volume:
            raise ResourceCapError(
                f"V = {self.n}^{self.d} = {volume} exceeds cap {self.max_volume}"
            )

    @property
    def V(self):
        return self.n**self.d

    @property
    def m(self):
        if self.model == NEAREST_NEIGHBOR:
            return 2 * self.d
        return (2 * self.L + 1) ** self.d - 1

    @property
    def half_degree(self):
        return self.m // 2

    @property
    def edge_count(self):
        return self.V * self.m // 2

    # --- offset tables (cached lazily; the dataclass itself stays frozen) ---

    def half_offsets(self):
        """One representative per +/- offset pair, fixed enumeration order.

        Nearest-neighbor: +e_0, ..., +e_{d-1}. Spread-out: all offsets in
        {-L..L}^d whose first nonzero coordinate is positive, enumerated with
        axis 0 fastest-varying. Rank in this array is the offset-rank used in
        edge ids.
        """
        cached = _OFFSET_CACHE.get(self._key())
        if cached is not None:
            return cached
        if self.model == NEAREST_NEIGHBOR:
            offs = np.eye(self.d, dtype=np.int64)
        else:
            rng = range(-self.L, self.L + 1)
            all_offs = [
                np.array(o[::-1], dtype=np.int64)
                for o in product(rng, repeat=self.d)
                if any(c != 0 for c in o)
            ]
            offs = np.array([o for o in all_offs if _lex_positive(o)], dtype=np.int64)
        offs.setflags(write=False)
        _OFFSET_CACHE[self._key()] = offs
        return offs

    def all_offsets(self):
        """All m neighbor offsets: half offsets followed by their negatives."""
        half = self.half_offsets()
        return np.concatenate([half, -half], axis=0)

    def _key(self):
        return (self.d, self.n, self.model, self.L)


_OFFSET_CACHE = {}


def _lex_positive(off):
    for c in off:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


# --- vertex indexing -------------------------------------------------------


def vertex_coords(spec, index):
    """Mixed-radix decode: index -> coordinate array, axis 0 fastest-varying.

    Accepts a scalar or an array of indices; returns shape (..., d).
    """
    idx = np.asarray(index, dtype=np.int64)
    coords = np.empty(idx.shape + (spec.d,), dtype=np.int64)
    rem = idx
    for axis in range(spec.d):
        coords[..., axis] = rem % spec.n
        rem = rem // spec.n
    return coords


def vertex_index(spec, coords):
    """Mixed-radix encode, the inverse of `vertex_coords` (coords mod n)."""
    c = np.asarray(coords, dtype=np.int64) % spec.n
    idx = np.zeros(c.shape[:-1], dtype=np.int64)
    stride = 1
    for axis in range(spec.d):
        idx = idx + c[..., axis] * stride
        stride *= spec.n
    return idx


def shift_index(spec, index, offset):
    """Index of vertex + offset with per-axis wrap (vectorized over index)."""
    return vertex_index(spec, vertex_coords(spec, index) + np.asarray(offset))


# --- neighbors, edges ------------------------------------------------------


def neighbors(spec, v):
    """The m neighbors of vertex v, as an index array."""
    coords = vertex_coords(spec, v)
    return vertex_index(spec, coords[None, :] + spec.all_offsets())


def edge_id(spec, v, rank):
    """Canonical id of the edge from v along half offset `rank`."""
    return int(v) * spec.half_degree + int(rank)


def edge_endpoints(spec, e):
    """Both endpoints of edge id e (vectorized over e)."""
    e = np.asarray(e, dtype=np.int64)
    h = spec.half_degree
    v = e // h
    rank = e % h
    offs = spec.half_offsets()
    u = vertex_index(spec, vertex_coords(spec, v) + offs[rank])
    return v, u


def incident_edges(spec, v):
    """The m edge ids incident to vertex v.

    First the half_degree edges owned by v, then for each half offset o the
    edge owned by v - o (which reaches v through +o).
    """
    h = spec.half_degree
    offs = spec.half_offsets()
    own = np.int64(v) * h + np.arange(h, dtype=np.int64)
    owners = vertex_index(spec, vertex_coords(spec, v)[None, :] - offs)
    other = owners * h + np.arange(h, dtype=np.int64)
    return np.concatenate([own, other])


def edges(spec):
    """Iterate every undirected edge exactly once as (edge_id, u, v)."""
    h = spec.half_degree
    offs = spec.half_offsets()
    for v in range(spec.V):
        cv = vertex_coords(spec, v)
        for rank in range(h):
            u = int(vertex_index(spec, cv + offs[rank]))
            yield v * h + rank, v, u


def all_edge_endpoints(spec):
    """Endpoint arrays (tails, heads) for all edges, ordered by edge id.

    tails[e], heads[e] are the endpoints of edge id e. Vectorized and cached
    per spec (int32 when V allows); this is the workhorse for large-lattice
    runs, where it is hit once per percolation level.
    """
    cached = _ENDPOINT_CACHE.get(spec._key())
    if cached is not None:
        return cached
    h = spec.half_degree
    offs = spec.half_offsets()
    dtype = np.int32 if spec.V < 2**31 else np.int64
    v = np.arange(spec.V, dtype=np.int64)
    coords = vertex_coords(spec, v)
    tails = np.repeat(v.astype(dtype), h)
    heads = np.empty(spec.V * h, dtype=dtype)
    for rank in range(h):
        heads[rank::h] = vertex_index(spec, coords + offs[rank]).astype(dtype)
    tails.setflags(write=False)
    heads.setflags(write=False)
    if len(_ENDPOINT_CACHE) > 8:
        _ENDPOINT_CACHE.clear()
    _ENDPOINT_CACHE[spec._key()] = (tails, heads)
    return tails, heads


_ENDPOINT_CACHE = {}


# --- distances --------------------------------------------------------------


def wrap_deltas(spec, u, v):
    """Per-axis wrap-around coordinate distances min(|du|, n-|du|)."""
    cu = vertex_coords(spec, u)
    cv = vertex_coords(spec, v)
    raw = np.abs(cu - cv)
    return np.minimum(raw, spec.n - raw)


def torus_distance(spec, u, v):
    """Wrap-around distance in the model's norm.

    L1 for nearest-neighbor, Linf for spread-out; symmetric, zero iff u == v
    (callers wanting the paper-style clamped norm apply max(.,1) themselves).
    """
    deltas = wrap_deltas(spec, u, v)
    if spec.model == NEAREST_NEIGHBOR:
        return deltas.sum(axis=-1)
    return deltas.max(axis=-1)


def distances_from_origin(spec):
    """torus_distance(spec, 0, v) for every vertex v, as one array."""
    v = np.arange(spec.V, dtype=np.int64)
    coords = vertex_coords(spec, v)
    raw = np.minimum(coords, spec.n - coords)
    if spec.model == NEAREST_NEIGHBOR:
        return raw.sum(axis=1)
    return raw.max(axis=1)
