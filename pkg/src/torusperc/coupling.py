"""Simultaneous coupling of all percolation levels.

One uniform U_e per edge realizes every level at once: the configuration at
level p is {e : U_e <= p}, so configurations are automatically monotone in p
on every seed. Weights are counter-based (see rng.py): evaluating U_e costs
O(1), requires no stored array, and gives identical results regardless of the
order edges are visited in.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import RangeError, ResourceCapError

# sorted_edge_stream materializes all weights; refuse above this many edges.
DEFAULT_MAX_SORTED_EDGES = 1 << 27

_CHUNK = 1 << 22


@dataclass(frozen=True)
class CoupledConfiguration:
    """All percolation levels on `spec` under one master seed."""

    spec: object
    master_seed: int

    def weight(self, edge):
        """U_e for a single edge id."""
        return rng.uniform(self.master_seed, edge)

    def weights(self, edge_ids):
        """U_e for an array of edge ids."""
        return rng.uniforms(self.master_seed, np.asarray(edge_ids, dtype=np.uint64))

    def all_weights(self):
        """U_e for every edge, indexed by edge id (chunked to bound peak RAM)."""
        E = self.spec.edge_count
        out = np.empty(E, dtype=np.float64)
        for lo in range(0, E, _CHUNK):
            hi = min(lo + _CHUNK, E)
            out[lo:hi] = rng.uniforms(self.master_seed, np.arange(lo, hi, dtype=np.uint64))
        return out

    def open_mask(self, p):
        """Boolean array over edge ids: U_e <= p."""
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"p must be in [0,1], got {p}")
        return self.all_weights() <= p

    def replicate(self, index):
        """Independent configuration for replicate `index` of the same spec."""
        return CoupledConfiguration(self.spec, rng.derive_seed(self.master_seed, index))


def is_open(cfg, edge, p):
    """Whether edge `edge` is open at level p, i.e. U_e <= p."""
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"p must be in [0,1], got {p}")
    return bool(cfg.weight(edge) <= p)


def sorted_edge_stream(cfg, max_edges=DEFAULT_MAX_SORTED_EDGES):
    """All (edge_id, weight) pairs in nondecreasing weight order.

    Ties (absent in practice with 53-bit weights) break by edge id, so the
    stream is a deterministic function of the seed. Materializes every weight;
    raises ResourceCapError above `max_edges`.
    """
    E = cfg.spec.edge_count
    if E > max_edges:
        raise ResourceCapError(f"{E} edges exceed sorted-stream cap {max_edges}")
    w = cfg.all_weights()
    order = np.lexsort((np.arange(E, dtype=np.int64), w))
    return zip(order.tolist(), w[order].tolist())


def sorted_edge_arrays(cfg, max_edges=DEFAULT_MAX_SORTED_EDGES):
    """Array form of `sorted_edge_stream`: (edge_ids, weights), both sorted."""
    E = cfg.spec.edge_count
    if E > max_edges:
        raise ResourceCapError(f"{E} edges exceed sorted-stream cap {max_edges}")
    w = cfg.all_weights()
    order = np.lexsort((np.arange(E, dtype=np.int64), w))
    return order, w[order]


@dataclass(frozen=True)
class LevelPair:
    """An ordered pair of levels p1 <= p2, used wherever we sprinkle.

    When the (user-supplied) critical point is given, eps1 and eps2 are the
    distances p_c - p1 and p_c - p2.
    """

    p1: float
    p2: float
    p_c: float = None

    def __post_init__(self):
        if not (0.0 <= self.p1 <= self.p2 <= 1.0):
            raise RangeError(f"need 0 <= p1 <= p2 <= 1, got ({self.p1}, {self.p2})")

    @property
    def eps1(self):
        return None if self.p_c is None else self.p_c - self.p1

    @property
    def eps2(self):
        return None if self.p_c is None else self.p_c - self.p2


def sprinkle_survival(p1, p2, k):
    """Probability that none of k coupled edges opens when sprinkling p1 -> p2.

    Each edge closed at p1 stays closed at p2 with probability
    (1-p2)/(1-p1) independently, so k of them all stay closed with probability
    ((1-p2)/(1-p1))^k.
    """
    if not (0.0 <= p1 <= p2 <= 1.0):
        raise RangeError(f"need 0 <= p1 <= p2 <= 1, got ({p1}, {p2})")
    k = int(k)
    if k < 0:
        raise RangeError(f"k must be nonnegative, got {k}")
    if k == 0:
        return 1.0
    if p2 == 1.0:
        return 0.0
    return ((1.0 - p2) / (1.0 - p1)) ** k
