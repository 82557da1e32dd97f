"""Component graphs: the multiplicative model, the sprinkled model, and their
edge-level coupling.

Both models are inhomogeneous random graphs on the index of large components.
In the multiplicative graph a pair (A,B) is joined with probability
1 - exp(-q w_A w_B) where w_A = |A| c2^(1/3) / V^(2/3); in the sprinkled graph
with probability 1 - ((1-p2)/(1-p1))^{Delta_AB}, which is exactly the chance
that sprinkling the coupling from p1 to p2 opens one of the Delta_AB closed
edges between A and B. Coupling the two graphs pair by pair through one shared
uniform realizes the maximal coupling, so the expected number of disagreeing
edges is sum |p_AB - q_AB|.

The Erdos-Renyi oracle samples G(n, 1/n + lambda n^{-4/3}) by skip-sampling
the lexicographic pair sequence and reports component sizes rescaled by
n^{-2/3}; by Aldous's theorem these converge to the same excursion-length
limit the torus models target.
"""

from dataclasses import dataclass, field

import numpy as np

from . import lattice, rng
from .components import UnionFind
from .errors import RangeError, ResourceCapError

DEFAULT_MAX_INDEX = 20000


@dataclass
class WeightedIndex:
    """Large-component index carrying multiplicative weights.

    weights w_A = |A| * c2^(1/3) / V^(2/3); sigma2 and sigma3 are the second
    and third power sums of the weights and max_w_over_sigma2 is the quantity
    whose vanishing Aldous's theorem requires.
    """

    sizes: np.ndarray
    V: int
    c2: float
    q: float
    weights: np.ndarray = field(init=False)
    sigma2: float = field(init=False)
    sigma3: float = field(init=False)
    max_w_over_sigma2: float = field(init=False)

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if np.any(sizes <= 0):
            raise RangeError("component sizes must be positive")
        if self.q < 0:
            raise RangeError(f"q must be >= 0, got {self.q}")
        self.sizes = sizes
        self.weights = sizes * self.c2 ** (1.0 / 3.0) / self.V ** (2.0 / 3.0)
        self.sigma2 = float(np.sum(self.weights**2))
        self.sigma3 = float(np.sum(self.weights**3))
        self.max_w_over_sigma2 = float(self.weights.max() / self.sigma2)

    @property
    def K(self):
        return len(self.weights)


@dataclass
class ComponentGraph:
    """A sampled graph on the component index.

    edges holds index pairs (i, j) with i < j; edge_probs the per-pair
    probability the sampler used; sizes the vertex weights carried over.
    """

    K: int
    sizes: np.ndarray
    edges: np.ndarray  # shape (n_edges, 2)
    edge_probs: np.ndarray
    weights: np.ndarray = None


def _pair_arrays(K):
    iu, ju = np.triu_indices(K, k=1)
    return iu, ju


def sample_gtimes(idx, seed, max_index=DEFAULT_MAX_INDEX):
    """Sample the multiplicative component graph at intensity idx.q.

    Every unordered pair is examined (O(K^2)); refuses indices larger than
    `max_index`.
    """
    if idx.K > max_index:
        raise ResourceCapError(f"index size {idx.K} exceeds cap {max_index}")
    iu, ju = _pair_arrays(idx.K)
    probs = 1.0 - np.exp(-idx.q * idx.weights[iu] * idx.weights[ju])
    u = rng.generator(seed, 1).random(len(iu))
    present = u < probs
    return ComponentGraph(
        K=idx.K,
        sizes=idx.sizes.copy(),
        edges=np.column_stack([iu[present], ju[present]]),
        edge_probs=probs,
        weights=idx.weights.copy(),
    )


def gcomp_pair_probs(dm, p1, p2):
    """Per-pair sprinkle probabilities 1 - ((1-p2)/(1-p1))^{Delta_AB}.

    Returned as a dense (iu, ju, probs) triple over all unordered pairs; pairs
    with Delta = 0 get probability 0.
    """
    if not p1 <= p2 < 1.0:
        raise RangeError(f"need p1 <= p2 < 1, got ({p1}, {p2})")
    K = dm.K
    iu, ju = _pair_arrays(K)
    ratio = (1.0 - p2) / (1.0 - p1)
    dense = dm.mat.toarray().astype(np.float64)
    probs = 1.0 - ratio ** dense[iu, ju]
    return iu, ju, probs


def sample_gcomp(dm, p1, p2, mode, seed=None, cfg=None,
                 max_index=DEFAULT_MAX_INDEX):
    """Sample the sprinkled component graph between levels p1 and p2.

    mode="bernoulli" draws independent pair indicators from the sprinkle
    probabilities (requires `seed`). mode="coupled" reads the shared uniforms
    of `cfg` (which must be the configuration `dm` was built from) and joins a
    pair exactly when one of its counted closed edges has U in (p1, p2]; the
    two modes have the same edge-marginal law.
    """
    if dm.K > max_index:
        raise ResourceCapError(f"index size {dm.K} exceeds cap {max_index}")
    if mode == "bernoulli":
        if seed is None:
            raise ValueError("bernoulli mode needs a seed")
        iu, ju, probs = gcomp_pair_probs(dm, p1, p2)
        u = rng.generator(seed, 2).random(len(iu))
        present = u < probs
        return ComponentGraph(
            K=dm.K, sizes=dm.sizes.astype(np.float64),
            edges=np.column_stack([iu[present], ju[present]]),
            edge_probs=probs,
        )
    if mode == "coupled":
        if cfg is None:
            raise ValueError("coupled mode needs the originating configuration")
        if dm.labels is None:
            raise ValueError("this DeltaMatrix carries no vertex labels")
        if not p1 <= p2 < 1.0:
            raise RangeError(f"need p1 <= p2 < 1, got ({p1}, {p2})")
        spec = cfg.spec
        tails, heads = lattice.all_edge_endpoints(spec)
        w = cfg.all_weights()
        la, lb = dm.labels[tails], dm.labels[heads]
        hit = (w > p1) & (w <= p2) & (la >= 0) & (lb >= 0) & (la != lb)
        a = np.minimum(la[hit], lb[hit])
        b = np.maximum(la[hit], lb[hit])
        pairs = np.unique(np.column_stack([a, b]), axis=0) if a.size else \
            np.empty((0, 2), dtype=np.int64)
        iu, ju, probs = gcomp_pair_probs(dm, p1, p2)
        return ComponentGraph(
            K=dm.K, sizes=dm.sizes.astype(np.float64),
            edges=pairs, edge_probs=probs,
        )
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class CouplingReport:
    """One joint draw of the two component graphs through shared uniforms."""

    disagreements: int
    sum_abs_diff: float
    sum_sq_diff: float
    n_pairs: int
    gtimes_edges: np.ndarray
    gcomp_edges: np.ndarray


def couple_edges(idx, dm, p1, p2, q=None, seed=0):
    """Maximal per-pair coupling of the multiplicative and sprinkled graphs.

    One uniform per unordered pair decides both indicators, so a pair
    disagrees with probability exactly |p_AB - q_AB|. Returns the disagreement
    count of this draw together with sum |p - q| and sum (p - q)^2 over pairs.
    """
    if idx.K != dm.K:
        raise RangeError("index and Delta matrix must share the component set")
    q_int = idx.q if q is None else q
    iu, ju, p_ab = gcomp_pair_probs(dm, p1, p2)
    q_ab = 1.0 - np.exp(-q_int * idx.weights[iu] * idx.weights[ju])
    u = rng.generator(seed, 3).random(len(iu))
    in_times = u < q_ab
    in_comp = u < p_ab
    disagree = in_times != in_comp
    return CouplingReport(
        disagreements=int(disagree.sum()),
        sum_abs_diff=float(np.abs(p_ab - q_ab).sum()),
        sum_sq_diff=float(((p_ab - q_ab) ** 2).sum()),
        n_pairs=len(iu),
        gtimes_edges=np.column_stack([iu[in_times], ju[in_times]]),
        gcomp_edges=np.column_stack([iu[in_comp], ju[in_comp]]),
    )


def merged_sizes(g):
    """Descending merged size and weight vectors of a component graph."""
    uf = UnionFind(g.K)
    for a, b in np.asarray(g.edges).reshape(-1, 2):
        uf.union(int(a), int(b))
    roots = uf.roots()
    _, inv = np.unique(roots, return_inverse=True)
    sizes = np.bincount(inv, weights=np.asarray(g.sizes, dtype=np.float64))
    out_sizes = np.sort(sizes)[::-1]
    out_weights = None
    if g.weights is not None:
        weights = np.bincount(inv, weights=g.weights)
        out_weights = np.sort(weights)[::-1]
    return out_sizes, out_weights


# --- the Erdos-Renyi oracle --------------------------------------------------


@dataclass(frozen=True)
class ERSample:
    n: int
    lam: float
    p: float
    rescaled_sizes: np.ndarray  # descending, scaled by n^{-2/3}
    kappa_hat: float            # n^{-1/3} * (mean cluster size estimate)
    n_edges: int


def er_oracle(n, lam, seed):
    """Sample G(n, 1/n + lambda n^{-4/3}) and rescale component sizes.

    Edges are drawn by geometric skip-sampling over the n(n-1)/2 lexicographic
    pairs, so the expected cost is O(n + edges). Intended for n >= 1000 (the
    regime the limit speaks about); smaller n is allowed so the exhaustive
    tiny-graph oracle can cross-check the model. Raises RangeError if the edge
    probability leaves [0, 1].
    """
    n = int(n)
    if n < 2:
        raise RangeError(f"need n >= 2, got {n}")
    p = 1.0 / n + lam * float(n) ** (-4.0 / 3.0)
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"edge probability {p} outside [0,1] (lambda too large)")
    total_pairs = n * (n - 1) // 2
    gen = rng.generator(seed, 4)
    uf = UnionFind(n)
    n_edges = 0
    if p > 0:
        pos = -1
        log1mp = np.log1p(-p) if p < 1.0 else None
        batch = max(1024, int(total_pairs * p * 1.2) + 16)
        while True:
            if p >= 1.0:
                gaps = np.ones(batch, dtype=np.int64)
            else:
                u = gen.random(batch)
                gaps = 1 + np.floor(np.log1p(-u) / log1mp).astype(np.int64)
            positions = pos + np.cumsum(gaps)
            inside = positions < total_pairs
            positions = positions[inside]
            if positions.size:
                rows, cols = _pair_from_linear(positions, n)
                for a, b in zip(rows.tolist(), cols.tolist()):
                    uf.union(a, b)
                n_edges += positions.size
            if not inside.all():
                break
            pos = int(positions[-1])
    roots = uf.roots()
    _, inv = np.unique(roots, return_inverse=True)
    sizes = np.bincount(inv).astype(np.float64)
    rescaled = np.sort(sizes)[::-1] * float(n) ** (-2.0 / 3.0)
    kappa_hat = float(n) ** (-1.0 / 3.0) * float(np.sum(sizes**2) / n)
    return ERSample(n=n, lam=float(lam), p=float(p),
                    rescaled_sizes=rescaled, kappa_hat=kappa_hat,
                    n_edges=n_edges)


def _pair_from_linear(positions, n):
    """Invert the lexicographic enumeration of pairs (i<j) of [0,n).

    Position ell = i*n - i(i+1)/2 + (j - i - 1). The row index comes from the
    triangular-number inversion in float, then a local integer correction.
    """
    ell = positions.astype(np.float64)
    i = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * ell)) / 2).astype(np.int64)
    # float sqrt can land one row off; fix exactly in integer arithmetic
    def row_start(i):
        return i * n - (i * (i + 1)) // 2
    i = np.maximum(i, 0)
    over = row_start(i) > positions
    while np.any(over):
        i[over] -= 1
        over = row_start(i) > positions
    under = row_start(i + 1) <= positions
    while np.any(under):
        i[under] += 1
        under = row_start(i + 1) <= positions
    j = positions - row_start(i) + i + 1
    return i, j
