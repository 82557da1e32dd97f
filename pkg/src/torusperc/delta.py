"""The closed-edge count matrix between large components, and its functionals.

For distinct components a, b of size >= M at level p, entry (a,b) counts the
closed edges with one endpoint in each (edges between distinct components are
closed by definition). The matrix is symmetric with zero diagonal and is the
generator of the coalescent seen by sprinkling: components a, b merge under a
sprinkle p -> p' with probability 1 - ((1-p')/(1-p))^{Delta_ab}.

Functionals implemented here:

* norms: Frobenius^2, max entry, max squared row sum, Tr(Delta^4)
  (exact below a size crossover, Hutchinson-estimated above it);
* the rank-one misfit
      W(p; M) = inf_{t>0} sum_{a != b} (Delta_ab - t m |a||b| / V)^2,
  whose minimizer has the closed form t_min = V S1 / (m S2) with
  S1 = sum |a||b| Delta_ab and S2 = sum_{a != b} |a|^2 |b|^2;
* top-of-spectrum eigenpairs with a nonnegative leading eigenvector;
* the sprinkle system: the level p2* at which the top merge eigenvalue is
  calibrated, the merge-probability matrix Q, its rank-one surrogate, and the
  calibration constant c* solving Tr(Qtilde W(p1, c*)) = 0;
* matrix functions of Q(I-Q)^{-1} (the Neumann series sum_k Q^k);
* the seven-line diagnostic table of subcritical inequalities.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import lattice, rng
from .components import build_components
from .errors import (
    ConvergenceError,
    DegenerateIndexError,
    DivergenceError,
    RangeError,
)

# Above this many indexed components, Tr(Delta^4) switches to a stochastic
# estimate and Neumann-operator dense queries are refused.
EXACT_TRACE4_MAX = 2000
HUTCHINSON_PROBES = 64

EIG_TOL = 1e-8


@dataclass
class DeltaMatrix:
    """Sparse symmetric closed-edge counts between the large components.

    sizes[i] is the vertex count of indexed component i; labels maps each
    torus vertex to its index in [0,K) or -1 if its component is small.
    """

    p: float
    M: int
    sizes: np.ndarray
    mat: sp.csr_matrix
    labels: np.ndarray
    V: int
    m: int

    @property
    def K(self):
        return len(self.sizes)

    @property
    def nnz(self):
        return self.mat.nnz


def build_delta(cfg, p, M):
    """Accumulate closed-edge counts between distinct components of size >= M."""
    if not 0.0 <= p < 1.0:
        raise RangeError(f"p must be in [0,1), got {p}")
    if M < 1:
        raise RangeError(f"M must be >= 1, got {M}")
    spec = cfg.spec
    part = build_components(cfg, p)
    large_ids = np.flatnonzero(part.sizes >= M)
    index_of = np.full(part.num_components, -1, dtype=np.int64)
    index_of[large_ids] = np.arange(len(large_ids))
    labels = index_of[part.labels]
    K = len(large_ids)
    sizes = part.sizes[large_ids].astype(np.int64)

    tails, heads = lattice.all_edge_endpoints(spec)
    closed = ~cfg.open_mask(p)
    la = labels[tails[closed]]
    lb = labels[heads[closed]]
    pick = (la >= 0) & (lb >= 0) & (la != lb)
    la, lb = la[pick], lb[pick]
    if K == 0 or la.size == 0:
        mat = sp.csr_matrix((K, K), dtype=np.int64)
    else:
        ones = np.ones(la.size, dtype=np.int64)
        upper = sp.coo_matrix(
            (ones, (np.minimum(la, lb), np.maximum(la, lb))), shape=(K, K)
        ).tocsr()
        upper.sum_duplicates()
        mat = upper + upper.T
    return DeltaMatrix(
        p=float(p), M=int(M), sizes=sizes, mat=mat, labels=labels,
        V=spec.V, m=spec.m,
    )


def from_dense(dense, sizes, V, m, p=0.0, M=1):
    """DeltaMatrix from an explicit symmetric integer array (tests, demos)."""
    dense = np.asarray(dense)
    if dense.shape[0] != dense.shape[1] or not np.array_equal(dense, dense.T):
        raise RangeError("delta matrix must be square symmetric")
    if np.any(np.diag(dense) != 0):
        raise RangeError("delta matrix must have zero diagonal")
    return DeltaMatrix(
        p=p, M=M, sizes=np.asarray(sizes, dtype=np.int64),
        mat=sp.csr_matrix(dense), labels=None, V=int(V), m=int(m),
    )


# --- norms -------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaNorms:
    frob2: float
    max_entry: float
    max_row_sq: float
    trace4: float
    trace4_is_estimate: bool
    trace4_se: float


def norms(dm, probes=HUTCHINSON_PROBES, probe_seed=0, exact_max=EXACT_TRACE4_MAX):
    """Frobenius^2, max entry, max_a sum_b Delta_ab^2, and Tr(Delta^4).

    The trace is exact (via the Frobenius norm of Delta^2) up to `exact_max`
    components, and a Hutchinson estimate with Rademacher probes beyond that,
    flagged and carrying a standard error.
    """
    A = dm.mat
    if A.nnz == 0:
        return DeltaNorms(0.0, 0.0, 0.0, 0.0, False, 0.0)
    data = A.data.astype(np.float64)
    frob2 = float(np.sum(data**2))
    max_entry = float(data.max())
    sq = A.copy().astype(np.float64)
    sq.data = sq.data**2
    max_row_sq = float(np.asarray(sq.sum(axis=1)).ravel().max())
    if dm.K <= exact_max:
        B = (A @ A).astype(np.float64)
        trace4 = float(np.sum(B.data**2))
        return DeltaNorms(frob2, max_entry, max_row_sq, trace4, False, 0.0)
    gen = rng.generator(probe_seed, dm.K, A.nnz)
    samples = np.empty(probes)
    Af = A.astype(np.float64)
    for i in range(probes):
        z = gen.integers(0, 2, size=dm.K).astype(np.float64) * 2.0 - 1.0
        y = Af @ (Af @ z)
        samples[i] = float(y @ y)
    trace4 = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(probes))
    return DeltaNorms(frob2, max_entry, max_row_sq, trace4, True, se)


# --- the rank-one misfit -----------------------------------------------------


@dataclass(frozen=True)
class WReport:
    """Closed-form minimizer data for the rank-one misfit.

    w_value = frob2 - 2 (t_min m / V) S1 + (t_min m / V)^2 S2. When S1 = 0 the
    infimum over t > 0 is attained at the boundary t = 0 and `boundary` is set.
    """

    t_min: float
    w_value: float
    S1: float
    S2: float
    frob2: float
    boundary: bool


def w_functional(dm, V=None, m=None):
    """Minimize sum_{a != b} (Delta_ab - t m |a||b| / V)^2 over t.

    S2 is computed as (sum |a|^2)^2 - sum |a|^4; the minimizer is
    t_min = V S1 / (m S2) and the minimum frob2 - S1^2 / S2.
    """
    V = dm.V if V is None else V
    m = dm.m if m is None else m
    if dm.K < 2:
        raise DegenerateIndexError(f"need >= 2 indexed components, have {dm.K}")
    sizes = dm.sizes.astype(np.float64)
    S2 = float(np.sum(sizes**2) ** 2 - np.sum(sizes**4))
    frob2 = float(np.sum(dm.mat.data.astype(np.float64) ** 2))
    # S1 = y^T Delta y with y the size vector (diagonal vanishes)
    S1 = float(sizes @ (dm.mat @ sizes))
    if S1 == 0.0:
        return WReport(t_min=0.0, w_value=frob2, S1=0.0, S2=S2, frob2=frob2,
                       boundary=True)
    t_min = V * S1 / (m * S2)
    coeff = t_min * m / V
    w_value = frob2 - 2.0 * coeff * S1 + coeff**2 * S2
    return WReport(t_min=float(t_min), w_value=float(w_value), S1=S1, S2=S2,
                   frob2=frob2, boundary=False)


def w_at(dm, t, V=None, m=None):
    """The misfit sum at a given t (grid/oracle evaluations)."""
    V = dm.V if V is None else V
    m = dm.m if m is None else m
    sizes = dm.sizes.astype(np.float64)
    S2 = float(np.sum(sizes**2) ** 2 - np.sum(sizes**4))
    frob2 = float(np.sum(dm.mat.data.astype(np.float64) ** 2))
    S1 = float(sizes @ (dm.mat @ sizes))
    coeff = t * m / V
    return frob2 - 2.0 * coeff * S1 + coeff**2 * S2


# --- spectrum ----------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    top_vector: np.ndarray   # unit, entrywise nonnegative
    residual: float


def _dense_topk(dense, k):
    vals, vecs = np.linalg.eigh(dense)
    order = np.argsort(vals)[::-1]
    return vals[order[:k]], vecs[:, order[:k]]


def spectrum(matrix, k=2, tol=EIG_TOL, size_hint=None):
    """Top-k eigenvalues (descending) and a nonnegative top eigenvector.

    Accepts a DeltaMatrix or any symmetric scipy sparse matrix. Uses ARPACK's
    restarted Lanczos with a deterministic positive start vector, falling back
    to a dense solve when the matrix is small. For a symmetric nonnegative
    matrix the absolute value of any top eigenvector is again a top
    eigenvector, so the leading vector is returned entrywise nonnegative.
    Raises ConvergenceError (with the best residual) if the verified residual
    ||A v - lambda1 v|| exceeds tol * max(|lambda1|, 1e-300).
    """
    if isinstance(matrix, DeltaMatrix):
        A = matrix.mat.astype(np.float64)
        size_hint = matrix.sizes
    else:
        A = matrix.astype(np.float64)
    K = A.shape[0]
    if k > K:
        raise RangeError(f"asked for {k} eigenvalues of a {K}x{K} matrix")
    if K == 0:
        raise DegenerateIndexError("empty component index")
    v0 = None
    if size_hint is not None:
        v0 = np.asarray(size_hint, dtype=np.float64)
    if v0 is None or v0.sum() == 0:
        v0 = np.ones(K)
    v0 = v0 / np.linalg.norm(v0)

    if K <= max(16, k + 1) or k >= K - 1:
        vals, vecs = _dense_topk(A.toarray(), k)
    else:
        try:
            vals, vecs = spla.eigsh(A, k=k, which="LA", v0=v0,
                                    maxiter=10 * K, tol=tol / 10)
        except spla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues) < k:
                raise ConvergenceError(
                    f"ARPACK stalled after {10 * K} iterations",
                    best_residual=None,
                ) from exc
            vals, vecs = exc.eigenvalues, exc.eigenvectors
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]

    top = np.abs(vecs[:, 0])
    nrm = np.linalg.norm(top)
    top = top / nrm if nrm > 0 else top
    lam1 = float(vals[0])
    residual = float(np.linalg.norm(A @ top - lam1 * top))
    if residual > tol * max(abs(lam1), 1e-300):
        raise ConvergenceError(
            f"residual {residual:.3e} exceeds {tol:.1e} * |lambda1|",
            best_residual=residual,
        )
    return Spectrum(eigenvalues=np.array(vals, dtype=np.float64),
                    top_vector=top, residual=residual)


# --- the sprinkle system -----------------------------------------------------


@dataclass
class QSystem:
    """Merge probabilities for the calibrated sprinkle p1 -> p2*.

    Q_ab = 1 - ((1-p2*)/(1-p1))^{Delta_ab} is the probability that components
    a and b are joined directly when sprinkling from p1 to p2*, where p2* is
    chosen so that (p2*-p1)/(1-p1) * lambda1(Delta) = 1 - eps2/eps1. The
    rank-one surrogate of Q(I-Q)^{-1} is qtilde_scale * v v^T.
    """

    p1: float
    p2_star: float
    Q: sp.csr_matrix
    lambda1_delta: float
    lambda1_Q: float
    lambda2_Q: float
    v: np.ndarray
    qtilde_scale: float
    c_star: float
    sizes: np.ndarray


def q_system(dm, p1, eps1, eps2, m=None, V=None):
    """Build the calibrated sprinkle system from a Delta matrix at p1.

    The calibration constant c* is evaluated through the rank-one trace
    identities: with y the size vector,
        c* = V (v^T Delta v) / (m [ (v.y)^2 - sum_a v_a^2 y_a^2 ]),
    the qtilde_scale canceling between numerator and denominator.
    """
    V = dm.V if V is None else V
    m = dm.m if m is None else m
    if not 0 < eps2 < eps1:
        raise RangeError(f"need 0 < eps2 < eps1, got ({eps1}, {eps2})")
    if dm.K < 2:
        raise DegenerateIndexError(f"need >= 2 indexed components, have {dm.K}")
    spec_top = spectrum(dm, k=min(2, dm.K))
    lam1 = float(spec_top.eigenvalues[0])
    if lam1 <= 0:
        raise DegenerateIndexError("lambda1(Delta) must be positive")
    p2_star = p1 + (1.0 - p1) * (1.0 - eps2 / eps1) / lam1
    if p2_star >= 1.0:
        raise RangeError(f"p2* = {p2_star} >= 1")

    ratio = (1.0 - p2_star) / (1.0 - p1)
    Q = dm.mat.astype(np.float64).copy()
    Q.data = 1.0 - ratio ** dm.mat.data.astype(np.float64)
    qspec = spectrum(Q, k=min(2, dm.K), size_hint=dm.sizes)
    lam1_Q = float(qspec.eigenvalues[0])
    lam2_Q = float(qspec.eigenvalues[1]) if len(qspec.eigenvalues) > 1 else float("nan")
    v = qspec.top_vector
    if lam1_Q >= 1.0:
        raise RangeError(f"lambda1(Q) = {lam1_Q} >= 1")
    scale = lam1_Q / (1.0 - lam1_Q)

    y = dm.sizes.astype(np.float64)
    numer = float(v @ (dm.mat @ v))
    denom = float((v @ y) ** 2 - np.sum(v**2 * y**2))
    if denom <= 0:
        raise DegenerateIndexError("rank-one trace denominator <= 0")
    c_star = V * numer / (m * denom)
    return QSystem(
        p1=float(p1), p2_star=float(p2_star), Q=Q,
        lambda1_delta=lam1, lambda1_Q=lam1_Q, lambda2_Q=lam2_Q,
        v=v, qtilde_scale=float(scale), c_star=float(c_star),
        sizes=dm.sizes,
    )


class NeumannOperator:
    """Matrix functions of Q(I-Q)^{-1} = sum_{k>=1} Q^k.

    Entrywise this dominates the pair-connection probabilities of the
    component-graph percolation. Matrix-vector products go through a conjugate
    gradient solve with I - Q (symmetric positive definite when
    lambda1(Q) < 1); dense queries are available for small systems.
    """

    def __init__(self, qs, dense_max=EXACT_TRACE4_MAX):
        if qs.lambda1_Q >= 1.0:
            raise DivergenceError(f"lambda1(Q) = {qs.lambda1_Q} >= 1")
        self.Q = qs.Q
        self.K = qs.Q.shape[0]
        self.lambda1_Q = qs.lambda1_Q
        self.dense_max = dense_max
        self._dense = None

    def matvec(self, x, rtol=1e-12):
        x = np.asarray(x, dtype=np.float64)
        I = sp.identity(self.K, format="csr")
        y, info = spla.cg(I - self.Q, self.Q @ x, rtol=rtol, maxiter=50 * self.K)
        if info != 0:
            raise DivergenceError(f"CG failed with info={info}")
        return y

    def _dense_op(self):
        if self.K > self.dense_max:
            raise DivergenceError(
                f"dense Neumann queries limited to K <= {self.dense_max}"
            )
        if self._dense is None:
            Qd = self.Q.toarray()
            self._dense = np.linalg.solve(np.eye(self.K) - Qd, Qd)
        return self._dense

    def entry(self, a, b):
        return float(self._dense_op()[a, b])

    def frobenius(self):
        return float(np.linalg.norm(self._dense_op(), "fro"))


def neumann_bound(qs, dense_max=EXACT_TRACE4_MAX):
    """Operator access to Q(I-Q)^{-1}; raises DivergenceError if lambda1 >= 1."""
    return NeumannOperator(qs, dense_max=dense_max)


# --- the diagnostic table ----------------------------------------------------


@dataclass(frozen=True)
class OmegaConstants:
    """Free constants of the diagnostic inequalities.

    c_dl fills the unspecified C(d,L) slot; the slack values fill the o_m(1)
    slots (a slack s makes the bounds (1-s)... and (1+s)...).
    """

    c_dl: float = 1.0
    slack_product: float = 0.1
    slack_trace4: float = 0.1


@dataclass(frozen=True)
class OmegaRow:
    name: str
    lhs: float
    rhs: float
    ratio: float
    direction: str  # "<=" or ">="
    constant_dependent: bool
    holds: bool  # None when constant_dependent


def omega_good_report(dm, moments, p, chi_hat, constants=OmegaConstants()):
    """Evaluate the seven subcritical inequalities on one realization.

    Lines with free constants (the Frobenius bound's C(d,L) and both o_m(1)
    slacks) are reported as ratios only (holds=None); the fully explicit lines
    carry a verdict.
    """
    V, m = dm.V, dm.m
    nn = norms(dm)
    w = None
    if dm.K >= 2:
        w = w_functional(dm)
    S1 = w.S1 if w is not None else 0.0
    logV = np.log(V)
    chi = max(chi_hat, 1e-300)
    log_ratio = np.log(max(V / chi**3, 1.0 + 1e-12))

    rows = []

    def add(name, lhs, rhs, direction, constant_dependent):
        ratio = lhs / rhs if rhs != 0 else np.inf
        holds = None
        if not constant_dependent:
            holds = bool(lhs <= rhs) if direction == "<=" else bool(lhs >= rhs)
        rows.append(OmegaRow(name, float(lhs), float(rhs), float(ratio),
                             direction, constant_dependent, holds))

    add("max_component_size", moments.max_size, 2.0 * chi**2 * log_ratio,
        "<=", False)
    add("sum_sizes_sq", moments.s2, (1.0 + 1.0 / m) * V * chi, "<=", False)
    add("frobenius_sq", nn.frob2, constants.c_dl * chi**2, "<=", True)
    add("size_weighted_sum", S1,
        (1.0 - constants.slack_product) * V * m * chi**2, ">=", True)
    add("trace4", nn.trace4, (1.0 + constants.slack_trace4) * m**4 * chi**4,
        "<=", True)
    add("max_entry", nn.max_entry, logV**5 * chi**4 / V, "<=", False)
    add("max_row_sq", nn.max_row_sq, logV**10 * chi**5 / V, "<=", False)
    return rows
