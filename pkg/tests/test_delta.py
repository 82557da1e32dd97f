import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from _util import find_seed_with_order
from torusperc import lattice, rng
from torusperc.components import build_components, cluster_moments
from torusperc.coupling import CoupledConfiguration
from torusperc.delta import (
    QSystem,
    build_delta,
    from_dense,
    neumann_bound,
    norms,
    omega_good_report,
    q_system,
    spectrum,
    w_at,
    w_functional,
)
from torusperc.errors import (
    DegenerateIndexError,
    DivergenceError,
    RangeError,
)
from torusperc.lattice import TorusSpec


def random_sparse_symmetric(K, density, seed, scale=5):
    gen = rng.generator(seed, 8)
    iu, ju = np.triu_indices(K, k=1)
    keep = gen.random(len(iu)) < density
    vals = gen.integers(1, scale + 1, size=int(keep.sum()))
    mat = sp.coo_matrix((vals, (iu[keep], ju[keep])), shape=(K, K)).tocsr()
    full = mat + mat.T
    sizes = gen.integers(1, 10, size=K)
    return from_dense(full.toarray(), sizes, V=K * 10, m=4)


class TestBuildDelta:
    def test_forced_four_cycle(self):
        # open {(0,1),(2,3)}: the two closed edges both join the two components
        spec = TorusSpec(d=1, n=4)
        cfg, thresholds = find_seed_with_order(spec, [{0, 2}])
        dm = build_delta(cfg, thresholds[0], 2)
        assert dm.K == 2
        assert dm.mat[0, 1] == 2 and dm.mat[1, 0] == 2
        assert dm.mat[0, 0] == 0 and dm.mat[1, 1] == 0

    def test_everything_connected(self):
        spec = TorusSpec(d=2, n=4)
        cfg = CoupledConfiguration(spec, 3)
        dm = build_delta(cfg, 1.0 - 1e-12, 2)
        assert dm.nnz == 0

    def test_threshold_above_half_volume(self):
        spec = TorusSpec(d=2, n=4)
        cfg = CoupledConfiguration(spec, 5)
        dm = build_delta(cfg, 0.3, spec.V // 2 + 1)
        assert dm.nnz == 0  # at most one component can qualify

    def test_symmetry_zero_diag(self):
        spec = TorusSpec(d=2, n=6)
        for seed in range(5):
            dm = build_delta(CoupledConfiguration(spec, seed), 0.35, 2)
            dense = dm.mat.toarray()
            assert np.array_equal(dense, dense.T)
            assert np.all(np.diag(dense) == 0)

    def test_total_bounded_by_closed_edges(self):
        spec = TorusSpec(d=2, n=6)
        cfg = CoupledConfiguration(spec, 11)
        p = 0.4
        dm = build_delta(cfg, p, 2)
        closed = int((~cfg.open_mask(p)).sum())
        assert dm.mat.sum() <= 2 * closed

    def test_closed_edge_classification_sum_rule(self):
        # every closed edge is internal, between two large components, or
        # touches a small component; the three classes partition the count
        spec = TorusSpec(d=2, n=5)
        for seed in range(8):
            cfg = CoupledConfiguration(spec, seed)
            p, M = 0.42, 2
            part = build_components(cfg, p)
            dm = build_delta(cfg, p, M)
            tails, heads = lattice.all_edge_endpoints(spec)
            closed = ~cfg.open_mask(p)
            la, lb = part.labels[tails[closed]], part.labels[heads[closed]]
            sa, sb = part.sizes[la], part.sizes[lb]
            internal = int((la == lb).sum())
            between_large = int(((la != lb) & (sa >= M) & (sb >= M)).sum())
            touching_small = int(((la != lb) & ((sa < M) | (sb < M))).sum())
            assert int(dm.mat.sum()) == 2 * between_large
            assert internal + between_large + touching_small == int(closed.sum())


class TestNorms:
    def test_single_pair(self):
        k = 3
        dm = from_dense([[0, k], [k, 0]], [2, 2], V=4, m=2)
        nn = norms(dm)
        assert nn.frob2 == 2 * k**2
        assert nn.max_entry == k
        assert nn.max_row_sq == k**2
        assert nn.trace4 == 2 * k**4
        assert not nn.trace4_is_estimate

    def test_zero_matrix(self):
        dm = from_dense(np.zeros((3, 3)), [1, 1, 1], V=3, m=2)
        nn = norms(dm)
        assert (nn.frob2, nn.max_entry, nn.max_row_sq, nn.trace4) == (0, 0, 0, 0)

    def test_trace4_matches_dense_eigensolver(self):
        dm = random_sparse_symmetric(5, 0.9, seed=4)
        nn = norms(dm)
        eigs = np.linalg.eigvalsh(dm.mat.toarray())
        want = float(np.sum(eigs**4))
        assert nn.trace4 == pytest.approx(want, rel=1e-9)

    def test_hutchinson_estimate(self):
        dm = random_sparse_symmetric(60, 0.2, seed=9)
        exact = norms(dm).trace4
        est = norms(dm, probes=512, exact_max=10)
        assert est.trace4_is_estimate and est.trace4_se > 0
        assert abs(est.trace4 - exact) <= 5 * est.trace4_se

    def test_eigenvalue_sum_rule(self):
        # sum lambda_i^2 = frob2
        dm = random_sparse_symmetric(30, 0.3, seed=12)
        eigs = np.linalg.eigvalsh(dm.mat.toarray())
        assert norms(dm).frob2 == pytest.approx(float(np.sum(eigs**2)), rel=1e-8)


class TestWFunctional:
    def test_four_cycle_exact_fit(self):
        dm = from_dense([[0, 2], [2, 0]], [2, 2], V=4, m=2)
        w = w_functional(dm)
        assert w.S1 == 16 and w.S2 == 32
        assert w.t_min == pytest.approx(1.0)
        assert w.w_value == pytest.approx(0.0, abs=1e-12)

    def test_hand_instance(self):
        dm = from_dense([[0, 1, 2], [1, 0, 0], [2, 0, 0]], [1, 2, 3], V=10, m=4)
        w = w_functional(dm)
        assert w.t_min == pytest.approx(20.0 / 49.0, abs=1e-12)
        assert w.w_value == pytest.approx(10.0 - 256.0 / 98.0, abs=1e-9)
        # grid / golden-section style oracle over t
        grid = np.linspace(0, 10 * w.t_min, 2000)
        assert min(w_at(dm, t) for t in grid) >= w.w_value - 1e-9 * w.frob2

    def test_zero_matrix_boundary(self):
        dm = from_dense(np.zeros((3, 3)), [2, 2, 2], V=6, m=2)
        w = w_functional(dm)
        assert w.boundary and w.t_min == 0.0 and w.w_value == 0.0

    def test_degenerate_index(self):
        dm = from_dense([[0]], [5], V=10, m=4)
        with pytest.raises(DegenerateIndexError):
            w_functional(dm)

    @given(st.integers(0, 10000))
    @settings(max_examples=30, deadline=None)
    def test_closed_form_beats_grid(self, seed):
        dm = random_sparse_symmetric(8, 0.5, seed=seed)
        if dm.mat.nnz == 0:
            return
        w = w_functional(dm)
        ts = np.linspace(0, 10 * max(w.t_min, 1e-6), 500)
        assert min(w_at(dm, t) for t in ts) >= w.w_value - 1e-9 * max(w.frob2, 1.0)


class TestSpectrum:
    def test_single_pair(self):
        k = 2.0
        dm = from_dense([[0, k], [k, 0]], [2, 2], V=4, m=2)
        out = spectrum(dm, k=2)
        assert out.eigenvalues[0] == pytest.approx(k)
        assert out.eigenvalues[1] == pytest.approx(-k)
        assert np.all(out.top_vector >= 0)
        assert np.linalg.norm(out.top_vector) == pytest.approx(1.0)

    def test_single_pair_with_isolated_components(self):
        # extra zero rows contribute zero eigenvalues, so the second-largest
        # of the full matrix is 0, not -k
        k = 3.0
        dense = np.zeros((4, 4))
        dense[0, 1] = dense[1, 0] = k
        dm = from_dense(dense, [2, 2, 1, 1], V=6, m=2)
        out = spectrum(dm, k=2)
        assert out.eigenvalues[0] == pytest.approx(k)
        assert out.eigenvalues[1] == pytest.approx(0.0, abs=1e-10)

    def test_rayleigh_bound_with_size_vector(self):
        spec = TorusSpec(d=2, n=6)
        for seed in range(5):
            dm = build_delta(CoupledConfiguration(spec, seed), 0.35, 2)
            if dm.K < 2 or dm.nnz == 0:
                continue
            out = spectrum(dm, k=min(2, dm.K))
            y = dm.sizes.astype(np.float64)
            rayleigh = float(y @ (dm.mat @ y)) / float(y @ y)
            assert out.eigenvalues[0] >= rayleigh - 1e-9

    def test_matches_dense_on_random_sparse(self):
        for seed in range(10):
            dm = random_sparse_symmetric(50, 0.15, seed=seed)
            if dm.mat.nnz == 0:
                continue
            out = spectrum(dm, k=2)
            dense = np.sort(np.linalg.eigvalsh(dm.mat.toarray()))[::-1]
            assert out.eigenvalues[0] == pytest.approx(dense[0], rel=1e-8, abs=1e-10)
            assert out.eigenvalues[1] == pytest.approx(dense[1], rel=1e-8, abs=1e-10)

    def test_residual_contract(self):
        dm = random_sparse_symmetric(40, 0.2, seed=3)
        out = spectrum(dm, k=2)
        lam1 = out.eigenvalues[0]
        res = np.linalg.norm(dm.mat @ out.top_vector - lam1 * out.top_vector)
        assert res <= 1e-8 * abs(lam1)

    def test_k_too_large(self):
        dm = from_dense([[0, 1], [1, 0]], [1, 1], V=2, m=2)
        with pytest.raises(RangeError):
            spectrum(dm, k=3)


class TestQSystem:
    def test_zero_delta_degenerate(self):
        dm = from_dense(np.zeros((3, 3)), [2, 2, 2], V=6, m=2)
        with pytest.raises(DegenerateIndexError):
            q_system(dm, 0.3, 0.1, 0.05)

    def test_single_pair_cstar_equals_tmin(self):
        for k, s in [(2, 2), (3, 5), (1, 4)]:
            dm = from_dense([[0, k], [k, 0]], [s, s], V=20, m=4)
            qs = q_system(dm, 0.3, 0.1, 0.05)
            w = w_functional(dm)
            assert qs.c_star == pytest.approx(w.t_min, rel=1e-10)

    def test_p2_star_formula(self):
        dm = from_dense([[0, 2], [2, 0]], [2, 2], V=4, m=2)
        p1, e1, e2 = 0.3, 0.1, 0.02
        qs = q_system(dm, p1, e1, e2)
        lam1 = 2.0
        assert qs.p2_star == pytest.approx(p1 + (1 - p1) * (1 - e2 / e1) / lam1)
        # Q entry: 1 - ((1-p2*)/(1-p1))^Delta
        ratio = (1 - qs.p2_star) / (1 - p1)
        assert qs.Q[0, 1] == pytest.approx(1 - ratio**2)

    def test_q_entries_monotone_in_delta(self):
        p1, e1, e2 = 0.3, 0.1, 0.05
        dm = from_dense([[0, 1, 0], [1, 0, 4], [0, 4, 0]], [3, 3, 3], V=30, m=4)
        qs = q_system(dm, p1, e1, e2)
        assert qs.Q[1, 2] > qs.Q[0, 1]

    def test_lambda1_q_below_one(self):
        spec = TorusSpec(d=2, n=8)
        for seed in range(4):
            dm = build_delta(CoupledConfiguration(spec, seed), 0.38, 2)
            if dm.K < 2 or dm.nnz == 0:
                continue
            qs = q_system(dm, 0.38, 0.1, 0.03)
            assert qs.lambda1_Q < 1.0
            assert np.all(qs.v >= 0)

    def test_p2_star_range_error(self):
        # integer matrices keep lambda1 >= 1 and hence p2* < 1; a fractional
        # top eigenvalue pushes p2* past 1 and must be refused
        dm = from_dense([[0, 0.5], [0.5, 0]], [2, 2], V=4, m=2)
        with pytest.raises(RangeError):
            q_system(dm, 0.5, 1.0, 1e-9)


class TestNeumann:
    def test_zero_operator(self):
        qs = QSystem(p1=0.1, p2_star=0.2, Q=sp.csr_matrix((3, 3)),
                     lambda1_delta=0.0, lambda1_Q=0.0, lambda2_Q=0.0,
                     v=np.ones(3) / np.sqrt(3), qtilde_scale=0.0, c_star=0.0,
                     sizes=np.ones(3))
        op = neumann_bound(qs)
        assert np.allclose(op.matvec(np.ones(3)), 0.0)
        assert op.frobenius() == 0.0

    def test_single_pair_closed_form(self):
        q = 0.4
        Q = sp.csr_matrix(np.array([[0.0, q], [q, 0.0]]))
        qs = QSystem(p1=0.1, p2_star=0.2, Q=Q, lambda1_delta=1.0,
                     lambda1_Q=q, lambda2_Q=-q, v=np.ones(2) / np.sqrt(2),
                     qtilde_scale=q / (1 - q), c_star=1.0, sizes=np.ones(2))
        op = neumann_bound(qs)
        assert op.entry(0, 1) == pytest.approx(q / (1 - q**2), rel=1e-12)
        assert op.entry(0, 0) == pytest.approx(q**2 / (1 - q**2), rel=1e-12)
        # truncated power series oracle
        series = sum(np.linalg.matrix_power(Q.toarray(), k) for k in range(1, 60))
        assert op.entry(0, 1) == pytest.approx(series[0, 1], rel=1e-9)
        # matvec agrees with the dense entries
        x = np.array([1.0, 2.0])
        dense = np.linalg.solve(np.eye(2) - Q.toarray(), Q.toarray() @ x)
        assert np.allclose(op.matvec(x), dense, atol=1e-10)

    def test_frobenius_lower_bound(self):
        q = 0.6
        Q = sp.csr_matrix(np.array([[0.0, q], [q, 0.0]]))
        qs = QSystem(p1=0.1, p2_star=0.2, Q=Q, lambda1_delta=1.0,
                     lambda1_Q=q, lambda2_Q=-q, v=np.ones(2) / np.sqrt(2),
                     qtilde_scale=q / (1 - q), c_star=1.0, sizes=np.ones(2))
        op = neumann_bound(qs)
        assert op.frobenius() >= q / (1 - q) - 1e-12

    def test_divergence(self):
        Q = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        qs = QSystem(p1=0.1, p2_star=0.2, Q=Q, lambda1_delta=1.0,
                     lambda1_Q=1.0, lambda2_Q=-1.0, v=np.ones(2) / np.sqrt(2),
                     qtilde_scale=np.inf, c_star=1.0, sizes=np.ones(2))
        with pytest.raises(DivergenceError):
            neumann_bound(qs)


class TestOmegaReport:
    def _report(self, seed=5, p=0.4, M=1):
        spec = TorusSpec(d=2, n=6)
        cfg = CoupledConfiguration(spec, seed)
        part = build_components(cfg, p)
        mom = cluster_moments(part, M)
        dm = build_delta(cfg, p, M)
        return dm, mom, omega_good_report(dm, mom, p, mom.chi_hat)

    def test_seven_rows_finite(self):
        _, _, rows = self._report()
        assert len(rows) == 7
        for row in rows:
            assert np.isfinite(row.lhs) and np.isfinite(row.rhs)
            assert np.isfinite(row.ratio)

    def test_constant_dependent_rows_have_no_verdict(self):
        _, _, rows = self._report()
        by_name = {r.name: r for r in rows}
        for name in ("frobenius_sq", "size_weighted_sum", "trace4"):
            assert by_name[name].constant_dependent
            assert by_name[name].holds is None
        for name in ("max_component_size", "sum_sizes_sq", "max_entry",
                     "max_row_sq"):
            assert by_name[name].holds is not None

    def test_rhs_shapes(self):
        dm, mom, rows = self._report()
        by_name = {r.name: r for r in rows}
        chi = mom.chi_hat
        V, m = dm.V, dm.m
        want_max = 2 * chi**2 * np.log(max(V / chi**3, 1 + 1e-12))
        assert by_name["max_component_size"].rhs == pytest.approx(want_max)
        assert by_name["sum_sizes_sq"].rhs == pytest.approx((1 + 1 / m) * V * chi)

    def test_singleton_report(self):
        # all-singleton partition, M=1: matrix is the closed-edge multigraph
        spec = TorusSpec(d=1, n=5)
        cfg = CoupledConfiguration(spec, 2)
        dm = build_delta(cfg, 0.0, 1)
        part = build_components(cfg, 0.0)
        mom = cluster_moments(part, 1)
        rows = omega_good_report(dm, mom, 0.0, mom.chi_hat)
        assert all(np.isfinite(r.ratio) for r in rows)


class TestFrobeniusStability:
    def test_frob2_over_chi2_stable_across_volumes(self):
        # E frob2 / chi^2 should be comparable at two volumes (trend check)
        vals = {}
        for n in (6, 9):
            spec = TorusSpec(d=2, n=n)
            ratios = []
            for seed in range(100):
                cfg = CoupledConfiguration(spec, rng.derive_seed(1000 + n, seed))
                part = build_components(cfg, 0.35)
                dm = build_delta(cfg, 0.35, 2)
                chi = part.chi_hat()
                ratios.append(norms(dm).frob2 / chi**2)
            vals[n] = np.mean(ratios)
        big, small = max(vals.values()), min(vals.values())
        assert big / small < 3.0
