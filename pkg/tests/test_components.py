import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _util import find_seed_with_order, partition_sizes
from torusperc import lattice, oracle
from torusperc.components import (
    build_components,
    chi_threshold,
    cluster_moments,
    default_threshold,
    n_count,
    restricted_components,
    sweep,
)
from torusperc.coupling import CoupledConfiguration
from torusperc.errors import RangeError
from torusperc.lattice import TorusSpec


class TestBuildComponents:
    def test_p0_singletons(self):
        spec = TorusSpec(d=2, n=4)
        part = build_components(CoupledConfiguration(spec, 1), 0.0)
        assert part.num_components == spec.V
        assert all(s == 1 for s in part.sizes)

    def test_p1_connected(self):
        spec = TorusSpec(d=2, n=4)
        part = build_components(CoupledConfiguration(spec, 1), 1.0)
        assert part.num_components == 1
        assert part.sizes[0] == spec.V

    def test_forced_four_cycle(self):
        # open exactly {(0,1), (2,3)}: components {0,1} and {2,3}
        spec = TorusSpec(d=1, n=4)
        cfg, thresholds = find_seed_with_order(spec, [{0, 2}])
        part = build_components(cfg, thresholds[0])
        assert part.num_components == 2
        assert part.labels[0] == part.labels[1]
        assert part.labels[2] == part.labels[3]
        assert part.labels[0] != part.labels[2]

    def test_deterministic(self):
        spec = TorusSpec(d=2, n=5)
        a = build_components(CoupledConfiguration(spec, 9), 0.4)
        b = build_components(CoupledConfiguration(spec, 9), 0.4)
        assert np.array_equal(a.labels, b.labels)

    def test_double_counting_identity(self):
        spec = TorusSpec(d=2, n=6)
        for seed in range(5):
            part = build_components(CoupledConfiguration(spec, seed), 0.45)
            lhs = int(np.sum(part.sizes**2))
            rhs = int(np.sum(part.sizes[part.labels]))
            assert lhs == rhs


class TestSweep:
    def test_trivial_grid(self):
        spec = TorusSpec(d=2, n=4)
        snaps = sweep(CoupledConfiguration(spec, 2), [0.0, 1.0])
        assert snaps[0].num_components == spec.V
        assert snaps[1].num_components == 1

    def test_empty_grid(self):
        spec = TorusSpec(d=1, n=4)
        assert sweep(CoupledConfiguration(spec, 2), []) == []

    def test_matches_independent_builds(self):
        spec = TorusSpec(d=2, n=6)
        grid = [0.1, 0.25, 0.4, 0.55, 0.7, 1.0]
        for seed in (3, 4, 5):
            cfg = CoupledConfiguration(spec, seed)
            snaps = sweep(cfg, grid)
            for part, p in zip(snaps, grid):
                indep = build_components(cfg, p)
                assert np.array_equal(part.sorted_sizes, indep.sorted_sizes)

    def test_largest_nondecreasing(self):
        spec = TorusSpec(d=3, n=4)
        grid = np.linspace(0, 1, 11).tolist()
        snaps = sweep(CoupledConfiguration(spec, 8), grid)
        tops = [s.sorted_sizes[0] for s in snaps]
        assert all(a <= b for a, b in zip(tops, tops[1:]))

    def test_triangle_straddling_grid(self):
        # grid points straddling the 3 edge weights: counts 3, 2, 1
        spec = TorusSpec(d=1, n=3)
        cfg = CoupledConfiguration(spec, 0)
        w = np.sort(cfg.all_weights())
        grid = [w[0] / 2, (w[0] + w[1]) / 2, (w[1] + w[2]) / 2]
        snaps = sweep(cfg, grid)
        assert [s.num_components for s in snaps] == [3, 2, 1]

    def test_rejects_descending_grid(self):
        spec = TorusSpec(d=1, n=4)
        with pytest.raises(RangeError):
            sweep(CoupledConfiguration(spec, 1), [0.5, 0.2])


class TestClusterMoments:
    def test_singletons_m1(self):
        spec = TorusSpec(d=2, n=4)
        part = build_components(CoupledConfiguration(spec, 1), 0.0)
        mom = cluster_moments(part, 1)
        assert mom.s1 == spec.V and mom.s2 == spec.V
        assert mom.chi_hat == 1.0

    def test_singletons_m2(self):
        spec = TorusSpec(d=2, n=4)
        part = build_components(CoupledConfiguration(spec, 1), 0.0)
        mom = cluster_moments(part, 2)
        assert mom.s1 == mom.s2 == mom.s3 == mom.s4 == 0.0
        assert mom.chi_hat == 1.0

    def test_sizes_321(self):
        # 6-cycle with open edges {(0,1),(1,2),(3,4)}: sizes {3,2,1}
        spec = TorusSpec(d=1, n=6)
        cfg, thresholds = find_seed_with_order(spec, [{0, 1, 3}])
        part = build_components(cfg, thresholds[0])
        assert partition_sizes(part) == [3, 2, 1]
        mom = cluster_moments(part, 2)
        assert mom.s2 == 13.0 and mom.s3 == 35.0
        assert mom.chi_hat == pytest.approx(14.0 / 6.0)
        assert mom.max_size == 3

    def test_thresholds(self):
        spec = TorusSpec(d=2, n=8)
        assert default_threshold(spec) == round(spec.V**0.6)
        with pytest.raises(RangeError):
            default_threshold(spec, exponent=0.7)
        assert chi_threshold(3.0, spec) == max(1, round(243 / spec.V))

    @given(st.integers(0, 10**6), st.floats(0.1, 0.9), st.integers(1, 10))
    @settings(max_examples=25, deadline=None)
    def test_moment_invariants(self, seed, p, M):
        spec = TorusSpec(d=2, n=5)
        part = build_components(CoupledConfiguration(spec, seed), p)
        mom = cluster_moments(part, M)
        assert 1.0 <= mom.chi_hat <= spec.V
        assert mom.s2 <= spec.V * max(mom.max_size, 1)
        assert mom.s1 >= 0 and mom.s4 >= mom.s3 >= mom.s2 >= mom.s1 or mom.s1 == 0


class TestRestricted:
    def test_equal_levels(self):
        spec = TorusSpec(d=2, n=5)
        cfg = CoupledConfiguration(spec, 31)
        p = 0.35
        M = 2
        base = build_components(cfg, p)
        rest = restricted_components(cfg, p, p, M)
        large = sorted(int(s) for s in base.sizes if s >= M)
        assert sorted(int(s) for s in rest.sizes) == large

    def test_m1_p1_zero(self):
        spec = TorusSpec(d=2, n=5)
        cfg = CoupledConfiguration(spec, 13)
        rest = restricted_components(cfg, 0.0, 0.5, 1)
        full = build_components(cfg, 0.5)
        assert np.array_equal(rest.sorted_sizes, full.sorted_sizes)

    def test_six_cycle_example(self):
        # p1 opens {(0,1),(3,4)}; p2 additionally opens {(1,2)}; M=2:
        # vertex 2 is a small p1-component, so the output is {0,1}, {3,4}
        spec = TorusSpec(d=1, n=6)
        cfg, thresholds = find_seed_with_order(spec, [{0, 3}, {1}])
        p1, p2 = thresholds
        rest = restricted_components(cfg, p1, p2, 2)
        assert partition_sizes(rest) == [2, 2]
        assert rest.labels[2] == -1 and rest.labels[5] == -1
        assert rest.labels[0] == rest.labels[1]
        assert rest.labels[3] == rest.labels[4]
        assert rest.labels[0] != rest.labels[3]

    def test_every_component_at_least_m(self):
        spec = TorusSpec(d=2, n=6)
        for seed in range(6):
            cfg = CoupledConfiguration(spec, seed)
            rest = restricted_components(cfg, 0.3, 0.5, 3)
            assert all(s >= 3 for s in rest.sizes)

    def test_subset_of_p2_components(self):
        spec = TorusSpec(d=2, n=6)
        cfg = CoupledConfiguration(spec, 77)
        rest = restricted_components(cfg, 0.3, 0.5, 2)
        full = build_components(cfg, 0.5)
        for k in range(rest.num_components):
            verts = np.flatnonzero(rest.labels == k)
            assert len(set(full.labels[verts].tolist())) == 1


class TestNCount:
    def test_zero_when_equal(self):
        spec = TorusSpec(d=2, n=5)
        cfg = CoupledConfiguration(spec, 3)
        assert n_count(cfg, 0.4, 0.4, 1) == 0

    def test_all_small(self):
        # p2 connects everything, p1 = 0, M = 2: every pair counts
        spec = TorusSpec(d=1, n=5)
        cfg = CoupledConfiguration(spec, 3)
        assert n_count(cfg, 0.0, 1.0, 2) == spec.V**2

    def test_six_cycle_value(self):
        spec = TorusSpec(d=1, n=6)
        cfg, thresholds = find_seed_with_order(spec, [{0, 3}, {1}])
        p1, p2 = thresholds
        # comp_{p2}: {0,1,2}, {3,4}, {5} -> 9+4+1 = 14; restricted: 4+4 = 8
        assert n_count(cfg, p1, p2, 2) == 6

    def test_monotone_in_m(self):
        spec = TorusSpec(d=2, n=5)
        for seed in range(4):
            cfg = CoupledConfiguration(spec, seed)
            vals = [n_count(cfg, 0.3, 0.5, M) for M in (1, 2, 3, 5, 8)]
            assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_identity_vs_exhaustive_oracle(self):
        # classify every edge of a small realization and compare against the
        # direct path-based count on that single configuration
        spec = TorusSpec(d=1, n=6)
        g = oracle.TinyGraph.from_spec(spec)
        for seed in range(25):
            cfg = CoupledConfiguration(spec, seed)
            w = cfg.all_weights()
            p1, p2, M = 0.35, 0.7, 2
            open2 = [g.edges[i] for i in range(len(g.edges)) if w[i] <= p2]
            labels2, sizes2 = oracle._components_of(spec.V, open2)
            open1 = [g.edges[i] for i in range(len(g.edges)) if w[i] <= p1]
            labels1, sizes1 = oracle._components_of(spec.V, open1)
            small = {v for v in range(spec.V) if sizes1[labels1[v]] < M}
            adj = [[] for _ in range(spec.V)]
            for u, v in open2:
                adj[u].append(v)
                adj[v].append(u)
            direct = 0
            for u in range(spec.V):
                for v in range(spec.V):
                    if labels2[u] != labels2[v]:
                        continue
                    if u == v:
                        direct += 1 if u in small else 0
                    elif oracle._simple_paths_all_visit_small(g, adj, u, v, small):
                        direct += 1
            assert n_count(cfg, p1, p2, M) == direct


class TestSusceptibilityConsistency:
    def test_chi_hat_equals_mean_cluster_of_random_vertex(self):
        # sum_x 1[x in C(v)] = |C(v)| per realization, so averaging |C(v)|
        # over vertices reproduces chi_hat exactly
        spec = TorusSpec(d=2, n=6)
        part = build_components(CoupledConfiguration(spec, 5), 0.42)
        per_vertex = part.sizes[part.labels]
        assert part.chi_hat() == pytest.approx(per_vertex.mean())
