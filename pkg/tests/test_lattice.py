import pytest
from hypothesis import given, settings, strategies as st

from torusperc import lattice
from torusperc.errors import RangeError, ResourceCapError
from torusperc.lattice import NEAREST_NEIGHBOR, SPREAD_OUT, TorusSpec


def coords_set(spec, ids):
    return {tuple(lattice.vertex_coords(spec, int(v))) for v in ids}


class TestTorusSpec:
    def test_degree_and_volume(self):
        spec = TorusSpec(d=3, n=5)
        assert spec.V == 125 and spec.m == 6 and spec.edge_count == 375

    def test_spread_out_degree(self):
        spec = TorusSpec(d=2, n=7, model=SPREAD_OUT, L=1)
        assert spec.m == 8  # Moore neighborhood
        spec2 = TorusSpec(d=2, n=7, model=SPREAD_OUT, L=2)
        assert spec2.m == 24

    def test_spread_out_rejects_wide_radius(self):
        with pytest.raises(RangeError):
            TorusSpec(d=2, n=4, model=SPREAD_OUT, L=2)

    def test_nn_rejects_n2(self):
        with pytest.raises(RangeError):
            TorusSpec(d=2, n=2)

    def test_volume_cap(self):
        with pytest.raises(ResourceCapError):
            TorusSpec(d=12, n=10)

    def test_edge_counts(self):
        assert TorusSpec(d=1, n=3).edge_count == 3
        assert TorusSpec(d=2, n=4).edge_count == 32
        # V*m/2 = 78125*14/2
        assert TorusSpec(d=7, n=5).edge_count == 546875


class TestIndexing:
    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_encode_decode_roundtrip(self, data):
        d = data.draw(st.integers(1, 4))
        n = data.draw(st.integers(3, 7))
        spec = TorusSpec(d=d, n=n)
        idx = data.draw(st.integers(0, spec.V - 1))
        coords = lattice.vertex_coords(spec, idx)
        assert lattice.vertex_index(spec, coords) == idx

    def test_axis0_fastest(self):
        spec = TorusSpec(d=2, n=5)
        assert lattice.vertex_coords(spec, 1).tolist() == [1, 0]
        assert lattice.vertex_coords(spec, 5).tolist() == [0, 1]


class TestNeighbors:
    def test_three_cycle(self):
        spec = TorusSpec(d=1, n=3)
        assert sorted(lattice.neighbors(spec, 0).tolist()) == [1, 2]

    def test_wraparound_2d(self):
        spec = TorusSpec(d=2, n=5)
        got = coords_set(spec, lattice.neighbors(spec, 0))
        assert got == {(1, 0), (4, 0), (0, 1), (0, 4)}

    def test_moore_neighborhood(self):
        spec = TorusSpec(d=2, n=7, model=SPREAD_OUT, L=1)
        nbrs = lattice.neighbors(spec, 10)
        assert len(set(nbrs.tolist())) == 8

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_degree_regular_and_symmetric(self, data):
        d = data.draw(st.integers(1, 3))
        n = data.draw(st.integers(3, 6))
        model = data.draw(st.sampled_from([NEAREST_NEIGHBOR, SPREAD_OUT]))
        L = 1
        if model == SPREAD_OUT and n < 3:
            model = NEAREST_NEIGHBOR
        spec = TorusSpec(d=d, n=n, model=model, L=L)
        v = data.draw(st.integers(0, spec.V - 1))
        nbrs = lattice.neighbors(spec, v).tolist()
        assert len(set(nbrs)) == spec.m
        assert v not in nbrs
        u = data.draw(st.sampled_from(nbrs))
        assert v in lattice.neighbors(spec, u).tolist()


class TestEdges:
    def test_each_edge_once(self):
        spec = TorusSpec(d=2, n=4)
        seen = set()
        for eid, u, v in lattice.edges(spec):
            assert eid not in seen
            seen.add(eid)
            key = (min(u, v), max(u, v))
            assert u != v
        assert len(seen) == spec.edge_count

    def test_endpoints_involution(self):
        spec = TorusSpec(d=2, n=5, model=SPREAD_OUT, L=1)
        for eid, u, v in lattice.edges(spec):
            tu, tv = lattice.edge_endpoints(spec, eid)
            assert {int(tu), int(tv)} == {u, v}
            assert eid in lattice.incident_edges(spec, u).tolist()
            assert eid in lattice.incident_edges(spec, v).tolist()

    def test_incident_count(self):
        spec = TorusSpec(d=3, n=4)
        inc = lattice.incident_edges(spec, 17)
        assert len(set(inc.tolist())) == spec.m

    def test_vectorized_endpoints_match_iterator(self):
        spec = TorusSpec(d=2, n=4)
        tails, heads = lattice.all_edge_endpoints(spec)
        for eid, u, v in lattice.edges(spec):
            assert tails[eid] == u and heads[eid] == v


class TestDistance:
    def test_wrap(self):
        spec = TorusSpec(d=1, n=10)
        assert lattice.torus_distance(spec, 1, 9) == 2

    def test_zero_iff_equal(self):
        spec = TorusSpec(d=2, n=6)
        assert lattice.torus_distance(spec, 17, 17) == 0
        assert lattice.torus_distance(spec, 17, 18) > 0

    def test_linf_for_spread_out(self):
        spec = TorusSpec(d=2, n=6, model=SPREAD_OUT, L=1)
        u = lattice.vertex_index(spec, [0, 0])
        v = lattice.vertex_index(spec, [3, 3])
        assert lattice.torus_distance(spec, u, v) == 3

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_symmetry_and_triangle(self, data):
        spec = TorusSpec(d=data.draw(st.integers(1, 3)), n=data.draw(st.integers(3, 7)))
        u, v, w = (data.draw(st.integers(0, spec.V - 1)) for _ in range(3))
        duv = lattice.torus_distance(spec, u, v)
        assert duv == lattice.torus_distance(spec, v, u)
        assert duv <= lattice.torus_distance(spec, u, w) + lattice.torus_distance(spec, w, v)

    def test_distances_from_origin_consistent(self):
        spec = TorusSpec(d=2, n=7)
        dists = lattice.distances_from_origin(spec)
        for v in range(spec.V):
            assert dists[v] == lattice.torus_distance(spec, 0, v)
