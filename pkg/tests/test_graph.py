"""COO construction, packet framing, structural validation and QCOO I/O."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qppr import (
    CooGraph,
    EdgeList,
    FxFormat,
    normalize,
    packets,
    read_qcoo,
    requantize,
    validate,
    write_qcoo,
)
from qppr.graph import QCOO_MAGIC, DegreeUnderflowWarning

from conftest import make_edge_list

F19 = FxFormat(19)


def small_graph(fmt=None):
    # 0 -> {1, 2, 3} (outdeg 3), 1 -> 0, duplicate arc 1 -> 0, 3 dangling
    pairs = [(0, 1), (0, 2), (0, 3), (1, 0), (1, 0), (2, 0)]
    return normalize(EdgeList.from_pairs(pairs, 4), fmt)


class TestNormalize:
    def test_destination_major_order(self):
        g = small_graph()
        assert np.all(np.diff(g.x) >= 0)
        same = np.diff(g.x) == 0
        assert np.all(np.diff(g.y)[same] > 0)

    def test_duplicates_collapse(self):
        g = small_graph()
        assert g.num_edges == 5  # one (1, 0) survives

    def test_outdeg_three_weight_frozen(self):
        g = small_graph(F19)
        # arcs out of vertex 0 carry floor(2^19 / 3) = 174762
        w = g.val[g.y == 0]
        assert np.all(w == 174762)

    def test_float_weights_exact(self):
        g = small_graph()
        assert np.all(g.val[g.y == 0] == 1.0 / 3.0)
        assert np.all(g.val[g.y == 1] == 1.0)

    def test_dangling_bitmap(self):
        g = small_graph()
        assert g.dangling.tolist() == [False, False, False, True]

    def test_self_loops_kept(self):
        g = normalize(EdgeList.from_pairs([(0, 0), (0, 1)], 2))
        assert g.num_edges == 2

    def test_vertex_range_checked(self):
        with pytest.raises(ValueError):
            normalize(EdgeList.from_pairs([(0, 9)], 3))

    def test_degree_underflow_warns(self):
        el = EdgeList.from_pairs([(0, 1), (0, 2), (0, 3)], 4)
        with pytest.warns(DegreeUnderflowWarning):
            normalize(el, FxFormat(1))  # 2 // 3 == 0

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_invariants_on_random_multigraphs(self, data):
        seed = data.draw(st.integers(0, 2**32 - 1))
        rng = np.random.default_rng(seed)
        n = data.draw(st.integers(1, 40))
        m = data.draw(st.integers(0, 200))
        g = normalize(make_edge_list(rng, n, m), F19)
        # sorted, deduplicated, in range
        key = g.x.astype(np.int64) * n + g.y
        assert np.all(np.diff(key) > 0)
        assert len(g.x) == 0 or (g.x.min() >= 0 and g.x.max() < n)
        # per-source truncated weights: scale - d < sum <= scale
        for s in range(n):
            d = int(np.sum(g.y == s))
            if d and not g.dangling[s]:
                tot = int(g.val[g.y == s].sum())
                assert F19.scale - d < tot <= F19.scale

    def test_requantize_preserves_structure(self):
        a = small_graph(F19)
        b = requantize(a, FxFormat(25))
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
        assert np.all(b.val[b.y == 0] == 2**25 // 3)
        c = requantize(a, None)
        assert c.fmt is None and np.allclose(c.val[c.y == 0], 1 / 3)


class TestPackets:
    def test_len_is_ceil(self):
        g = small_graph(F19)  # 5 arcs
        assert len(packets(g, 8)) == 1
        assert len(packets(g, 4)) == 2
        assert len(packets(g, 2)) == 3

    def test_padding_replicates_last_with_zero(self):
        g = small_graph(F19)
        (x, y, val) = list(packets(g, 8))[0]
        assert len(x) == 8
        assert np.all(x[5:] == g.x[-1])
        assert np.all(y[5:] == g.y[-1])
        assert np.all(val[5:] == 0)

    def test_all_arcs_covered(self):
        g = small_graph(F19)
        xs = np.concatenate([x for x, _, _ in packets(g, 2)])
        assert np.array_equal(xs[: g.num_edges], g.x)

    @pytest.mark.parametrize("bad", [0, 3, 12, -8])
    def test_packet_size_power_of_two(self, bad):
        with pytest.raises(ValueError):
            packets(small_graph(), bad)


class TestValidate:
    def test_clean(self):
        assert validate(small_graph(F19)) == []
        assert validate(small_graph(None)) == []

    def test_sort_violation(self):
        g = small_graph(F19)
        bad = CooGraph(g.x[::-1].copy(), g.y[::-1].copy(), g.val[::-1].copy(),
                       g.num_vertices, g.dangling, g.fmt)
        kinds = {d.kind for d in validate(bad)}
        assert "SortViolation" in kinds

    def test_normalization_violation(self):
        g = small_graph(F19)
        val = g.val.copy()
        val[0] += 1
        bad = CooGraph(g.x, g.y, val, g.num_vertices, g.dangling, g.fmt)
        kinds = {d.kind for d in validate(bad)}
        assert "NormalizationViolation" in kinds

    def test_dangling_violation(self):
        g = small_graph(F19)
        bad = CooGraph(g.x, g.y, g.val, g.num_vertices, ~g.dangling, g.fmt)
        kinds = {d.kind for d in validate(bad)}
        assert "DanglingViolation" in kinds

    def test_vertex_out_of_range(self):
        g = small_graph(F19)
        x = g.x.copy()
        x[-1] = g.num_vertices + 3
        bad = CooGraph(x, g.y, g.val, g.num_vertices, g.dangling, g.fmt)
        kinds = {d.kind for d in validate(bad)}
        assert "VertexOutOfRange" in kinds


class TestQcoo:
    @pytest.mark.parametrize("fmt", [None, F19, FxFormat(25)])
    def test_roundtrip(self, tmp_path, fmt, rng):
        g = normalize(make_edge_list(rng, 50, 300), fmt)
        path = tmp_path / "g.qcoo"
        write_qcoo(g, path)
        h = read_qcoo(path)
        assert h.num_vertices == g.num_vertices
        assert np.array_equal(h.x, g.x)
        assert np.array_equal(h.y, g.y)
        assert np.array_equal(h.val, g.val)
        assert h.fmt == g.fmt
        assert np.array_equal(h.dangling, g.dangling)

    def test_write_is_deterministic(self, tmp_path, rng):
        g = normalize(make_edge_list(rng, 50, 300), F19)
        a, b = tmp_path / "a.qcoo", tmp_path / "b.qcoo"
        write_qcoo(g, a)
        write_qcoo(g, b)
        assert a.read_bytes() == b.read_bytes()

    def test_magic_checked(self, tmp_path):
        path = tmp_path / "bad.qcoo"
        path.write_bytes(b"NOPE" + bytes(40))
        with pytest.raises(ValueError, match="magic"):
            read_qcoo(path)

    def test_truncated_body(self, tmp_path):
        g = small_graph(F19)
        path = tmp_path / "g.qcoo"
        write_qcoo(g, path)
        data = path.read_bytes()
        path.write_bytes(data[:-4])
        with pytest.raises(ValueError):
            read_qcoo(path)

    def test_version_checked(self, tmp_path):
        g = small_graph(F19)
        path = tmp_path / "g.qcoo"
        write_qcoo(g, path)
        data = bytearray(path.read_bytes())
        data[4] = 0xFF  # version field follows the 4-byte magic
        path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="version"):
            read_qcoo(path)

    def test_magic_constant(self):
        assert QCOO_MAGIC == b"QCOO"
