"""Generator determinism, parameter domains and edge-list parsing."""

import numpy as np
import pytest

from qppr import (
    EDGE_TARGETS,
    PRESETS,
    EdgeList,
    EmptyInputError,
    GenSpec,
    InvalidParametersError,
    MalformedLineError,
    generate,
    normalize,
    parse_snap,
    preset,
    write_edgelist,
)


class TestGenerate:
    def test_ws_no_rewire_exact_arc_count(self):
        el = generate(GenSpec("watts_strogatz", 30, k=4, rewire_p=0.0, seed=1))
        assert el.num_edges == 30 * 4

    def test_ws_rewire_preserves_arc_count(self):
        el = generate(GenSpec("watts_strogatz", 200, k=10, rewire_p=0.6, seed=5))
        assert el.num_edges == 200 * 10

    def test_reproducible(self):
        spec = GenSpec("erdos_renyi", 300, p=0.02, seed=9)
        a, b = generate(spec), generate(spec)
        assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)

    def test_seed_changes_output(self):
        a = generate(GenSpec("erdos_renyi", 300, p=0.02, seed=1))
        b = generate(GenSpec("erdos_renyi", 300, p=0.02, seed=2))
        assert a.num_edges != b.num_edges or not np.array_equal(a.src, b.src)

    def test_symmetrized_arcs_paired(self):
        el = generate(GenSpec("holme_kim", 50, m=3, triad_p=0.3, seed=4))
        assert el.num_edges % 2 == 0
        fwd = set(zip(el.src.tolist(), el.dst.tolist()))
        assert all((b, a) in fwd for a, b in fwd)

    def test_directed_flag(self):
        sym = generate(GenSpec("erdos_renyi", 40, p=0.1, seed=3))
        raw = generate(GenSpec("erdos_renyi", 40, p=0.1, seed=3, symmetrize=False))
        assert sym.num_edges == 2 * raw.num_edges

    def test_empty_probability(self):
        el = generate(GenSpec("erdos_renyi", 10, p=0.0, seed=0))
        assert el.num_edges == 0
        g = normalize(el)  # all vertices dangling
        assert g.dangling.all()

    @pytest.mark.parametrize(
        "spec",
        [
            GenSpec("erdos_renyi", 10, p=None),
            GenSpec("erdos_renyi", 10, p=1.5),
            GenSpec("erdos_renyi", 0, p=0.1),
            GenSpec("watts_strogatz", 10, k=3, rewire_p=0.1),  # odd k
            GenSpec("watts_strogatz", 10, k=10, rewire_p=0.1),  # k >= n
            GenSpec("watts_strogatz", 10, k=4, rewire_p=-0.1),
            GenSpec("holme_kim", 10, m=0, triad_p=0.1),
            GenSpec("holme_kim", 10, m=10, triad_p=0.1),
            GenSpec("holme_kim", 10, m=2, triad_p=2.0),
            GenSpec("banana", 10),
        ],
    )
    def test_invalid_parameters(self, spec):
        with pytest.raises(InvalidParametersError):
            generate(spec)


class TestPresets:
    def test_six_presets_with_targets(self):
        assert len(PRESETS) == 6
        assert set(EDGE_TARGETS) == set(PRESETS)

    def test_lookup_and_seed_override(self):
        spec = preset("ws_100k")
        assert spec.model == "watts_strogatz" and spec.n == 100_000
        assert preset("ws_100k", seed=42).seed == 42
        assert preset("ws_100k").seed == spec.seed

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset("er_1m")


class TestParseSnap:
    def test_comments_and_tabs(self):
        el, labels = parse_snap(["# c\n", "0\t1\n", "1\t0\n"])
        assert el.num_edges == 2
        assert el.num_vertices == 2
        assert labels.tolist() == [0, 1]

    def test_ids_compacted(self):
        el, labels = parse_snap(["10 500\n", "500 9\n"])
        assert el.num_vertices == 3
        assert labels.tolist() == [9, 10, 500]
        assert el.src.tolist() == [1, 2]
        assert el.dst.tolist() == [2, 0]

    def test_duplicates_preserved(self):
        el, _ = parse_snap(["0 1\n", "0 1\n"])
        assert el.num_edges == 2

    @pytest.mark.parametrize("line", ["0\n", "0 1 2\n", "a b\n", "-1 2\n"])
    def test_malformed_line_number(self, line):
        with pytest.raises(MalformedLineError) as info:
            parse_snap(["# header\n", "0 1\n", line])
        assert info.value.line_number == 3

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            parse_snap(["# only comments\n", "\n"])

    def test_roundtrip_via_file(self, tmp_path, rng):
        el = EdgeList(rng.integers(0, 30, 100), rng.integers(0, 30, 100), 30)
        # force every id to appear so the dense remap is the identity
        el.src[:30] = np.arange(30)
        path = tmp_path / "arcs.txt"
        write_edgelist(el, path)
        back, labels = parse_snap(path)
        assert np.array_equal(back.src, el.src)
        assert np.array_equal(back.dst, el.dst)
        assert np.array_equal(labels, np.arange(30))
