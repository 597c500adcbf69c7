"""Shared builders for random graphs, batches and adversarial COO layouts."""

import numpy as np
import pytest

from qppr import CooGraph, EdgeList, FxFormat, PprConfig, init, normalize


def make_edge_list(rng, n, m):
    """Random directed multigraph; duplicates and self loops allowed."""
    return EdgeList(
        src=rng.integers(0, n, size=m),
        dst=rng.integers(0, n, size=m),
        num_vertices=n,
    )


def make_graph(rng, n, m, fmt=None):
    return normalize(make_edge_list(rng, n, m), fmt)


def make_batch(rng, g, kappa, full_range=False):
    """Admissible random state: raws in [0, scale] (or [0, max_raw] when
    full_range) for fixed graphs, uniform [0, 1) floats otherwise."""
    ids = rng.choice(g.num_vertices, size=min(kappa, g.num_vertices), replace=False)
    p = init(g.num_vertices, ids, PprConfig(fmt=g.fmt))
    if g.fmt is not None:
        hi = g.fmt.max_raw if full_range else g.fmt.scale
        p.values[:] = rng.integers(0, hi + 1, size=p.values.shape)
    else:
        p.values[:] = rng.random(p.values.shape)
    return p


def jump_graph(rng, n, m, fmt=None, gap=64):
    """Destinations clustered in blocks separated by multi-window gaps, so the
    writeback FSM exercises its flush-both/re-anchor branch."""
    n_blocks = max(1, n // gap)
    base = rng.integers(0, n_blocks, size=m) * gap
    dst = np.minimum(base + rng.integers(0, 4, size=m), n - 1)
    src = rng.integers(0, n, size=m)
    return normalize(EdgeList(src=src, dst=dst, num_vertices=n), fmt)


def fanin_graph(fmt, fan=4, n=6):
    """`fan` single-out-degree sources all pointing at vertices 0 and n-1.

    Unit arc weights (outdeg 1 would give weight 1.0; here each source has two
    arcs so weight is 1/2) concentrate mass onto two destinations, which makes
    range overflow reachable with adversarial input states.
    """
    pairs = []
    for s in range(1, fan + 1):
        pairs.append((s, 0))
        pairs.append((s, n - 1))
    return normalize(EdgeList.from_pairs(pairs, n), fmt)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
