"""Streaming COO SpMV: packet fetch, scatter, aggregate, two-buffer writeback.

``spmv_stream`` emulates the dataflow pipeline stage by stage. Edges arrive
in packets of B destination-sorted entries. Each packet is scattered into
per-edge products, aggregated into a 2B-wide window of destination slots
anchored at the first destination of the current segment, and merged into a
pair of B-entry result buffers (res1 covers the anchor block, res2 the one
above it). When the anchor advances one block, res1 is flushed to the output
and res2 slides down; larger jumps flush both buffers before re-anchoring.
Every B-aligned output block is therefore written at most once per call,
which is what lets the result memory run without read-modify-write traffic.

Packets whose destinations span more than one aggregator window are split at
the window boundary; a stream whose blocks advance one at a time never takes
that path, so the classic single-window behaviour is preserved exactly.

``spmv_oracle_quantized`` computes the same truncated products without any
packet machinery and is the bit-exactness reference for the stream engine
(identical raw results on every input, saturation included, since both sides
clip monotone non-negative partial sums at the same maximum).

``spmv_oracle_float`` is the plain floating-point reference, backed by a
cached scipy CSR matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fixedpoint import FormatMismatchError, SaturationTally
from .graph import CooGraph, PacketStream

# raw products need 2f+2 bits; past this width the engines fall back to
# exact Python-integer (object dtype) arrays
_INT64_MAX_FRAC_BITS = 30


class UnsortedInputError(ValueError):
    """Stream input must be destination-sorted; the writeback FSM relies on it."""


def _ensure_sorted(g: CooGraph) -> None:
    if g._sort_ok is None:
        g._sort_ok = bool(g.num_edges < 2 or np.all(np.diff(g.x) >= 0))
    if not g._sort_ok:
        raise UnsortedInputError("COO entries are not sorted by destination")


def _check_pair(g: CooGraph, p_in) -> None:
    if g.fmt != p_in.fmt:
        raise FormatMismatchError(f"graph format {g.fmt} vs batch format {p_in.fmt}")
    if g.num_vertices != p_in.num_vertices:
        raise FormatMismatchError(
            f"graph has {g.num_vertices} vertices, batch has {p_in.num_vertices}"
        )


def _work_dtype(g: CooGraph, values: np.ndarray):
    if g.fmt is None:
        return values.dtype
    if g.fmt.frac_bits <= _INT64_MAX_FRAC_BITS:
        return np.int64
    return np.dtype(object)


def _products(val: np.ndarray, gathered: np.ndarray, g: CooGraph, dtype, tally) -> np.ndarray:
    """Stage 2: edge-wise val[j] * p[y[j]], truncated and clipped in fixed mode."""
    if g.fmt is None:
        return val.astype(gathered.dtype)[:, None] * gathered
    f = g.fmt.frac_bits
    prod = val.astype(dtype)[:, None] * gathered.astype(dtype)
    prod >>= f
    return _clip(prod, g.fmt.max_raw, tally)


def _clip(arr: np.ndarray, max_raw: int, tally: SaturationTally | None) -> np.ndarray:
    over = arr > max_raw
    if np.any(over):
        if tally is not None:
            tally.bump(int(np.count_nonzero(over)))
        np.minimum(arr, max_raw, out=arr)
    return arr


def spmv_oracle_quantized(g: CooGraph, p_in, tally: SaturationTally | None = None):
    """Quantized reference: per-destination sums of truncated products.

    Accumulates in ascending (x, y) order with exact integer sums, clipping
    each destination at the format maximum. Bit-identical to spmv_stream.
    """
    from .ppr import RankBatch

    if g.fmt is None:
        raise FormatMismatchError("quantized oracle needs a fixed-point graph")
    _check_pair(g, p_in)
    _ensure_sorted(g)

    dtype = _work_dtype(g, p_in.values)
    out = np.zeros((g.num_vertices, p_in.kappa), dtype=np.int64)
    if g.num_edges:
        gathered = p_in.values[g.y]
        prod = _products(g.val, gathered, g, dtype, tally)
        starts, dests = g.dest_groups()
        sums = np.add.reduceat(prod, starts, axis=0)
        sums = _clip(sums, g.fmt.max_raw, tally)
        out[dests] = sums.astype(np.int64)
    return RankBatch(values=out, personalization=p_in.personalization, fmt=g.fmt)


def spmv_oracle_float(g: CooGraph, p_in: np.ndarray) -> np.ndarray:
    """Floating-point reference SpMV on the normalized adjacency."""
    if g.fmt is not None:
        raise FormatMismatchError("float oracle needs a float graph")
    p = np.asarray(p_in)
    if p.shape[0] != g.num_vertices:
        raise ValueError("vertex count mismatch between graph and operand")
    return g.csr(p.dtype) @ p


@dataclass
class _WindowState:
    """Two-buffer writeback bookkeeping (stage 4)."""

    res1: np.ndarray
    res2: np.ndarray
    anchor: int = -1  # block-aligned start of the res1 window; -1 = not anchored yet


def _store_block(out, start, buf, B, num_vertices, write_counts) -> None:
    if start >= num_vertices:
        return
    n = min(B, num_vertices - start)
    out[start : start + n] = buf[:n]
    if write_counts is not None:
        write_counts[start // B] += 1


def spmv_stream(
    stream: PacketStream,
    p_in,
    tally: SaturationTally | None = None,
    write_counts: np.ndarray | None = None,
):
    """Packet-streamed SpMV through the four-stage pipeline.

    Pass ``write_counts`` (one slot per B-aligned destination block) to
    instrument the single-write property. Fixed-mode results are bit-identical
    to spmv_oracle_quantized; float mode follows the same dataflow with plain
    float arithmetic.
    """
    from .ppr import RankBatch

    g = stream.graph
    _check_pair(g, p_in)
    _ensure_sorted(g)
    B = stream.B
    V = g.num_vertices
    K = p_in.kappa
    fixed = g.fmt is not None
    dtype = _work_dtype(g, p_in.values)
    max_raw = g.fmt.max_raw if fixed else None

    out = np.zeros((V, K), dtype=np.int64 if fixed else p_in.values.dtype)
    st = _WindowState(res1=np.zeros((B, K), dtype=dtype), res2=np.zeros((B, K), dtype=dtype))

    for px, py, pval in stream:  # stage 1: packet fetch
        dp = _products(pval, p_in.values[py], g, dtype, tally)  # stage 2: scatter

        # split at aggregator-window overflow; one pass when blocks advance
        # at most one at a time
        lo = 0
        bounds = []
        x0 = int(px[0])
        for j in range(1, B):
            if int(px[j]) - x0 >= B:
                bounds.append((lo, j))
                lo, x0 = j, int(px[j])
        bounds.append((lo, B))

        for lo, hi in bounds:
            x0 = int(px[lo])
            xs = (x0 // B) * B

            # stage 3: aggregate the segment into the 2B window over [xs, xs+2B)
            agg = np.zeros((2 * B, K), dtype=dtype)
            slots = np.asarray(px[lo:hi], dtype=np.int64) - xs
            np.add.at(agg, slots, dp[lo:hi])
            if fixed:
                _clip(agg, max_raw, tally)

            # stage 4: merge into res1/res2, flushing completed blocks
            if st.anchor < 0:
                st.anchor = xs
            if xs == st.anchor:
                st.res1 += agg[:B]
                st.res2 += agg[B:]
                if fixed:
                    _clip(st.res1, max_raw, tally)
                    _clip(st.res2, max_raw, tally)
            elif xs == st.anchor + B:
                _store_block(out, st.anchor, st.res1, B, V, write_counts)
                st.res1 = st.res2 + agg[:B]
                if fixed:
                    _clip(st.res1, max_raw, tally)
                st.res2 = agg[B:].copy()
                st.anchor = xs
            else:
                _store_block(out, st.anchor, st.res1, B, V, write_counts)
                _store_block(out, st.anchor + B, st.res2, B, V, write_counts)
                st.res1 = agg[:B].copy()
                st.res2 = agg[B:].copy()
                st.anchor = xs

    if st.anchor >= 0:
        _store_block(out, st.anchor, st.res1, B, V, write_counts)
        _store_block(out, st.anchor + B, st.res2, B, V, write_counts)

    return RankBatch(values=out, personalization=p_in.personalization, fmt=g.fmt)
