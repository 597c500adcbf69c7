"""Destination-major COO graphs and their streaming packet view.

A graph enters as a raw directed edge list, gets deduplicated, and leaves
``normalize`` as a column-normalized adjacency in coordinate form: entry j
says "destination x[j] receives val[j] * p[y[j]]" where val is 1/outdeg of
the source. Entries are sorted by (x, y) so a consumer can stream them in
fixed-size packets and write each destination block exactly once.

Dangling vertices (out-degree zero) are tracked in a bitmap rather than by
patching the matrix; the rank driver redistributes their mass explicitly.

The on-disk container (QCOO) is a little-endian dump of the three arrays
behind a small header; see write_qcoo / read_qcoo.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fixedpoint import FxFormat

QCOO_MAGIC = b"QCOO"
QCOO_VERSION = 1


class VertexOutOfRangeError(ValueError):
    """An edge endpoint falls outside [0, num_vertices)."""


class DegreeUnderflowWarning(UserWarning):
    """1/outdeg truncated to zero: out-degree exceeds 2^f."""


@dataclass
class EdgeList:
    """Directed edges as parallel src/dst arrays over vertices [0, num_vertices)."""

    src: np.ndarray
    dst: np.ndarray
    num_vertices: int

    @classmethod
    def from_pairs(cls, pairs, num_vertices: int) -> "EdgeList":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), num_vertices)

    @property
    def num_edges(self) -> int:
        return len(self.src)


@dataclass
class CooGraph:
    """Normalized destination-major COO adjacency.

    x: destination ids, non-decreasing, ties ordered by y.
    y: source ids.
    val: quantized raw 1/outdeg(y) (int64) in fixed mode, float64 otherwise.
    dangling: bitmap, dangling[i] iff out-degree of i is zero.
    """

    x: np.ndarray
    y: np.ndarray
    val: np.ndarray
    num_vertices: int
    dangling: np.ndarray
    fmt: FxFormat | None

    # lazy per-graph caches, built on first use by the SpMV engines
    _dest_starts: np.ndarray | None = field(default=None, repr=False, compare=False)
    _dest_ids: np.ndarray | None = field(default=None, repr=False, compare=False)
    _csr: dict = field(default_factory=dict, repr=False, compare=False)
    _sort_ok: bool | None = field(default=None, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        return len(self.x)

    @property
    def is_fixed(self) -> bool:
        return self.fmt is not None

    def dest_groups(self) -> tuple[np.ndarray, np.ndarray]:
        """(start offsets, destination id) of each run of equal x."""
        if self._dest_starts is None:
            if self.num_edges == 0:
                self._dest_starts = np.empty(0, dtype=np.int64)
                self._dest_ids = np.empty(0, dtype=np.int64)
            else:
                starts = np.flatnonzero(np.r_[True, np.diff(self.x) != 0])
                self._dest_starts = starts
                self._dest_ids = self.x[starts].astype(np.int64)
        return self._dest_starts, self._dest_ids

    def csr(self, dtype=np.float64):
        """Sparse row form of the float adjacency, cached per dtype."""
        import scipy.sparse as sp

        key = np.dtype(dtype).name
        if key not in self._csr:
            if self.is_fixed:
                raise ValueError("csr view is defined for float graphs only")
            mat = sp.csr_matrix(
                (self.val.astype(dtype), (self.x.astype(np.int64), self.y.astype(np.int64))),
                shape=(self.num_vertices, self.num_vertices),
            )
            self._csr[key] = mat
        return self._csr[key]


def normalize(edges: EdgeList, fmt: FxFormat | None = None) -> CooGraph:
    """Deduplicate, column-normalize and destination-sort an edge list.

    Duplicate (src, dst) pairs collapse to one entry before degrees are
    counted. Self loops are kept. val[j] = quantize(1/outdeg(y[j])) in fixed
    mode (exact integer division 2^f // outdeg), 1/outdeg in float mode.
    Emits DegreeUnderflowWarning when a vertex degree exceeds 2^f and its
    normalized weight truncates to zero.
    """
    n = edges.num_vertices
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    src = np.asarray(edges.src, dtype=np.int64)
    dst = np.asarray(edges.dst, dtype=np.int64)
    if src.shape != dst.shape:
        raise ValueError("src/dst length mismatch")
    if len(src) and (src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n):
        raise VertexOutOfRangeError(f"edge endpoint outside [0, {n})")

    if len(src):
        key = src * n + dst
        key = np.unique(key)
        s = key // n
        d = key % n
    else:
        s = d = np.empty(0, dtype=np.int64)

    outdeg = np.bincount(s, minlength=n)
    dangling = outdeg == 0

    order = np.lexsort((s, d))
    x = d[order].astype(np.int32)
    y = s[order].astype(np.int32)

    if fmt is not None:
        val = fmt.scale // outdeg[y] if len(y) else np.empty(0, dtype=np.int64)
        val = val.astype(np.int64)
        if len(val) and int(val.min()) == 0:
            warnings.warn(
                f"out-degree exceeds 2^{fmt.frac_bits}; normalized weights truncated to zero",
                DegreeUnderflowWarning,
            )
    else:
        val = 1.0 / outdeg[y] if len(y) else np.empty(0, dtype=np.float64)

    return CooGraph(x=x, y=y, val=val, num_vertices=n, dangling=dangling, fmt=fmt)


def requantize(g: CooGraph, fmt: FxFormat | None) -> CooGraph:
    """Same structure, new value format. Degrees are recounted from y."""
    outdeg = np.bincount(g.y, minlength=g.num_vertices)
    if fmt is not None:
        val = (fmt.scale // np.maximum(outdeg, 1)[g.y]).astype(np.int64)
        if len(val) and int(val.min()) == 0:
            warnings.warn(
                f"out-degree exceeds 2^{fmt.frac_bits}; normalized weights truncated to zero",
                DegreeUnderflowWarning,
            )
    else:
        val = 1.0 / outdeg[g.y] if g.num_edges else np.empty(0, dtype=np.float64)
    return CooGraph(
        x=g.x, y=g.y, val=val, num_vertices=g.num_vertices, dangling=g.dangling, fmt=fmt
    )


@dataclass
class PacketStream:
    """Fixed-size packet view over a COO graph.

    The tail packet is padded up to B entries by replicating the last real
    destination with val = 0, so padding contributes nothing and never moves
    the writeback window backwards.
    """

    graph: CooGraph
    B: int = 8

    def __post_init__(self) -> None:
        if self.B < 1 or (self.B & (self.B - 1)) != 0:
            raise ValueError(f"packet size must be a positive power of two, got {self.B}")
        g = self.graph
        pad = (-g.num_edges) % self.B
        if g.num_edges == 0:
            self._x = np.empty(0, dtype=g.x.dtype if len(g.x) else np.int32)
            self._y = np.empty(0, dtype=self._x.dtype)
            self._val = np.empty(0, dtype=g.val.dtype if len(g.val) else np.float64)
        elif pad:
            self._x = np.concatenate([g.x, np.repeat(g.x[-1], pad)])
            self._y = np.concatenate([g.y, np.repeat(g.y[-1], pad)])
            zeros = np.zeros(pad, dtype=g.val.dtype)
            self._val = np.concatenate([g.val, zeros])
        else:
            self._x, self._y, self._val = g.x, g.y, g.val

    def __len__(self) -> int:
        return -(-self.graph.num_edges // self.B)

    def __iter__(self):
        B = self.B
        for i in range(len(self)):
            sl = slice(i * B, (i + 1) * B)
            yield self._x[sl], self._y[sl], self._val[sl]


def packets(g: CooGraph, B: int = 8) -> PacketStream:
    return PacketStream(g, B)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str


def validate(g: CooGraph) -> list[Diagnostic]:
    """Structural checks on a COO graph; returns findings, empty when clean.

    Checks destination-major sort order, dangling bitmap consistency against
    recounted degrees, exact agreement of val with the normalization formula,
    and the per-source weight sum (= 1 up to truncation in fixed mode).
    """
    out: list[Diagnostic] = []
    x = np.asarray(g.x)
    y = np.asarray(g.y)

    if len(x):
        dx = np.diff(x)
        if np.any(dx < 0):
            out.append(Diagnostic("SortViolation", "x not non-decreasing"))
        else:
            same = dx == 0
            if np.any(same & (np.diff(y) <= 0)):
                out.append(Diagnostic("SortViolation", "ties in x not strictly increasing in y"))
        if x.min() < 0 or x.max() >= g.num_vertices or y.min() < 0 or y.max() >= g.num_vertices:
            out.append(Diagnostic("VertexOutOfRange", "entry outside vertex range"))
            return out

    outdeg = np.bincount(y, minlength=g.num_vertices)
    if not np.array_equal(g.dangling, outdeg == 0):
        out.append(Diagnostic("DanglingViolation", "bitmap disagrees with recounted degrees"))

    if g.num_edges:
        if g.is_fixed:
            expect = (g.fmt.scale // outdeg[y]).astype(np.int64)
            bad = int(np.count_nonzero(expect != g.val))
        else:
            expect = 1.0 / outdeg[y]
            bad = int(np.count_nonzero(expect != g.val))
        if bad:
            out.append(Diagnostic("NormalizationViolation", f"{bad} entries differ from 1/outdeg"))
        else:
            # per-source mass: sum of weights out of s is 1 up to d*2^-f truncation
            vreal = g.val / g.fmt.scale if g.is_fixed else g.val
            sums = np.bincount(y, weights=vreal, minlength=g.num_vertices)
            tol = outdeg * (g.fmt.resolution if g.is_fixed else 1e-12)
            live = outdeg > 0
            if np.any(np.abs(sums[live] - 1.0) > tol[live] + 1e-12):
                out.append(Diagnostic("NormalizationViolation", "per-source weight sums off"))
    return out


def write_qcoo(g: CooGraph, path) -> None:
    """Serialize to the QCOO container (little-endian).

    Header: magic 'QCOO', version u16, num_vertices u64, num_edges u64,
    frac_bits u8 (0 means float64 payload). Body: x u32[E], y u32[E], then
    val as u64 raw fields or float64.
    """
    f = 0 if g.fmt is None else g.fmt.frac_bits
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHQQB", QCOO_MAGIC, QCOO_VERSION, g.num_vertices, g.num_edges, f))
        fh.write(np.ascontiguousarray(g.x, dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(g.y, dtype="<u4").tobytes())
        if g.fmt is None:
            fh.write(np.ascontiguousarray(g.val, dtype="<f8").tobytes())
        else:
            fh.write(np.ascontiguousarray(g.val, dtype="<u8").tobytes())


def read_qcoo(path) -> CooGraph:
    """Load a QCOO container written by write_qcoo.

    The dangling bitmap is rebuilt from the source column. No re-sorting or
    re-normalization happens here; run validate() to audit a file of unknown
    provenance.
    """
    header = struct.Struct("<4sHQQB")
    with open(path, "rb") as fh:
        head = fh.read(header.size)
        if len(head) < header.size:
            raise ValueError("QCOO header truncated")
        magic, version, n, m, f = header.unpack(head)
        if magic != QCOO_MAGIC:
            raise ValueError(f"QCOO magic mismatch: {magic!r}")
        if version != QCOO_VERSION:
            raise ValueError(f"unsupported QCOO version {version}")
        x = np.frombuffer(fh.read(4 * m), dtype="<u4")
        y = np.frombuffer(fh.read(4 * m), dtype="<u4")
        raw = fh.read(8 * m)
        if len(x) < m or len(y) < m or len(raw) < 8 * m:
            raise ValueError("QCOO payload truncated")
    if f == 0:
        fmt = None
        val = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    else:
        fmt = FxFormat(f)
        val = np.frombuffer(raw, dtype="<u8").astype(np.int64)
    x = x.astype(np.int32)
    y = y.astype(np.int32)
    if m and (x.max() >= n or y.max() >= n):
        raise VertexOutOfRangeError("entry outside vertex range")
    outdeg = np.bincount(y, minlength=n)
    return CooGraph(
        x=x, y=y, val=val, num_vertices=int(n), dangling=outdeg == 0, fmt=fmt
    )
