"""Batched personalized PageRank over the streaming SpMV.

The recurrence per iteration and personalization column k is

    p' = alpha * (X @ p) + (alpha / |V|) * (dangling . p) * 1 + (1 - alpha) * e_k

where X is the column-normalized transposed adjacency in COO form and e_k is
the one-hot personalization vector. A batch carries kappa columns side by
side so the edge stream is read once per iteration for the whole batch.

In fixed-point mode the three constants alpha, 1-alpha and alpha/|V| are
quantized once at setup from exact rationals; every iteration then performs
one truncating multiply per SpMV product, one per alpha scaling and one for
the dangling term, so each entry suffers at most four truncations per
iteration. Saturation is monitored and escalated: it cannot occur on valid
inputs, where total mass never exceeds one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fixedpoint import FormatMismatchError, FxFormat, SaturationTally, quantize
from .graph import CooGraph, VertexOutOfRangeError, packets
from .spmv import _INT64_MAX_FRAC_BITS, spmv_oracle_float, spmv_oracle_quantized, spmv_stream


class DuplicateVertexError(ValueError):
    """Personalization ids within one batch must be distinct."""


class SaturationDetectedError(ArithmeticError):
    """A fixed-point sum clipped at the range maximum during an update."""


@dataclass
class PprConfig:
    """Run parameters. fmt=None selects float mode with ``float_dtype``."""

    alpha: float = 0.85
    max_iter: int = 10
    fmt: FxFormat | None = None
    float_dtype: type = np.float64
    kappa: int = 8
    packet_size: int = 8
    convergence_eps: float = 1e-6
    early_stop: bool = False
    track_convergence: bool = False
    engine: str = "vector"  # "vector" | "stream"
    vertex_capacity: int = 20_000_000  # models the on-chip value-store budget

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.engine not in ("vector", "stream"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class RankBatch:
    """kappa PageRank columns over the same graph.

    values has shape (num_vertices, kappa): int64 raw fields in fixed mode,
    float64 or float32 otherwise. Column k belongs to personalization[k].
    """

    values: np.ndarray
    personalization: np.ndarray
    fmt: FxFormat | None

    @property
    def num_vertices(self) -> int:
        return self.values.shape[0]

    @property
    def kappa(self) -> int:
        return self.values.shape[1]

    def scores(self) -> np.ndarray:
        """Columns as float64 probabilities."""
        if self.fmt is None:
            return self.values.astype(np.float64)
        return self.values.astype(np.float64) / self.fmt.scale


@dataclass
class ConvergenceTrace:
    """Per-iteration L2 norms ||p_{t+1} - p_t||, one column per request."""

    norms: np.ndarray  # shape (iterations, kappa)

    @property
    def iterations(self) -> int:
        return self.norms.shape[0]


@dataclass(frozen=True)
class _Constants:
    """Quantized (or plain float) recurrence constants, built once per run."""

    alpha_raw: int | float
    rest_raw: int | float  # 1 - alpha
    alpha_over_v_raw: int | float

    @classmethod
    def build(cls, config: PprConfig, num_vertices: int) -> "_Constants":
        a = Fraction(config.alpha)
        if config.fmt is not None:
            f = config.fmt
            return cls(
                alpha_raw=quantize(a, f).raw,
                rest_raw=quantize(1 - a, f).raw,
                alpha_over_v_raw=quantize(a / num_vertices, f).raw,
            )
        dt = config.float_dtype
        return cls(
            alpha_raw=dt(config.alpha),
            rest_raw=dt(1.0 - config.alpha),
            alpha_over_v_raw=dt(config.alpha / num_vertices),
        )


def init(num_vertices: int, personalization, config: PprConfig) -> RankBatch:
    """One-hot start: column k holds 1.0 at its personalization vertex."""
    ids = np.asarray(personalization, dtype=np.int64)
    if ids.ndim != 1 or len(ids) < 1:
        raise ValueError("personalization must be a non-empty 1-d sequence")
    if len(np.unique(ids)) != len(ids):
        raise DuplicateVertexError("personalization ids must be distinct")
    if ids.min() < 0 or ids.max() >= num_vertices:
        raise VertexOutOfRangeError(f"personalization id outside [0, {num_vertices})")
    k = len(ids)
    if config.fmt is not None:
        values = np.zeros((num_vertices, k), dtype=np.int64)
        values[ids, np.arange(k)] = config.fmt.scale
    else:
        values = np.zeros((num_vertices, k), dtype=config.float_dtype)
        values[ids, np.arange(k)] = 1.0
    return RankBatch(values=values, personalization=ids, fmt=config.fmt)


def scaling(p: RankBatch, dangling: np.ndarray, alpha: float, num_vertices: int):
    """Dangling-mass scalars s_k = (alpha/|V|) * sum of p over dangling rows.

    Fixed mode quantizes alpha/|V| once, accumulates the dangling raw mass
    exactly, and truncates the product once (double-width intermediate).
    Returns a length-kappa vector: int64 raw fields or floats.
    """
    if p.fmt is not None:
        av = quantize(Fraction(alpha) / num_vertices, p.fmt).raw
        f = p.fmt.frac_bits
        mass = p.values[dangling].sum(axis=0)
        out = np.empty(p.kappa, dtype=np.int64)
        for k in range(p.kappa):
            s = (av * int(mass[k])) >> f
            out[k] = min(s, p.fmt.max_raw)
        return out
    dt = p.values.dtype.type
    mass = p.values[dangling].sum(axis=0)
    return dt(alpha / num_vertices) * mass


def _spmv(g: CooGraph, p: RankBatch, config: PprConfig, tally: SaturationTally | None):
    if config.engine == "stream":
        return spmv_stream(packets(g, config.packet_size), p, tally=tally)
    if g.fmt is not None:
        return spmv_oracle_quantized(g, p, tally=tally)
    return RankBatch(
        values=spmv_oracle_float(g, p.values),
        personalization=p.personalization,
        fmt=None,
    )


def step(g: CooGraph, p: RankBatch, config: PprConfig) -> RankBatch:
    """One recurrence application across the whole batch."""
    if g.fmt != p.fmt:
        raise FormatMismatchError(f"graph format {g.fmt} vs batch format {p.fmt}")
    consts = _Constants.build(config, g.num_vertices)
    return _step(g, p, config, consts)


def _step(g: CooGraph, p: RankBatch, config: PprConfig, consts: _Constants) -> RankBatch:
    k = p.kappa
    cols = np.arange(k)
    tally = SaturationTally()
    sp = _spmv(g, p, config, tally)

    if p.fmt is not None:
        f = p.fmt.frac_bits
        av = consts.alpha_over_v_raw
        mass = p.values[g.dangling].sum(axis=0)
        s = np.empty(k, dtype=np.int64)
        for j in range(k):
            s[j] = min((av * int(mass[j])) >> f, p.fmt.max_raw)

        if f <= _INT64_MAX_FRAC_BITS:
            upd = consts.alpha_raw * sp.values
            upd >>= f
        else:
            upd = (sp.values.astype(object) * consts.alpha_raw) >> f
        upd += s[None, :]
        upd[p.personalization, cols] += consts.rest_raw
        over = upd > p.fmt.max_raw
        if np.any(over):
            tally.bump(int(np.count_nonzero(over)))
            np.minimum(upd, p.fmt.max_raw, out=upd)
        if tally:
            raise SaturationDetectedError(
                f"{tally.count} saturating operations; input mass exceeds the format range"
            )
        return RankBatch(values=upd.astype(np.int64), personalization=p.personalization, fmt=p.fmt)

    dt = p.values.dtype.type
    mass = p.values[g.dangling].sum(axis=0)
    s = dt(consts.alpha_over_v_raw) * mass
    upd = dt(consts.alpha_raw) * sp.values
    upd += s[None, :]
    upd[p.personalization, cols] += dt(consts.rest_raw)
    return RankBatch(values=upd, personalization=p.personalization, fmt=None)


def run(
    g: CooGraph, config: PprConfig, personalization
) -> tuple[RankBatch, ConvergenceTrace | None]:
    """Iterate the recurrence max_iter times (or to convergence_eps).

    Returns the final batch and, when track_convergence is set, the trace of
    per-column L2 norms between consecutive iterates. Deterministic for a
    given graph, config and personalization.
    """
    if g.num_vertices > config.vertex_capacity:
        raise ValueError(
            f"{g.num_vertices} vertices exceed the configured value-store capacity "
            f"({config.vertex_capacity})"
        )
    if g.fmt != config.fmt:
        raise FormatMismatchError(f"graph format {g.fmt} vs config format {config.fmt}")
    consts = _Constants.build(config, g.num_vertices)
    p = init(g.num_vertices, personalization, config)
    want_norms = config.track_convergence or config.early_stop
    norms = []
    for _ in range(config.max_iter):
        nxt = _step(g, p, config, consts)
        if want_norms:
            delta = nxt.scores() - p.scores()
            norms.append(np.linalg.norm(delta, axis=0))
            if config.early_stop and norms[-1].max() < config.convergence_eps:
                p = nxt
                break
        p = nxt
    trace = None
    if config.track_convergence:
        stacked = (
            np.array(norms, dtype=np.float64)
            if norms
            else np.empty((0, p.kappa), dtype=np.float64)
        )
        trace = ConvergenceTrace(norms=stacked)
    return p, trace


def rank(p: RankBatch, k: int, n: int | None = None) -> np.ndarray:
    """Vertex ids of column k sorted by score descending, ties by id ascending."""
    if not 0 <= k < p.kappa:
        raise IndexError(f"column {k} outside batch of {p.kappa}")
    v = p.num_vertices
    if n is None:
        n = v
    if not 0 < n <= v:
        raise ValueError(f"cutoff {n} outside [1, {v}]")
    col = p.values[:, k]
    order = np.lexsort((np.arange(v), -col))
    return order[:n]
