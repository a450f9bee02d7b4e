"""Softmax kernel ladder: one numerically stable algorithm, six implementations.

Every variant computes, row by row over a ``batch x classes`` float32 matrix,

    out[n] = exp(z[n] - max(z[n])) / sum(exp(z[n] - max(z[n])))

in three phases: **MaxSub** (find the row max, subtract it), **Exp**
(elementwise exponential of the whole buffer), and **SumScale** (sum each row,
multiply by the reciprocal).  The variants form an optimization ladder; each
rung changes exactly one thing:

=========================  ====================================================
ReferenceClipped           Scalar everything; shifted logits are clamped at
                           -64.0 so no output can underflow to zero (safe for
                           a following logarithm, e.g. cross-entropy).
ReferenceInference         Clip removed: inference needs no underflow guard.
MklStyleScalar             The per-element exponential is replaced by one
                           vectorized library call over the whole batch
                           buffer (``exp_batch``); max/subtract/sum loops stay
                           scalar.
VectorizedSum              The row sum switches to W-lane partial accumulators
                           (``simd_reduce.vsum`` structure).
FullVectorized             The row max switches to the wide-register search
                           (``simd_reduce.vmax`` structure).
FullVectorizedApproxExp    The library exponential is replaced by the
                           polynomial approximation (``simd_reduce.vexp``),
                           trading ~1e-7 relative error for a cheaper
                           per-element routine.
=========================  ====================================================

Numeric contracts
-----------------
* Scalar reductions scan strictly left to right.  The scalar row sum
  accumulates in double precision and rounds once to float32, keeping the
  reference denominator within ~1 ulp; the lane sum keeps faithful float32
  partials, whose reassociation error is bounded by tests.
* The scale step flushes results below the smallest positive normal float32
  to exactly +0.0.  ReferenceClipped can never hit this (its smallest
  exponential is e^-64); unclipped variants map shifted logits below ~-87.3
  to exactly 0 — that asymmetry is the observable difference clipping buys.
* Non-finite inputs are rejected up front with the offending row index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from .errors import ArgumentError, NumericDomainError
from .simd_reduce import LaneConfig, _lanes_max, _lanes_sum, _vexp_lanes
from .tensor import Matrix2D, alloc_matrix

__all__ = [
    "KernelVariant",
    "LADDER",
    "RowStats",
    "CLIP_FLOOR",
    "FLT_MIN_NORMAL",
    "row_max_scalar",
    "subtract_broadcast",
    "value_clip",
    "exp_batch",
    "row_sum_scalar",
    "scale_reciprocal",
    "row_stats",
    "softmax",
    "PhasePipeline",
    "variant_pipeline",
]


class KernelVariant(enum.Enum):
    """One rung of the optimization ladder (declaration order = ladder order)."""

    REFERENCE_CLIPPED = "ReferenceClipped"
    REFERENCE_INFERENCE = "ReferenceInference"
    MKL_STYLE_SCALAR = "MklStyleScalar"
    VECTORIZED_SUM = "VectorizedSum"
    FULL_VECTORIZED = "FullVectorized"
    FULL_VECTORIZED_APPROX_EXP = "FullVectorizedApproxExp"

    @classmethod
    def from_name(cls, name: str) -> "KernelVariant":
        for v in cls:
            if v.value == name:
                return v
        raise ArgumentError(
            f"unknown variant {name!r}; choose from {[v.value for v in cls]}"
        )


LADDER: tuple[KernelVariant, ...] = tuple(KernelVariant)

#: Floor applied to shifted logits by ReferenceClipped (e^-64 ~ 1.6e-28 > 0).
CLIP_FLOOR = np.float32(-64.0)
#: Smallest positive normal float32; scale-step results below it flush to +0.0.
FLT_MIN_NORMAL = np.float32(1.1754943508222875e-38)

# Test hook: when True, pipelines replace the max-subtract phase with a plain
# copy, so large logits overflow the exponential and verification must flag it.
_SKIP_MAX_SHIFT = False


class RowStats(NamedTuple):
    """Per-row reduction results: the logit maximum and the exp-sum denominator."""

    max: np.float32
    sum: np.float32


# --------------------------------------------------------------------------
# numba phase kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _seq_max(a):
    m = a[0]
    for i in range(1, a.size):
        if a[i] > m:
            m = a[i]
    return m


@njit(cache=True)
def _seq_sum_wide(a):
    acc = np.float64(a[0])
    for i in range(1, a.size):
        acc += np.float64(a[i])
    return np.float32(acc)


@njit(cache=True)
def _maxsub_rows_scalar(x, out, rows, cols, clip):
    for n in range(rows):
        base = n * cols
        m = x[base]
        for c in range(1, cols):
            v = x[base + c]
            if v > m:
                m = v
        if clip:
            for c in range(cols):
                s = x[base + c] - m
                out[base + c] = s if s > CLIP_FLOOR else CLIP_FLOOR
        else:
            for c in range(cols):
                out[base + c] = x[base + c] - m


@njit(cache=True)
def _maxsub_rows_lanes(x, out, rows, cols, W):
    lanes = np.empty(W, dtype=np.float32)
    for n in range(rows):
        base = n * cols
        m = _lanes_max(x, base, cols, W, lanes)
        main = (cols // W) * W
        c = 0
        while c < main:
            for w in range(W):
                out[base + c + w] = x[base + c + w] - m
            c += W
        while c < cols:
            out[base + c] = x[base + c] - m
            c += 1


@njit(cache=True)
def _exp_rows_scalar(buf):
    for i in range(buf.size):
        buf[i] = np.exp(buf[i])


@njit(cache=True)
def _sumscale_rows_scalar(buf, rows, cols):
    for n in range(rows):
        base = n * cols
        acc = np.float64(buf[base])
        for c in range(1, cols):
            acc += np.float64(buf[base + c])
        r = np.float32(1.0) / np.float32(acc)
        for c in range(cols):
            y = buf[base + c] * r
            if y < FLT_MIN_NORMAL:
                y = np.float32(0.0)
            buf[base + c] = y


@njit(cache=True)
def _sumscale_rows_lanes(buf, rows, cols, W):
    lanes = np.empty(W, dtype=np.float32)
    for n in range(rows):
        base = n * cols
        s = _lanes_sum(buf, base, cols, W, lanes)
        r = np.float32(1.0) / s
        main = (cols // W) * W
        c = 0
        while c < main:
            for w in range(W):
                y = buf[base + c + w] * r
                if y < FLT_MIN_NORMAL:
                    y = np.float32(0.0)
                buf[base + c + w] = y
            c += W
        while c < cols:
            y = buf[base + c] * r
            if y < FLT_MIN_NORMAL:
                y = np.float32(0.0)
            buf[base + c] = y
            c += 1


# --------------------------------------------------------------------------
# public component operations
# --------------------------------------------------------------------------

def _as_row(row: np.ndarray, op: str) -> np.ndarray:
    row = np.ascontiguousarray(row, dtype=np.float32)
    if row.ndim != 1:
        raise ArgumentError(f"{op} expects a 1-D row, got ndim={row.ndim}")
    if row.size == 0:
        raise ArgumentError(f"{op} requires a non-empty row")
    return row


def row_max_scalar(row: np.ndarray) -> np.float32:
    """Strict left-to-right scan for the row maximum (the bitwise baseline)."""
    return np.float32(_seq_max(_as_row(row, "row_max_scalar")))


def subtract_broadcast(row: np.ndarray, v: float) -> np.ndarray:
    """Return ``row - v`` elementwise (exact per-element IEEE subtraction)."""
    return _as_row(row, "subtract_broadcast") - np.float32(v)


def value_clip(x: float) -> np.float32:
    """Clamp a shifted logit at the -64.0 floor (ReferenceClipped semantics)."""
    x32 = np.float32(x)
    return x32 if x32 > CLIP_FLOOR else CLIP_FLOOR


def exp_batch(buf: np.ndarray) -> np.ndarray:
    """Elementwise exponential of the whole batch buffer, in one in-place call.

    This is the library rung of the ladder: a single vectorized call over
    ``rows * cols`` elements instead of a per-element loop.
    """
    buf = np.asarray(buf)
    if buf.dtype != np.float32:
        raise ArgumentError(f"exp_batch expects float32, got {buf.dtype}")
    np.exp(buf, out=buf)
    return buf


def row_sum_scalar(row: np.ndarray) -> np.float32:
    """Strict left-to-right row sum, accumulated in double, rounded to float32."""
    return np.float32(_seq_sum_wide(_as_row(row, "row_sum_scalar")))


def scale_reciprocal(row: np.ndarray, sum: float) -> np.ndarray:
    """Return ``row * (1/sum)``: one reciprocal per row, then multiplies."""
    row = _as_row(row, "scale_reciprocal")
    s = np.float32(sum)
    if not np.isfinite(s) or s <= 0:
        raise NumericDomainError(f"normalization sum must be finite and > 0, got {sum}")
    return row * (np.float32(1.0) / s)


def row_stats(row: np.ndarray) -> RowStats:
    """Compute the two per-row reductions softmax needs: max and exp-sum."""
    m = row_max_scalar(row)
    shifted = subtract_broadcast(row, m)
    return RowStats(max=m, sum=row_sum_scalar(np.exp(shifted)))


# --------------------------------------------------------------------------
# variant pipelines
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePipeline:
    """The three phases of one softmax execution, bound to a fixed shape.

    ``maxsub(src, dst)`` reads the flat logits and writes shifted logits;
    ``exp(buf)`` and ``sumscale(buf)`` transform ``dst`` in place.
    """

    variant: KernelVariant
    maxsub: Callable[[np.ndarray, np.ndarray], None]
    exp: Callable[[np.ndarray], None]
    sumscale: Callable[[np.ndarray], None]


def variant_pipeline(
    variant: KernelVariant,
    rows: int,
    cols: int,
    cfg: LaneConfig = LaneConfig(),
) -> PhasePipeline:
    """Bind a variant's three phase kernels to a concrete matrix shape."""
    if not isinstance(variant, KernelVariant):
        raise ArgumentError(f"expected a KernelVariant, got {variant!r}")
    W = cfg.width
    V = KernelVariant

    if _SKIP_MAX_SHIFT:
        def maxsub(src, dst):
            np.copyto(dst, src)
    elif variant is V.REFERENCE_CLIPPED:
        def maxsub(src, dst):
            _maxsub_rows_scalar(src, dst, rows, cols, True)
    elif variant in (V.REFERENCE_INFERENCE, V.MKL_STYLE_SCALAR, V.VECTORIZED_SUM):
        def maxsub(src, dst):
            _maxsub_rows_scalar(src, dst, rows, cols, False)
    else:
        def maxsub(src, dst):
            _maxsub_rows_lanes(src, dst, rows, cols, W)

    if variant in (V.REFERENCE_CLIPPED, V.REFERENCE_INFERENCE):
        def exp(buf):
            _exp_rows_scalar(buf)
    elif variant is V.FULL_VECTORIZED_APPROX_EXP:
        def exp(buf):
            _vexp_lanes(buf, buf, W)
    else:
        def exp(buf):
            exp_batch(buf)

    if variant in (V.REFERENCE_CLIPPED, V.REFERENCE_INFERENCE, V.MKL_STYLE_SCALAR):
        def sumscale(buf):
            _sumscale_rows_scalar(buf, rows, cols)
    else:
        def sumscale(buf):
            _sumscale_rows_lanes(buf, rows, cols, W)

    return PhasePipeline(variant=variant, maxsub=maxsub, exp=exp, sumscale=sumscale)


def _check_finite(m: Matrix2D) -> None:
    if np.isfinite(m.data).all():
        return
    row_ok = np.isfinite(m.view2d).all(axis=1)
    bad = int(np.argmin(row_ok))
    raise NumericDomainError(f"non-finite logits in row {bad}")


def softmax(
    m: Matrix2D,
    variant: KernelVariant,
    cfg: LaneConfig = LaneConfig(),
) -> Matrix2D:
    """Run one softmax variant over ``m`` and return a fresh output matrix."""
    _check_finite(m)
    pipe = variant_pipeline(variant, m.rows, m.cols, cfg)
    out = alloc_matrix(m.rows, m.cols)
    pipe.maxsub(m.data, out.data)
    pipe.exp(out.data)
    pipe.sumscale(out.data)
    return out
