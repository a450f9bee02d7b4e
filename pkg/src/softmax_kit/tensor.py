"""Aligned row-major float32 matrices and deterministic test-data generation.

All kernels in this package operate on row-major ``batch x classes`` buffers
of 32-bit floats.  Buffers are allocated with their start address aligned to
32 bytes so that 8-lane single-precision vector loads never straddle an
alignment boundary.

Deterministic fill
------------------
``fill_uniform`` uses the Philox4x64 counter-based bit generator keyed with
the caller's seed.  Each 64-bit raw output ``u64`` is mapped to an open-interval
double via ``((u64 >> 11) + 0.5) * 2**-53``, scaled affinely onto
``(low, high)`` in double precision, cast to float32, and finally clamped to
the open interval so rounding at the cast can never land exactly on a bound.
Philox raw output is version-stable across NumPy releases, so a given
``FillSpec`` reproduces the same bits everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ResourceError

ALIGNMENT = 32
_F32_BYTES = 4


@dataclass(frozen=True)
class Matrix2D:
    """A contiguous row-major ``rows x cols`` float32 buffer, 32-byte aligned.

    ``data`` is the flat backing array; element ``(n, c)`` lives at linear
    index ``n * cols + c``.
    """

    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ArgumentError(
                f"matrix dimensions must be >= 1, got {self.rows}x{self.cols}"
            )
        if self.data.dtype != np.float32:
            raise ArgumentError(f"expected float32 data, got {self.data.dtype}")
        if self.data.ndim != 1 or not self.data.flags.c_contiguous:
            raise ArgumentError("data must be a contiguous 1-D buffer")
        if self.data.size != self.rows * self.cols:
            raise ArgumentError(
                f"data length {self.data.size} != rows*cols = {self.rows * self.cols}"
            )
        if self.data.ctypes.data % ALIGNMENT != 0:
            raise ArgumentError("buffer start is not 32-byte aligned")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def view2d(self) -> np.ndarray:
        """Zero-copy ``(rows, cols)`` view of the backing buffer."""
        return self.data.reshape(self.rows, self.cols)

    def row(self, n: int) -> np.ndarray:
        """Zero-copy view of row ``n``."""
        if not 0 <= n < self.rows:
            raise ArgumentError(f"row index {n} out of range [0, {self.rows})")
        return self.data[n * self.cols : (n + 1) * self.cols]


@dataclass(frozen=True)
class FillSpec:
    """Deterministic uniform-fill request: seed plus an open value interval."""

    seed: int
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise ArgumentError("fill bounds must be finite")
        if not self.low < self.high:
            raise ArgumentError(f"need low < high, got [{self.low}, {self.high}]")


def alloc_matrix(rows: int, cols: int) -> Matrix2D:
    """Allocate a zero-initialized, 32-byte-aligned ``rows x cols`` matrix."""
    if rows < 1 or cols < 1:
        raise ArgumentError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    n = rows * cols
    if n * _F32_BYTES > np.iinfo(np.intp).max:
        raise ArgumentError(f"shape {rows}x{cols} overflows the platform size type")
    pad = ALIGNMENT // _F32_BYTES
    try:
        raw = np.zeros(n + pad, dtype=np.float32)
    except MemoryError as exc:
        raise ResourceError(f"allocation of {rows}x{cols} float32 failed") from exc
    offset = (-raw.ctypes.data) % ALIGNMENT // _F32_BYTES
    return Matrix2D(rows=rows, cols=cols, data=raw[offset : offset + n])


def fill_uniform(m: Matrix2D, spec: FillSpec) -> Matrix2D:
    """Fill ``m`` in place from uniform(low, high), deterministically.

    The generator is documented in the module docstring; identical
    seed + range + shape reproduces bit-identical buffers.
    """
    raw = np.random.Philox(key=spec.seed).random_raw(m.rows * m.cols)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    vals = (spec.low + (spec.high - spec.low) * u).astype(np.float32)
    lo = np.float32(spec.low)
    hi = np.float32(spec.high)
    lo_in = np.nextafter(lo, hi) if lo <= spec.low else lo
    hi_in = np.nextafter(hi, lo) if hi >= spec.high else hi
    np.clip(vals, lo_in, hi_in, out=vals)
    m.data[:] = vals
    return m
