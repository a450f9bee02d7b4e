"""Memory-boundedness estimation: kernel time vs an equal-size buffer copy.

A softmax execution reads one ``rows x cols`` float32 buffer and writes
another of the same size, so a bulk copy between two such buffers moves the
same bytes with (near) zero arithmetic.  Comparing the two medians says how
far the kernel is from the machine's memory-throughput ceiling: a ratio near
1 means further arithmetic optimization cannot help (memory bound), a large
ratio means compute dominates and optimization headroom remains.

The copy side uses the runtime's vendor-optimized bulk copy (``np.copyto``),
and both sides run under identical warmup/repetition protocols with output
buffers allocated once and reused.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from statistics import median

import numpy as np

from .errors import ArgumentError, SoftmaxKitError
from .kernels import KernelVariant
from .profiler import now, time_whole
from .simd_reduce import LaneConfig
from .tensor import Matrix2D, alloc_matrix

__all__ = [
    "MEMORY_BOUND_THRESHOLD",
    "Verdict",
    "BoundProbeResult",
    "copy_samples",
    "copy_baseline",
    "probe",
    "probe_self_copy",
]

#: Kernel/copy ratios at or below this classify as MemoryBoundLikely; the 30%
#: headroom absorbs timer noise around a true ratio of 1.
MEMORY_BOUND_THRESHOLD = 1.3


class Verdict(Enum):
    MEMORY_BOUND_LIKELY = "MemoryBoundLikely"
    COMPUTE_BOUND_LIKELY = "ComputeBoundLikely"


@dataclass(frozen=True)
class BoundProbeResult:
    """Median kernel and copy ticks, their ratio, and the derived verdict."""

    kernel_ticks: float
    copy_ticks: float
    ratio: float
    verdict: Verdict


def _verdict(ratio: float) -> Verdict:
    return (
        Verdict.MEMORY_BOUND_LIKELY
        if ratio <= MEMORY_BOUND_THRESHOLD
        else Verdict.COMPUTE_BOUND_LIKELY
    )


def copy_samples(m: Matrix2D, reps: int, warmup: int = 10) -> list[int]:
    """Tick samples for a full input->output copy of ``rows*cols*4`` bytes.

    After the final rep the output buffer is verified bit-identical to the
    input.
    """
    if reps < 3:
        raise ArgumentError(f"copy timing needs reps >= 3, got {reps}")
    if warmup < 0:
        raise ArgumentError(f"warmup must be >= 0, got {warmup}")
    dst = alloc_matrix(m.rows, m.cols)
    for _ in range(warmup):
        np.copyto(dst.data, m.data)
    samples = []
    for _ in range(reps):
        t0 = now()
        np.copyto(dst.data, m.data)
        samples.append(now() - t0)
    if not np.array_equal(dst.data.view(np.int32), m.data.view(np.int32)):
        raise SoftmaxKitError("copy verification failed: output differs from input")
    return samples


def copy_baseline(m: Matrix2D, reps: int, warmup: int = 10) -> float:
    """Median ticks of the bulk-copy baseline (see ``copy_samples``)."""
    return float(median(copy_samples(m, reps, warmup)))


def probe(
    m: Matrix2D,
    variant: KernelVariant,
    reps: int,
    warmup: int = 10,
    cfg: LaneConfig = LaneConfig(),
) -> BoundProbeResult:
    """Time ``variant`` and the copy baseline under one protocol and classify."""
    if reps < 3:
        raise ArgumentError(f"probe needs reps >= 3, got {reps}")
    kernel_ticks = float(median(time_whole(m, variant, reps, warmup, cfg)))
    copy_ticks = copy_baseline(m, reps, warmup)
    ratio = kernel_ticks / copy_ticks
    return BoundProbeResult(kernel_ticks, copy_ticks, ratio, _verdict(ratio))


def probe_self_copy(m: Matrix2D, reps: int, warmup: int = 10) -> BoundProbeResult:
    """Probe the copy routine against itself (sanity check: ratio ~ 1)."""
    if reps < 3:
        raise ArgumentError(f"probe needs reps >= 3, got {reps}")
    kernel_ticks = copy_baseline(m, reps, warmup)
    copy_ticks = copy_baseline(m, reps, warmup)
    ratio = kernel_ticks / copy_ticks
    return BoundProbeResult(kernel_ticks, copy_ticks, ratio, _verdict(ratio))
