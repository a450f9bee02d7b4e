"""Phase-level timing of softmax executions and report aggregation.

The timer is the runtime's highest-resolution monotonic clock
(``time.perf_counter_ns``), read in integer nanosecond "ticks"
(``TICKS_PER_SECOND`` = 1e9).  Each timed execution brackets every phase with
its own pair of reads plus an outer whole-op pair, so instrumentation cost
lands in the gaps between phases and ``MaxSub + Exp + SumScale <= WholeOp``
holds by construction.

Aggregated tables mirror the familiar framework-profiler layout: one row per
event with Calls / Total / Min. / Max. / Ave. / Ratio., in milliseconds,
sorted by total time descending; Ratio is the event's share of the grand
total of all recorded events.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from statistics import median
from typing import Sequence

from .errors import ArgumentError
from .kernels import KernelVariant, variant_pipeline
from .simd_reduce import LaneConfig
from .tensor import Matrix2D, alloc_matrix

__all__ = [
    "TICKS_PER_SECOND",
    "TICKS_PER_MS",
    "now",
    "Timer",
    "default_timer",
    "PhaseId",
    "PhaseTimings",
    "time_phases",
    "time_whole",
    "phase_ratio_summary",
    "EventStats",
    "ProfileReport",
    "build_report",
    "format_report",
    "report_to_csv",
    "parse_report",
    "REPORT_HEADER",
]

TICKS_PER_SECOND = 1_000_000_000
TICKS_PER_MS = TICKS_PER_SECOND // 1000

now = time.perf_counter_ns


@dataclass(frozen=True)
class Timer:
    """Tick source description: resolution in ticks/second and backend name."""

    resolution: int
    source: str


def default_timer() -> Timer:
    return Timer(resolution=TICKS_PER_SECOND, source="time.perf_counter_ns")


class PhaseId(Enum):
    MAXSUB = "MaxSub"
    EXP = "Exp"
    SUMSCALE = "SumScale"
    WHOLEOP = "WholeOp"


@dataclass(frozen=True)
class PhaseTimings:
    """Tick counts for one softmax execution, per phase and whole-op."""

    maxsub: int
    exp: int
    sumscale: int
    whole: int

    @property
    def phase_sum(self) -> int:
        return self.maxsub + self.exp + self.sumscale

    def __getitem__(self, phase: PhaseId) -> int:
        return {
            PhaseId.MAXSUB: self.maxsub,
            PhaseId.EXP: self.exp,
            PhaseId.SUMSCALE: self.sumscale,
            PhaseId.WHOLEOP: self.whole,
        }[phase]


def time_phases(
    m: Matrix2D,
    variant: KernelVariant,
    reps: int,
    warmup: int = 10,
    cfg: LaneConfig = LaneConfig(),
) -> list[PhaseTimings]:
    """Run ``warmup`` untimed then ``reps`` timed executions of ``variant``.

    The output buffer is allocated once and reused, so first-touch page
    faults do not pollute the timings.
    """
    if reps < 1:
        raise ArgumentError(f"reps must be >= 1, got {reps}")
    if warmup < 0:
        raise ArgumentError(f"warmup must be >= 0, got {warmup}")
    pipe = variant_pipeline(variant, m.rows, m.cols, cfg)
    out = alloc_matrix(m.rows, m.cols)
    src, dst = m.data, out.data
    for _ in range(warmup):
        pipe.maxsub(src, dst)
        pipe.exp(dst)
        pipe.sumscale(dst)
    results: list[PhaseTimings] = []
    for _ in range(reps):
        w0 = now()
        a = now()
        pipe.maxsub(src, dst)
        b = now()
        c = now()
        pipe.exp(dst)
        d = now()
        e = now()
        pipe.sumscale(dst)
        f = now()
        w1 = now()
        results.append(PhaseTimings(b - a, d - c, f - e, w1 - w0))
    return results


def time_whole(
    m: Matrix2D,
    variant: KernelVariant,
    reps: int,
    warmup: int = 10,
    cfg: LaneConfig = LaneConfig(),
) -> list[int]:
    """Whole-op tick samples with minimal instrumentation (one read pair/rep)."""
    if reps < 1:
        raise ArgumentError(f"reps must be >= 1, got {reps}")
    if warmup < 0:
        raise ArgumentError(f"warmup must be >= 0, got {warmup}")
    pipe = variant_pipeline(variant, m.rows, m.cols, cfg)
    out = alloc_matrix(m.rows, m.cols)
    src, dst = m.data, out.data
    for _ in range(warmup):
        pipe.maxsub(src, dst)
        pipe.exp(dst)
        pipe.sumscale(dst)
    samples: list[int] = []
    for _ in range(reps):
        t0 = now()
        pipe.maxsub(src, dst)
        pipe.exp(dst)
        pipe.sumscale(dst)
        samples.append(now() - t0)
    return samples


def phase_ratio_summary(timings: Sequence[PhaseTimings]) -> dict[PhaseId, float]:
    """Median per-execution share of WholeOp for each phase (plus WholeOp=1)."""
    if not timings:
        raise ArgumentError("need at least one timing sample")
    out: dict[PhaseId, float] = {}
    for phase in (PhaseId.MAXSUB, PhaseId.EXP, PhaseId.SUMSCALE):
        out[phase] = median(t[phase] / t.whole for t in timings)
    out[PhaseId.WHOLEOP] = 1.0
    return out


# --------------------------------------------------------------------------
# report aggregation and formatting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EventStats:
    """Aggregate statistics for one event; times are in ticks."""

    name: str
    calls: int
    total: float
    min: float
    max: float
    ave: float
    ratio: float


@dataclass(frozen=True)
class ProfileReport:
    events: tuple[EventStats, ...]


def build_report(events: Sequence[tuple[str, Sequence[float]]]) -> ProfileReport:
    """Aggregate per-event tick samples into sorted EventStats rows."""
    if not events:
        raise ArgumentError("build_report requires at least one event")
    grand = 0.0
    prepared = []
    for name, samples in events:
        if len(samples) == 0:
            raise ArgumentError(f"event {name!r} has no samples")
        total = float(sum(samples))
        grand += total
        prepared.append((name, len(samples), total, float(min(samples)), float(max(samples))))
    stats = [
        EventStats(
            name=name,
            calls=calls,
            total=total,
            min=mn,
            max=mx,
            ave=total / calls,
            ratio=total / grand if grand > 0 else 0.0,
        )
        for name, calls, total, mn, mx in prepared
    ]
    stats.sort(key=lambda s: s.total, reverse=True)
    return ProfileReport(events=tuple(stats))


REPORT_HEADER = (
    "------------------------->     Profiling Report     <-----------------------"
)

_COLUMNS = ("Event", "Calls", "Total", "Min.", "Max.", "Ave.", "Ratio.")


def _ms(ticks: float) -> str:
    return f"{ticks / TICKS_PER_MS:.6g}"


def format_report(r: ProfileReport, place: str = "CPU") -> str:
    """Render the report as a fixed-column text table (times in ms)."""
    name_w = max([len("Event")] + [len(e.name) for e in r.events]) + 2
    lines = [
        REPORT_HEADER,
        "",
        f"Place: {place}",
        "Time unit: ms",
        "Sorted by total time in descending order in the same thread",
        "",
        f"{_COLUMNS[0]:<{name_w}}{_COLUMNS[1]:<9}{_COLUMNS[2]:<10}"
        f"{_COLUMNS[3]:<10}{_COLUMNS[4]:<10}{_COLUMNS[5]:<11}{_COLUMNS[6]}",
    ]
    for e in r.events:
        lines.append(
            f"{e.name:<{name_w}}{e.calls:<9}{_ms(e.total):<10}"
            f"{_ms(e.min):<10}{_ms(e.max):<10}{_ms(e.ave):<11}{e.ratio:.3f}"
        )
    return "\n".join(lines) + "\n"


def report_to_csv(r: ProfileReport) -> str:
    """One CSV row per event, columns matching the text table (times in ms)."""
    lines = [",".join(_COLUMNS)]
    for e in r.events:
        lines.append(
            f"{e.name},{e.calls},{_ms(e.total)},{_ms(e.min)},{_ms(e.max)},"
            f"{_ms(e.ave)},{e.ratio:.3f}"
        )
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> ProfileReport:
    """Parse ``format_report`` output back into a ProfileReport."""
    lines = text.splitlines()
    try:
        header_idx = next(i for i, ln in enumerate(lines) if ln.startswith("Event"))
    except StopIteration:
        raise ArgumentError("no column header found in report text") from None
    events = []
    for ln in lines[header_idx + 1 :]:
        if not ln.strip():
            continue
        name, calls, total, mn, mx, ave, ratio = ln.split()
        events.append(
            EventStats(
                name=name,
                calls=int(calls),
                total=float(total) * TICKS_PER_MS,
                min=float(mn) * TICKS_PER_MS,
                max=float(mx) * TICKS_PER_MS,
                ave=float(ave) * TICKS_PER_MS,
                ratio=float(ratio),
            )
        )
    return ProfileReport(events=tuple(events))
