"""Benchmark harness: sweep variants x batch sizes, verify, and report.

Every sweep feeds bit-identical inputs (one seeded fill per batch size, SHA-256
hashed for auditability) to every variant, times whole executions with warmup,
and reports medians plus percent-of-baseline — the baseline variant is 100 at
every batch by construction, lower is better.  Correctness is always measured
against the float64 oracle; timing expectations are reported as PASS/WARN
because absolute speedups are hardware-dependent, while tolerance violations
are hard failures.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from statistics import median

from .bound_probe import BoundProbeResult, copy_samples, probe, probe_self_copy
from .errors import ArgumentError
from .kernels import LADDER, KernelVariant, softmax
from .oracle import max_rel_err, max_rowsum_dev, softmax_oracle
from .profiler import build_report, format_report, phase_ratio_summary, time_phases, time_whole, PhaseId
from .simd_reduce import LaneConfig
from .tensor import FillSpec, Matrix2D, alloc_matrix, fill_uniform

__all__ = [
    "ELEM_TOL_EXACT",
    "ELEM_TOL_APPROX",
    "ROWSUM_TOL",
    "SPEEDUP_PCT_EXPECTATION",
    "COPY_ROW_NAME",
    "BenchConfig",
    "elem_tolerance",
    "VerifyEntry",
    "VerifySummary",
    "run_verify",
    "format_verify",
    "SweepRow",
    "BenchRun",
    "run_bench",
    "format_bench",
    "run_profile",
    "ProbeRow",
    "run_probe",
    "format_probe",
]

#: Hard tolerance on max element relative error vs the float64 oracle.
ELEM_TOL_EXACT = 1e-6
#: Same, for the polynomial-exp variant.
ELEM_TOL_APPROX = 1e-5
#: Hard tolerance on max |row sum - 1| for every variant.
ROWSUM_TOL = 1e-5
#: Soft expectation: FullVectorized at <= 70% of baseline time (PASS/WARN).
SPEEDUP_PCT_EXPECTATION = 70.0

COPY_ROW_NAME = "CopyBaseline"

_FORMATS = ("text", "csv", "json")


def elem_tolerance(variant: KernelVariant) -> float:
    if variant is KernelVariant.FULL_VECTORIZED_APPROX_EXP:
        return ELEM_TOL_APPROX
    return ELEM_TOL_EXACT


@dataclass(frozen=True)
class BenchConfig:
    """Sweep matrix, measurement protocol, and output options."""

    batch_sizes: tuple[int, ...] = (1, 8, 32, 128)
    num_classes: int = 1000
    variants: tuple[KernelVariant, ...] = LADDER
    reps: int = 100
    warmup: int = 10
    seed: int = 42
    fill_low: float = -5.0
    fill_high: float = 5.0
    output_format: str = "text"
    baseline: KernelVariant = KernelVariant.REFERENCE_CLIPPED
    lane_width: int = 8

    def __post_init__(self) -> None:
        if not self.batch_sizes or any(b < 1 for b in self.batch_sizes):
            raise ArgumentError(f"batch sizes must be non-empty, all >= 1: {self.batch_sizes}")
        if self.num_classes < 1:
            raise ArgumentError(f"num_classes must be >= 1, got {self.num_classes}")
        if not self.variants:
            raise ArgumentError("variant list must be non-empty")
        if self.baseline not in self.variants:
            raise ArgumentError(
                f"baseline {self.baseline.value} must be among the selected variants"
            )
        if self.reps < 1:
            raise ArgumentError(f"reps must be >= 1, got {self.reps}")
        if self.warmup < 0:
            raise ArgumentError(f"warmup must be >= 0, got {self.warmup}")
        if self.output_format not in _FORMATS:
            raise ArgumentError(f"format must be one of {_FORMATS}, got {self.output_format!r}")
        if not self.fill_low < self.fill_high:
            raise ArgumentError(f"need fill low < high, got [{self.fill_low}, {self.fill_high}]")

    @property
    def lane_cfg(self) -> LaneConfig:
        return LaneConfig(self.lane_width)

    @property
    def ladder_variants(self) -> tuple[KernelVariant, ...]:
        """Selected variants in canonical ladder order."""
        return tuple(v for v in LADDER if v in self.variants)


def _fill_input(cfg: BenchConfig, batch: int) -> tuple[Matrix2D, str]:
    m = alloc_matrix(batch, cfg.num_classes)
    fill_uniform(m, FillSpec(seed=cfg.seed, low=cfg.fill_low, high=cfg.fill_high))
    digest = hashlib.sha256(m.data.tobytes()).hexdigest()
    return m, digest


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyEntry:
    variant: str
    batch: int
    cols: int
    max_elem_relerr: float
    max_rowsum_dev: float
    elem_tol: float
    rowsum_tol: float
    worst_row: int
    passed: bool


@dataclass(frozen=True)
class VerifySummary:
    entries: tuple[VerifyEntry, ...]

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> tuple[VerifyEntry, ...]:
        return tuple(e for e in self.entries if not e.passed)


def _worst_row(got2d, ref2d) -> int:
    import numpy as np

    err = np.abs(got2d.astype(np.float64) - ref2d) / np.abs(ref2d)
    err[~np.isfinite(err)] = np.inf
    return int(np.unravel_index(np.argmax(err), err.shape)[0])


def run_verify(cfg: BenchConfig) -> VerifySummary:
    """Compare every (variant, batch) output against the float64 oracle."""
    entries = []
    for batch in cfg.batch_sizes:
        m, _ = _fill_input(cfg, batch)
        ref = softmax_oracle(m.view2d)
        for variant in cfg.ladder_variants:
            out = softmax(m, variant, cfg.lane_cfg)
            relerr = max_rel_err(out.view2d, ref)
            rowsum = max_rowsum_dev(out.view2d)
            tol = elem_tolerance(variant)
            passed = relerr <= tol and rowsum <= ROWSUM_TOL
            entries.append(
                VerifyEntry(
                    variant=variant.value,
                    batch=batch,
                    cols=cfg.num_classes,
                    max_elem_relerr=relerr,
                    max_rowsum_dev=rowsum,
                    elem_tol=tol,
                    rowsum_tol=ROWSUM_TOL,
                    worst_row=_worst_row(out.view2d, ref),
                    passed=passed,
                )
            )
    return VerifySummary(entries=tuple(entries))


def format_verify(summary: VerifySummary, fmt: str = "text") -> str:
    if fmt == "csv":
        lines = ["variant,batch,cols,max_elem_relerr,max_rowsum_dev,elem_tol,rowsum_tol,status"]
        for e in summary.entries:
            status = "pass" if e.passed else "FAIL"
            lines.append(
                f"{e.variant},{e.batch},{e.cols},{e.max_elem_relerr:.6g},"
                f"{e.max_rowsum_dev:.6g},{e.elem_tol:g},{e.rowsum_tol:g},{status}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "variant": e.variant,
                "batch": e.batch,
                "cols": e.cols,
                "max_elem_relerr": e.max_elem_relerr,
                "max_rowsum_dev": e.max_rowsum_dev,
                "elem_tol": e.elem_tol,
                "rowsum_tol": e.rowsum_tol,
                "status": "pass" if e.passed else "FAIL",
            }
            for e in summary.entries
        ]
        return json.dumps(payload, indent=2) + "\n"
    width = max(len(e.variant) for e in summary.entries) + 2
    lines = [
        f"{'variant':<{width}}{'batch':>6}{'cols':>6}{'elem_relerr':>13}"
        f"{'rowsum_dev':>12}{'tol':>9}  status"
    ]
    for e in summary.entries:
        status = "pass" if e.passed else f"FAIL (worst row {e.worst_row})"
        lines.append(
            f"{e.variant:<{width}}{e.batch:>6}{e.cols:>6}{e.max_elem_relerr:>13.3e}"
            f"{e.max_rowsum_dev:>12.3e}{e.elem_tol:>9.0e}  {status}"
        )
    lines.append(f"verify: {'OK' if summary.ok else 'FAILED'}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    variant: str
    batch: int
    cols: int
    median_ticks: float
    min_ticks: float
    pct_of_baseline: float
    max_rowsum_dev: float | None
    max_elem_relerr: float | None


@dataclass(frozen=True)
class BenchRun:
    rows: tuple[SweepRow, ...]
    input_hashes: dict[int, str] = field(compare=False)


def run_bench(cfg: BenchConfig) -> BenchRun:
    """Timing sweep plus correctness stats; adds a CopyBaseline row per batch."""
    rows: list[SweepRow] = []
    hashes: dict[int, str] = {}
    for batch in cfg.batch_sizes:
        m, digest = _fill_input(cfg, batch)
        hashes[batch] = digest
        ref = softmax_oracle(m.view2d)
        timed: dict[KernelVariant, tuple[float, float, float, float]] = {}
        for variant in cfg.ladder_variants:
            samples = time_whole(m, variant, cfg.reps, cfg.warmup, cfg.lane_cfg)
            out = softmax(m, variant, cfg.lane_cfg)
            timed[variant] = (
                float(median(samples)),
                float(min(samples)),
                max_rowsum_dev(out.view2d),
                max_rel_err(out.view2d, ref),
            )
        base_med = timed[cfg.baseline][0]
        for variant in cfg.ladder_variants:
            med, mn, rowsum, relerr = timed[variant]
            rows.append(
                SweepRow(
                    variant=variant.value,
                    batch=batch,
                    cols=cfg.num_classes,
                    median_ticks=med,
                    min_ticks=mn,
                    pct_of_baseline=100.0 * med / base_med,
                    max_rowsum_dev=rowsum,
                    max_elem_relerr=relerr,
                )
            )
        csamples = copy_samples(m, max(cfg.reps, 3), cfg.warmup)
        rows.append(
            SweepRow(
                variant=COPY_ROW_NAME,
                batch=batch,
                cols=cfg.num_classes,
                median_ticks=float(median(csamples)),
                min_ticks=float(min(csamples)),
                pct_of_baseline=100.0 * float(median(csamples)) / base_med,
                max_rowsum_dev=None,
                max_elem_relerr=None,
            )
        )
    return BenchRun(rows=tuple(rows), input_hashes=hashes)


def _num(x: float) -> str:
    return f"{x:.10g}"


def _dev(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def format_bench(run: BenchRun, fmt: str = "text") -> str:
    header = "variant,batch,cols,median_ticks,min_ticks,pct_of_baseline,max_rowsum_dev,max_elem_relerr"
    if fmt == "csv":
        lines = [header]
        for r in run.rows:
            lines.append(
                f"{r.variant},{r.batch},{r.cols},{_num(r.median_ticks)},{_num(r.min_ticks)},"
                f"{r.pct_of_baseline:.6g},{_dev(r.max_rowsum_dev)},{_dev(r.max_elem_relerr)}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "variant": r.variant,
                "batch": r.batch,
                "cols": r.cols,
                "median_ticks": r.median_ticks,
                "min_ticks": r.min_ticks,
                "pct_of_baseline": r.pct_of_baseline,
                "max_rowsum_dev": r.max_rowsum_dev,
                "max_elem_relerr": r.max_elem_relerr,
            }
            for r in run.rows
        ]
        return json.dumps(payload, indent=2) + "\n"
    width = max(len(r.variant) for r in run.rows) + 2
    lines = [
        f"{'variant':<{width}}{'batch':>6}{'cols':>6}{'median_us':>12}"
        f"{'min_us':>10}{'pct_base':>10}  correctness(relerr/rowsum)"
    ]
    fast: dict[int, dict[str, float]] = {}
    for r in run.rows:
        corr = (
            "-"
            if r.max_elem_relerr is None
            else f"{r.max_elem_relerr:.2e}/{r.max_rowsum_dev:.2e}"
        )
        lines.append(
            f"{r.variant:<{width}}{r.batch:>6}{r.cols:>6}{r.median_ticks / 1e3:>12.2f}"
            f"{r.min_ticks / 1e3:>10.2f}{r.pct_of_baseline:>10.2f}  {corr}"
        )
        fast.setdefault(r.batch, {})[r.variant] = r.pct_of_baseline
    fv = KernelVariant.FULL_VECTORIZED.value
    for batch, pcts in fast.items():
        if fv in pcts:
            status = "PASS" if pcts[fv] <= SPEEDUP_PCT_EXPECTATION else "WARN"
            lines.append(
                f"{status} (expectation, hardware-dependent): {fv} at batch {batch} ran at "
                f"{pcts[fv]:.1f}% of baseline (target <= {SPEEDUP_PCT_EXPECTATION:.0f}%)"
            )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# profile
# --------------------------------------------------------------------------

def run_profile(cfg: BenchConfig) -> str:
    """Per (variant, batch): a profiler table over MaxSub/Exp/SumScale/WholeOp."""
    blocks: list[str] = []
    csv_lines: list[str] = []
    json_blocks: list[dict] = []
    for batch in cfg.batch_sizes:
        m, _ = _fill_input(cfg, batch)
        for variant in cfg.ladder_variants:
            timings = time_phases(m, variant, cfg.reps, cfg.warmup, cfg.lane_cfg)
            report = build_report(
                [
                    ("MaxSub", [t.maxsub for t in timings]),
                    ("Exp", [t.exp for t in timings]),
                    ("SumScale", [t.sumscale for t in timings]),
                    ("WholeOp", [t.whole for t in timings]),
                ]
            )
            shares = phase_ratio_summary(timings)
            if cfg.output_format == "csv":
                for e in report.events:
                    csv_lines.append(
                        f"{variant.value},{batch},{e.name},{e.calls},"
                        f"{e.total / 1e6:.6g},{e.min / 1e6:.6g},{e.max / 1e6:.6g},"
                        f"{e.ave / 1e6:.6g},{e.ratio:.3f}"
                    )
            elif cfg.output_format == "json":
                json_blocks.append(
                    {
                        "variant": variant.value,
                        "batch": batch,
                        "cols": cfg.num_classes,
                        "events": [
                            {
                                "event": e.name,
                                "calls": e.calls,
                                "total_ms": e.total / 1e6,
                                "min_ms": e.min / 1e6,
                                "max_ms": e.max / 1e6,
                                "ave_ms": e.ave / 1e6,
                                "ratio": e.ratio,
                            }
                            for e in report.events
                        ],
                    }
                )
            else:
                blocks.append(
                    f"== {variant.value}  batch={batch}  cols={cfg.num_classes} ==\n"
                    + format_report(report)
                    + (
                        "Phase shares of WholeOp (medians): "
                        f"MaxSub {shares[PhaseId.MAXSUB]:.3f}  "
                        f"Exp {shares[PhaseId.EXP]:.3f}  "
                        f"SumScale {shares[PhaseId.SUMSCALE]:.3f}\n"
                    )
                )
    if cfg.output_format == "csv":
        header = "variant,batch,Event,Calls,Total,Min.,Max.,Ave.,Ratio."
        return "\n".join([header] + csv_lines) + "\n"
    if cfg.output_format == "json":
        return json.dumps(json_blocks, indent=2) + "\n"
    return "\n".join(blocks)


# --------------------------------------------------------------------------
# probe
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeRow:
    shape: str
    variant: str
    result: BoundProbeResult


def run_probe(cfg: BenchConfig) -> tuple[ProbeRow, ...]:
    """Boundedness probe per (variant, batch) plus one copy self-probe row."""
    reps = max(cfg.reps, 3)
    rows: list[ProbeRow] = []
    for batch in cfg.batch_sizes:
        m, _ = _fill_input(cfg, batch)
        for variant in cfg.ladder_variants:
            rows.append(
                ProbeRow(
                    shape=f"{batch}x{cfg.num_classes}",
                    variant=variant.value,
                    result=probe(m, variant, reps, cfg.warmup, cfg.lane_cfg),
                )
            )
    biggest = max(cfg.batch_sizes)
    m, _ = _fill_input(cfg, biggest)
    rows.append(
        ProbeRow(
            shape=f"{biggest}x{cfg.num_classes}",
            variant=COPY_ROW_NAME,
            result=probe_self_copy(m, reps, cfg.warmup),
        )
    )
    return tuple(rows)


def format_probe(rows: tuple[ProbeRow, ...], fmt: str = "text") -> str:
    if fmt == "csv":
        lines = ["shape,variant,kernel_ticks,copy_ticks,ratio,verdict"]
        for r in rows:
            lines.append(
                f"{r.shape},{r.variant},{_num(r.result.kernel_ticks)},"
                f"{_num(r.result.copy_ticks)},{r.result.ratio:.6g},{r.result.verdict.value}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "shape": r.shape,
                "variant": r.variant,
                "kernel_ticks": r.result.kernel_ticks,
                "copy_ticks": r.result.copy_ticks,
                "ratio": r.result.ratio,
                "verdict": r.result.verdict.value,
            }
            for r in rows
        ]
        return json.dumps(payload, indent=2) + "\n"
    width = max(len(r.variant) for r in rows) + 2
    lines = [
        f"{'shape':<10}{'variant':<{width}}{'kernel_us':>12}{'copy_us':>10}"
        f"{'ratio':>8}  verdict"
    ]
    for r in rows:
        lines.append(
            f"{r.shape:<10}{r.variant:<{width}}{r.result.kernel_ticks / 1e3:>12.2f}"
            f"{r.result.copy_ticks / 1e3:>10.2f}{r.result.ratio:>8.2f}  {r.result.verdict.value}"
        )
    return "\n".join(lines) + "\n"
