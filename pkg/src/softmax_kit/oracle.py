"""Extended-precision reference computations used to judge the kernels.

Everything here deliberately avoids the package's own kernels: softmax is
recomputed in float64 with numpy reductions, the exponential oracle is the
platform double-precision ``exp``, and the compensated sum is a classic
Kahan accumulation.  Tests freeze values produced by these oracles and
compare kernel output against them.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError

__all__ = [
    "softmax_oracle",
    "exp_oracle",
    "kahan_sum",
    "max_rel_err",
    "max_rowsum_dev",
]


def softmax_oracle(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax in float64 over a 2-D array (any float dtype in)."""
    z = np.asarray(x, dtype=np.float64)
    if z.ndim != 2:
        raise ArgumentError(f"softmax_oracle expects 2-D input, got ndim={z.ndim}")
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def exp_oracle(x: np.ndarray) -> np.ndarray:
    """Double-precision elementwise exponential."""
    return np.exp(np.asarray(x, dtype=np.float64))


def kahan_sum(a: np.ndarray) -> float:
    """Compensated (Kahan) summation in double precision."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(a, dtype=np.float64):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def max_rel_err(got: np.ndarray, ref: np.ndarray) -> float:
    """Largest elementwise ``|got - ref| / |ref|``; inf if ``got`` is non-finite.

    ``ref`` is expected to be a strictly positive oracle output.
    """
    got64 = np.asarray(got, dtype=np.float64)
    ref64 = np.asarray(ref, dtype=np.float64)
    if not np.isfinite(got64).all():
        return float("inf")
    return float(np.max(np.abs(got64 - ref64) / np.abs(ref64)))


def max_rowsum_dev(got: np.ndarray) -> float:
    """Largest ``|row sum - 1|`` over a 2-D probability array."""
    got64 = np.asarray(got, dtype=np.float64)
    if not np.isfinite(got64).all():
        return float("inf")
    return float(np.max(np.abs(got64.sum(axis=1) - 1.0)))
