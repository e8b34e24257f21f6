"""Numeric kernels for the per-step sampling transform and LCS length.

These sit in the innermost loops (one call per generated token per
candidate, and one DP per candidate pair in ROUGE-L). Each kernel is
written as a plain numpy/loop function that numba's nopython mode can
compile directly. When numba is importable and ``TITLEGEN_NO_NUMBA`` is
unset, the public names are the jitted versions; otherwise they are the
very same Python functions, so both backends execute identical source.
Kernels built from elementary arithmetic (nucleus filter, token draw,
LCS) give bit-identical results either way; temperature scaling goes
through exp/log, where a compiled libm may round the last bit
differently.

``BACKEND`` reports which path is active. The ``*_impl`` names always
refer to the uncompiled functions (the benchmark uses them).
"""

from __future__ import annotations

import os

import numpy as np

#: Slack when comparing cumulative mass against the nucleus threshold.
#: Guards against float ties: a prefix whose exact mass equals beta must
#: not be rejected because the running sum landed a few ulps below it.
_BETA_SLACK = 1e-12


def _apply_temperature_impl(probs: np.ndarray, temperature: float) -> np.ndarray:
    out = probs.copy()
    if temperature == 1.0:
        return out
    # Work in log space, shifted by the max for stability.
    best = 0.0
    for i in range(out.shape[0]):
        if out[i] > best:
            best = out[i]
    if best <= 0.0:
        return out
    logmax = np.log(best)
    total = 0.0
    for i in range(out.shape[0]):
        if out[i] > 0.0:
            out[i] = np.exp((np.log(out[i]) - logmax) / temperature)
            total += out[i]
        else:
            out[i] = 0.0
    for i in range(out.shape[0]):
        out[i] /= total
    return out


def _nucleus_filter_impl(probs: np.ndarray, beta: float) -> np.ndarray:
    n = probs.shape[0]
    if beta >= 1.0:
        return probs.copy()
    # Stable sort on negated values: descending probability, ties broken
    # by ascending token index.
    order = np.argsort(-probs, kind="mergesort")
    cut = n - 1
    csum = 0.0
    for r in range(n):
        csum += probs[order[r]]
        if csum >= beta - _BETA_SLACK:
            cut = r
            break
    mass = 0.0
    for r in range(cut + 1):
        mass += probs[order[r]]
    out = np.zeros(n, dtype=np.float64)
    for r in range(cut + 1):
        i = order[r]
        out[i] = probs[i] / mass
    return out


def _sample_token_impl(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw over ascending token index; ``u`` in [0, 1)."""
    acc = 0.0
    last = -1
    for i in range(probs.shape[0]):
        p = probs[i]
        if p > 0.0:
            acc += p
            last = i
            if acc > u:
                return i
    # Rounding can leave acc fractionally below 1; fall back to the
    # last positive entry.
    return last


def _sample_step_impl(probs: np.ndarray, beta: float, temperature: float, u: float) -> int:
    """Fused temperature -> nucleus -> inverse-CDF step.

    Composed from the three kernels above so a fused call makes exactly
    the decisions of the composed public ops.
    """
    scaled = _apply_temperature_impl(probs, temperature)
    kept = _nucleus_filter_impl(scaled, beta)
    return _sample_token_impl(kept, u)


def _lcs_length_impl(a: np.ndarray, b: np.ndarray) -> int:
    """Length of the longest common subsequence of two int sequences."""
    n = a.shape[0]
    m = b.shape[0]
    prev = np.zeros(m + 1, dtype=np.int64)
    curr = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        for j in range(m):
            if a[i] == b[j]:
                curr[j + 1] = prev[j] + 1
            elif prev[j + 1] >= curr[j]:
                curr[j + 1] = prev[j + 1]
            else:
                curr[j + 1] = curr[j]
        prev, curr = curr, prev
    return int(prev[m])


def _build():
    if os.environ.get("TITLEGEN_NO_NUMBA"):
        return "numpy", (
            _apply_temperature_impl,
            _nucleus_filter_impl,
            _sample_token_impl,
            _sample_step_impl,
            _lcs_length_impl,
        )
    try:
        from numba import njit
    except ImportError:
        return "numpy", (
            _apply_temperature_impl,
            _nucleus_filter_impl,
            _sample_token_impl,
            _sample_step_impl,
            _lcs_length_impl,
        )
    apply_t = njit(cache=True)(_apply_temperature_impl)
    nucleus = njit(cache=True)(_nucleus_filter_impl)
    sample = njit(cache=True)(_sample_token_impl)

    # Rebuild the fused step on top of the jitted pieces so the whole
    # chain runs compiled without boxing intermediates.
    def _sample_step_jit(probs, beta, temperature, u):
        scaled = apply_t(probs, temperature)
        kept = nucleus(scaled, beta)
        return sample(kept, u)

    step = njit(cache=True)(_sample_step_jit)
    lcs = njit(cache=True)(_lcs_length_impl)
    return "numba", (apply_t, nucleus, sample, step, lcs)


BACKEND, _fns = _build()
(
    apply_temperature_kernel,
    nucleus_filter_kernel,
    sample_token_kernel,
    sample_step_kernel,
    lcs_length_kernel,
) = _fns
