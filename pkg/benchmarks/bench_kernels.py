#!/usr/bin/env python3
"""Benchmark the compiled sampling/LCS kernels against their uncompiled
Python sources.

The package publishes one set of kernel names; with numba available they
are jitted, otherwise (or under TITLEGEN_NO_NUMBA=1) they are the plain
functions. This script times both callables on identical workloads and
reports per-call latency and speedup. Run once normally and once with
TITLEGEN_NO_NUMBA=1 to confirm the fallback path is the same code.

Usage:
    python3 benchmarks/bench_kernels.py [--vocab 500] [--calls 200]
"""

import argparse
import timeit

import numpy as np

from titlegen import _kernels


def make_distributions(rng, vocab, n):
    dists = []
    for _ in range(n):
        probs = rng.random(vocab) + 1e-4
        probs[rng.random(vocab) < 0.4] = 0.0
        if probs.sum() == 0.0:
            probs[0] = 1.0
        dists.append(probs / probs.sum())
    return dists


def per_call_seconds(fn, calls, number, repeats):
    def run():
        for args in calls:
            fn(*args)

    best = min(timeit.repeat(run, number=number, repeat=repeats))
    return best / (number * len(calls))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--vocab", type=int, default=500, help="distribution size")
    parser.add_argument("--calls", type=int, default=200, help="workload size per kernel")
    parser.add_argument("--seq-len", type=int, default=48, help="LCS sequence length")
    parser.add_argument("--number", type=int, default=20, help="timeit inner loops")
    parser.add_argument("--repeats", type=int, default=5, help="timeit repeats")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    dists = make_distributions(rng, args.vocab, args.calls)
    us = rng.random(args.calls)
    betas = rng.uniform(0.2, 1.0, args.calls)
    temps = rng.uniform(0.5, 2.0, args.calls)
    seqs = [
        (
            rng.integers(0, 30, args.seq_len).astype(np.int64),
            rng.integers(0, 30, args.seq_len).astype(np.int64),
        )
        for _ in range(args.calls)
    ]

    workloads = [
        (
            "apply_temperature",
            _kernels.apply_temperature_kernel,
            _kernels._apply_temperature_impl,
            [(d, float(t)) for d, t in zip(dists, temps)],
        ),
        (
            "nucleus_filter",
            _kernels.nucleus_filter_kernel,
            _kernels._nucleus_filter_impl,
            [(d, float(b)) for d, b in zip(dists, betas)],
        ),
        (
            "sample_token",
            _kernels.sample_token_kernel,
            _kernels._sample_token_impl,
            [(d, float(u)) for d, u in zip(dists, us)],
        ),
        (
            "sample_step (fused)",
            _kernels.sample_step_kernel,
            _kernels._sample_step_impl,
            [(d, float(b), float(t), float(u)) for d, b, t, u in zip(dists, betas, temps, us)],
        ),
        (
            "lcs_length",
            _kernels.lcs_length_kernel,
            _kernels._lcs_length_impl,
            seqs,
        ),
    ]

    print(f"active backend: {_kernels.BACKEND}")
    if _kernels.BACKEND == "numpy":
        print("(kernels are the uncompiled functions; both columns time the same code)")
    print(
        f"vocab={args.vocab} calls={args.calls} seq_len={args.seq_len} "
        f"number={args.number} repeats={args.repeats}"
    )
    print()
    header = f"{'kernel':<22} {'compiled us/call':>17} {'python us/call':>15} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, compiled, impl, calls in workloads:
        for case in calls[:2]:  # warm any jit compilation outside the clock
            compiled(*case)
        fast = per_call_seconds(compiled, calls, args.number, args.repeats)
        slow = per_call_seconds(impl, calls, max(1, args.number // 4), args.repeats)
        print(f"{name:<22} {fast * 1e6:>17.2f} {slow * 1e6:>15.2f} {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
