"""Time the pure-numpy and compiled Hankel backends against each other.

Both backends are imported directly (ignoring POSSIO_PURE) so a single run
compares them on identical input.  The sample mixes all four evaluation
regions the way kernel assembly does: mostly small arguments with a tail of
large ones.

Usage:
    python3 benchmarks/bench_core.py [--size N] [--repeats R]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from possio._core import _purefun


def mixed_sample(size: int, seed: int = 20240817) -> np.ndarray:
    """Complex arguments spread over series/recurrence/bessel-K/asymptotic."""
    rng = np.random.default_rng(seed)
    moduli = np.concatenate(
        [
            rng.uniform(1e-3, 7.5, size=int(size * 0.55)),
            rng.uniform(8.0, 12.9, size=int(size * 0.2)),
            rng.uniform(13.0, 400.0, size=size - int(size * 0.55) - int(size * 0.2)),
        ]
    )
    phases = rng.uniform(0.0, np.pi / 2, size=moduli.shape[0])
    z = moduli * np.exp(1j * phases)
    rng.shuffle(z)
    return np.ascontiguousarray(z)


def time_backend(mod, z: np.ndarray, repeats: int) -> tuple[float, float]:
    h0 = np.empty_like(z)
    h1 = np.empty_like(z)
    branch = np.empty(z.shape, dtype=np.uint8)
    reg = np.empty_like(z)
    mod.hankel_pair(z, h0, h1, branch)  # warm up
    best_pair = min(
        _timed(lambda: mod.hankel_pair(z, h0, h1, branch)) for _ in range(repeats)
    )
    mod.h1reg(z, reg)
    best_reg = min(_timed(lambda: mod.h1reg(z, reg)) for _ in range(repeats))
    return best_pair, best_reg


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    try:
        from possio._core import _fastfun
    except ImportError:
        _fastfun = None

    z = mixed_sample(args.size)
    rows = [("pure", _purefun)]
    if _fastfun is not None:
        rows.append(("compiled", _fastfun))
    else:
        print("compiled backend not built; timing pure only")

    results = {}
    for name, mod in rows:
        pair_t, reg_t = time_backend(mod, z, args.repeats)
        results[name] = (pair_t, reg_t)
        print(
            f"{name:>8}:  hankel_pair {pair_t * 1e9 / args.size:9.1f} ns/pt"
            f"   h1reg {reg_t * 1e9 / args.size:9.1f} ns/pt"
        )

    if "compiled" in results:
        pp, pr = results["pure"]
        cp, cr = results["compiled"]
        print(f"{'speedup':>8}:  hankel_pair {pp / cp:8.2f}x     h1reg {pr / cr:8.2f}x")
        # agreement sanity check on the same sample
        h0p = np.empty_like(z); h1p = np.empty_like(z); bp = np.empty(z.shape, np.uint8)
        h0c = np.empty_like(z); h1c = np.empty_like(z); bc = np.empty(z.shape, np.uint8)
        _purefun.hankel_pair(z, h0p, h1p, bp)
        _fastfun.hankel_pair(z, h0c, h1c, bc)
        err = max(
            np.max(np.abs(h0p - h0c) / np.abs(h0p)),
            np.max(np.abs(h1p - h1c) / np.abs(h1p)),
        )
        print(f"max relative disagreement: {err:.3e}")


if __name__ == "__main__":
    main()
