"""Compiled backend vs numpy backend: exact branch and value agreement."""
import os
import subprocess
import sys

import numpy as np
import pytest

from possio._core import _purefun

try:
    from possio._core import _fastfun
except ImportError:
    _fastfun = None

needs_ext = pytest.mark.skipif(_fastfun is None,
                               reason="compiled extension not built")


def sample_points():
    rng = np.random.default_rng(7)
    mod = np.concatenate([
        np.geomspace(1e-6, 0.4, 8),
        np.linspace(0.6, 7.9, 10),
        np.linspace(8.0, 12.9, 10),      # recurrence/bessel_k annulus
        np.geomspace(13.0, 1e4, 10),
    ])
    phase = np.array([0.0, 0.2, np.pi / 4, np.pi / 2, 0.85 * np.pi])
    z = (mod[:, None] * np.exp(1j * phase[None, :])).ravel()
    z += 1e-3j * rng.random(z.size)   # keep off exact branch seams
    return np.ascontiguousarray(z)


def run_both(fn_name, z):
    outs = []
    for mod in (_purefun, _fastfun):
        if fn_name == "hankel_pair":
            h0 = np.empty(z.shape, dtype=complex)
            h1 = np.empty(z.shape, dtype=complex)
            br = np.empty(z.shape, dtype=np.uint8)
            mod.hankel_pair(z, h0, h1, br)
            outs.append((h0, h1, br))
        else:
            out = np.empty(z.shape, dtype=complex)
            mod.h1reg(z, out)
            outs.append(out)
    return outs


@needs_ext
def test_hankel_pair_parity():
    z = sample_points()
    (h0p, h1p, brp), (h0c, h1c, brc) = run_both("hankel_pair", z)
    assert np.array_equal(brp, brc)
    # near the outer series radius the sums lose ~3 digits to
    # cancellation, so different accumulation orders land ~1e-13 apart
    assert np.allclose(h0c, h0p, rtol=1e-12, atol=1e-300)
    assert np.allclose(h1c, h1p, rtol=1e-12, atol=1e-300)


@needs_ext
def test_h1reg_parity():
    z = sample_points()
    rp, rc = run_both("h1reg", z)
    assert np.allclose(rc, rp, rtol=1e-12, atol=1e-300)


@needs_ext
def test_backend_names():
    assert _purefun.BACKEND_NAME == "pure"
    assert _fastfun.BACKEND_NAME == "compiled"


def test_pure_env_forces_fallback():
    env = dict(os.environ, POSSIO_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "import possio._core as c; print(c.BACKEND_NAME)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "pure"


@needs_ext
def test_kernel_value_backend_independent():
    # one full influence-kernel value end to end under each backend
    code = (
        "from possio.kernel import possio_kernel_full\n"
        "from possio.flowconfig import derive_params\n"
        "v = possio_kernel_full(0.3, -0.2, 1 + 1j, derive_params(2.0, 0.5))\n"
        "print(repr(complex(v)))\n"
    )
    vals = {}
    for pure in ("0", "1"):
        env = dict(os.environ, POSSIO_PURE=pure)
        out = subprocess.run([sys.executable, "-c", code],
                             capture_output=True, text=True, env=env,
                             check=True)
        vals[pure] = complex(out.stdout.strip())
    assert abs(vals["0"] - vals["1"]) < 1e-12 * abs(vals["1"])
