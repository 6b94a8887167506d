"""Command line front end: config ingestion, pipeline orchestration,
verification suites, CSV emission.

Subcommands
-----------
solve        solve the chord equation over the configured transform points;
             writes one density CSV per point, a loads CSV, and a manifest
scan         sample the modified Fredholm determinant on a rectangle and
             locate its zeros; writes scan.csv and zeros.csv
verify       run the module property suites and report every residual
dump-kernel  tabulate the chord influence kernel at one transform point
field        evaluate the potential and acceleration potential at probes
loads        time-domain lift and moment only

Configuration is an INI file with sections [flow], [grid], [contour],
[downwash], [solve], [outputs], [field], [scan], [kernel], [verify].
Any single entry can be overridden on the command line with
``--section.key value``.  Environment: POSSIO_OUTPUT_DIR overrides the
output directory, POSSIO_WORKERS sets the parallel map width.

Exit codes: 0 success, 2 configuration problem, 3 characteristic value hit,
4 convergence gate failure, 1 verification suite failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import pathlib
import sys

import numpy as np

from . import cheb, field, fredholm, kernel, laplace, specfun
from .errors import (CharacteristicValueError, ConfigError, ConvergenceError,
                     DecayError, DomainError, GridMismatchError, PossioError)
from .flowconfig import derive_params

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_CHARACTERISTIC = 3
EXIT_CONVERGENCE = 4

RESIDUAL_TOL_DEFAULT = 1e-6    # collocation residual gate, relative to rhs
INVERSION_GATE_REL = 1e-4      # embedded coarse-rule agreement for inversions

_KNOWN_KEYS = {
    "flow": {"a", "M"},
    "grid": {"n"},
    "contour": {"sigma_prime", "nu_max", "d_nu"},
    "downwash": {"mode", "shape", "k", "rate", "file"},
    "solve": {"det_floor", "sigma_shift", "residual_tol", "check_inversion"},
    "outputs": {"directory", "times"},
    "field": {"points"},
    "scan": {"sigma_lo", "sigma_hi", "n_sigma", "nu_lo", "nu_hi", "n_nu",
             "flag_ratio", "refine"},
    "kernel": {"s", "n"},
    "verify": {"suites"},
}

_REQUIRED = object()


# ----------------------------------------------------------------- config ---


class RunConfig:
    """Raw section/key/value strings plus typed, validating accessors."""

    def __init__(self, sections: dict):
        self.sections = sections

    @classmethod
    def load(cls, path: str | None, overrides=()) -> "RunConfig":
        sections: dict = {}
        if path is not None:
            p = pathlib.Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {path}")
            parser = configparser.ConfigParser(
                interpolation=None, delimiters=("=",),
                inline_comment_prefixes=(";", "#"))
            parser.optionxform = str
            try:
                parser.read_string(p.read_text(encoding="utf-8"))
            except configparser.Error as exc:
                raise ConfigError(f"malformed config {path}: {exc}") from None
            sections = {s: dict(parser.items(s)) for s in parser.sections()}
        for dotted, value in overrides:
            if "." not in dotted:
                raise ConfigError(f"override must look like section.key: {dotted}")
            sec, key = dotted.split(".", 1)
            sections.setdefault(sec, {})[key] = value
        for sec, entries in sections.items():
            known = _KNOWN_KEYS.get(sec)
            if known is None:
                raise ConfigError(f"unknown config section [{sec}]")
            for key in entries:
                if key not in known:
                    raise ConfigError(f"unknown config key {sec}.{key}")
        return cls(sections)

    def has(self, section: str) -> bool:
        return section in self.sections

    def get(self, section: str, key: str, default=_REQUIRED) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            if default is _REQUIRED:
                raise ConfigError(f"missing config entry {section}.{key}") from None
            return default

    def _cast(self, section, key, default, conv, what):
        raw = self.get(section, key, default)
        if not isinstance(raw, str):
            return raw
        try:
            return conv(raw)
        except ValueError:
            raise ConfigError(
                f"config entry {section}.{key} is not {what}: {raw!r}") from None

    def getfloat(self, section, key, default=_REQUIRED) -> float:
        return self._cast(section, key, default, float, "a number")

    def getint(self, section, key, default=_REQUIRED) -> int:
        return self._cast(section, key, default, int, "an integer")

    def getcomplex(self, section, key, default=_REQUIRED) -> complex:
        return self._cast(section, key, default,
                          lambda t: complex(t.replace(" ", "")),
                          "a complex number")

    def getbool(self, section, key, default=_REQUIRED) -> bool:
        def conv(text):
            t = text.strip().lower()
            if t in ("1", "true", "yes", "on"):
                return True
            if t in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return self._cast(section, key, default, conv, "a boolean")

    def getfloats(self, section, key, default=_REQUIRED) -> list:
        return self._cast(section, key, default,
                          lambda t: [float(tok) for tok in t.split()],
                          "a list of numbers")


def _flow_params(cfg: RunConfig):
    return derive_params(cfg.getfloat("flow", "a"), cfg.getfloat("flow", "M"))


def _shape_callable(text: str):
    """'constant <c>' or 'poly <c0> <c1> ...' -> vectorized chord profile."""
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty downwash shape")
    kind, args = tokens[0], tokens[1:]
    try:
        coeffs = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"bad downwash shape coefficients: {text!r}") from None
    if kind == "constant":
        if len(coeffs) != 1:
            raise ConfigError("shape 'constant' takes exactly one value")
        return lambda x: np.full_like(np.asarray(x, dtype=float), coeffs[0])
    if kind == "poly":
        if not coeffs:
            raise ConfigError("shape 'poly' needs at least one coefficient")
        return lambda x: np.polynomial.polynomial.polyval(
            np.asarray(x, dtype=float), coeffs)
    raise ConfigError(f"unknown downwash shape kind: {kind!r}")


def _read_time_samples(path: str):
    p = pathlib.Path(path)
    if not p.is_file():
        raise ConfigError(f"time-sample file not found: {path}")
    with p.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "t":
            raise ConfigError(f"time-sample file {path} must start with a "
                              "'t,<x values...>' header")
        try:
            x_grid = np.array([float(tok) for tok in header[1:]])
        except ValueError:
            raise ConfigError(f"non-numeric x value in header of {path}") from None
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ConfigError(f"bad row in {path}: {exc}") from None
    if data.shape[1] != x_grid.size + 1:
        raise ConfigError(f"{path}: rows have {data.shape[1]} columns, "
                          f"expected {x_grid.size + 1}")
    return data[:, 0], x_grid, data[:, 1:]


def _downwash_spec(cfg: RunConfig, n: int) -> laplace.DownwashSpec:
    mode = cfg.get("downwash", "mode", "harmonic")
    shape = _shape_callable(cfg.get("downwash", "shape", "constant 1.0"))
    if mode == "harmonic":
        k = cfg.getfloat("downwash", "k", 0.0)
        grid = cheb.cheb_grid(n)
        w0 = cheb.bounded_function(grid, shape(grid.nodes).astype(complex))
        return laplace.harmonic_downwash(w0, k)
    if mode == "step":
        return laplace.step_downwash(shape)
    if mode == "decaying":
        return laplace.decaying_downwash(shape, cfg.getfloat("downwash", "rate"))
    if mode == "time_samples":
        t_grid, x_grid, samples = _read_time_samples(
            cfg.get("downwash", "file"))
        return laplace.time_sample_downwash(t_grid, x_grid, samples)
    raise ConfigError(f"unknown downwash mode: {mode!r}")


def _contour(cfg: RunConfig):
    if not cfg.has("contour"):
        return None
    return laplace.contour_grid(cfg.getfloat("contour", "sigma_prime"),
                                cfg.getfloat("contour", "nu_max"),
                                cfg.getfloat("contour", "d_nu"))


def _output_dir(cfg: RunConfig) -> pathlib.Path:
    env = os.environ.get("POSSIO_OUTPUT_DIR")
    out = env if env else cfg.get("outputs", "directory", "possio_out")
    path = pathlib.Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ------------------------------------------------------------- csv output ---


def _fmt(v) -> str:
    return format(float(v), ".16e")


def _fmtc(v) -> str:
    v = complex(v)
    return f"{v.real:.16e}{v.imag:+.16e}j"


def _write_csv(path: pathlib.Path, header, rows):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_manifest(path: pathlib.Path, payload: dict):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(json.dumps(_jsonable(payload), sort_keys=True, indent=2))
        fh.write("\n")


# -------------------------------------------------------------- pipelines ---


def _solve_configured_family(cfg: RunConfig):
    params = _flow_params(cfg)
    n = cfg.getint("grid", "n", 64)
    spec = _downwash_spec(cfg, n)
    contour = _contour(cfg)
    det_floor = cfg.getfloat("solve", "det_floor", fredholm.CHAR_FLOOR)
    sigma_shift = cfg.getfloat("solve", "sigma_shift",
                               laplace.SIGMA_SHIFT_DEFAULT)
    family = field.solve_family(params, spec, n, contour,
                                sigma_shift=sigma_shift, det_floor=det_floor)
    return params, spec, family, det_floor


def _family_gates(cfg: RunConfig, family, det_floor: float, spec) -> dict:
    rtol = cfg.getfloat("solve", "residual_tol", RESIDUAL_TOL_DEFAULT)
    worst = 0.0
    for d in family.diagnostics:
        worst = max(worst, d.residual_inf / max(d.rhs_scale, 1e-300))
    gates = {
        "characteristic_value": {
            "det_floor": det_floor,
            "min_abs_det2": min(d.abs_det2 for d in family.diagnostics),
            "passed": True,
        },
        "collocation_residual": {
            "tolerance": rtol,
            "worst_relative": worst,
            "passed": bool(worst < rtol),
        },
    }
    if spec.mode == laplace.TIME_SAMPLES:
        gates["time_sample_decay"] = {
            "epsilon": laplace.DECAY_RATIO,
            "passed": True,
        }
    if not gates["collocation_residual"]["passed"]:
        raise ConvergenceError(
            f"collocation residual {worst:.3e} exceeds {rtol:.1e}")
    return gates


def _family_manifest(cfg: RunConfig, command: str, family, gates: dict,
                     artifacts: dict) -> dict:
    params = family.params
    return {
        "command": command,
        "config": cfg.sections,
        "flow": {"a": params.a, "M": params.M, "U": params.U,
                 "c": params.c, "beta2": 1.0 - params.M**2},
        "points": list(family.points),
        "single_point": family.single,
        "gates": gates,
        "artifacts": artifacts,
        "diagnostics": [
            {"s": d.s, "residual_inf": d.residual_inf,
             "rhs_scale": d.rhs_scale, "abs_det2": d.abs_det2,
             "hs_norm": d.hs_norm}
            for d in family.diagnostics
        ],
    }


def _emit_density(outdir: pathlib.Path, family) -> list:
    names = []
    for i, p in enumerate(family.pressures):
        name = f"density_{i:04d}.csv"
        vals = p.point_values()
        rows = ([_fmt(x), _fmt(v.real), _fmt(v.imag)]
                for x, v in zip(p.grid.nodes, vals))
        _write_csv(outdir / name, ["xi", "Re p", "Im p"], rows)
        names.append(name)
    return names


def _emit_loads(outdir: pathlib.Path, cfg: RunConfig, family) -> tuple:
    times = np.asarray(cfg.getfloats("outputs", "times", [1.0]), dtype=float)
    check = cfg.getbool("solve", "check_inversion", True)
    lift, mom = field.compute_loads(family, times, check=check)
    lift = np.atleast_1d(np.asarray(lift))
    mom = np.atleast_1d(np.asarray(mom))
    rows = ([_fmt(t), _fmtc(lf), _fmtc(mm)]
            for t, lf, mm in zip(times, lift, mom))
    _write_csv(outdir / "loads.csv", ["t", "lift", "moment"], rows)
    gate = {"gate_rel": INVERSION_GATE_REL, "checked": check, "passed": True}
    return "loads.csv", gate


def cmd_solve(cfg: RunConfig) -> int:
    outdir = _output_dir(cfg)
    params, spec, family, det_floor = _solve_configured_family(cfg)
    gates = _family_gates(cfg, family, det_floor, spec)
    density_names = _emit_density(outdir, family)
    loads_name, inv_gate = _emit_loads(outdir, cfg, family)
    gates["inversion"] = inv_gate
    manifest = _family_manifest(cfg, "solve", family, gates,
                                {"density": density_names, "loads": loads_name})
    _write_manifest(outdir / "solve_manifest.json", manifest)
    print(f"solve: {len(density_names)} density file(s), {loads_name}, "
          f"solve_manifest.json in {outdir}")
    return EXIT_OK


def cmd_loads(cfg: RunConfig) -> int:
    outdir = _output_dir(cfg)
    params, spec, family, det_floor = _solve_configured_family(cfg)
    gates = _family_gates(cfg, family, det_floor, spec)
    loads_name, inv_gate = _emit_loads(outdir, cfg, family)
    gates["inversion"] = inv_gate
    manifest = _family_manifest(cfg, "loads", family, gates,
                                {"loads": loads_name})
    _write_manifest(outdir / "loads_manifest.json", manifest)
    print(f"loads: {loads_name}, loads_manifest.json in {outdir}")
    return EXIT_OK


def _parse_probes(text: str):
    probes = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ConfigError(f"field probe must be 'x,y,t': {chunk!r}")
        try:
            probes.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ConfigError(f"non-numeric field probe: {chunk!r}") from None
    if not probes:
        raise ConfigError("field.points lists no probes")
    return probes


def cmd_field(cfg: RunConfig) -> int:
    outdir = _output_dir(cfg)
    params, spec, family, det_floor = _solve_configured_family(cfg)
    gates = _family_gates(cfg, family, det_floor, spec)
    probes = _parse_probes(cfg.get("field", "points"))
    check = cfg.getbool("solve", "check_inversion", True)

    def eval_probe(probe):
        x, y, t = probe
        return field.evaluate_point(x, y, t, family, check=check)

    samples = field._map_points(eval_probe, probes, None)
    rows = ([_fmt(s.x), _fmt(s.y), _fmt(s.t),
             _fmt(s.phi.real), _fmt(s.phi.imag),
             _fmt(s.psi.real), _fmt(s.psi.imag)] for s in samples)
    _write_csv(outdir / "field.csv",
               ["x", "y", "t", "Re phi", "Im phi", "Re psi", "Im psi"], rows)
    gates["inversion"] = {"gate_rel": INVERSION_GATE_REL, "checked": check,
                          "passed": True}
    manifest = _family_manifest(cfg, "field", family, gates,
                                {"field": "field.csv"})
    manifest["probes"] = [list(p) for p in probes]
    _write_manifest(outdir / "field_manifest.json", manifest)
    print(f"field: {len(probes)} probe(s) -> field.csv, "
          f"field_manifest.json in {outdir}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    outdir = _output_dir(cfg)
    params = _flow_params(cfg)
    n = cfg.getint("grid", "n", 64)
    sigma = (cfg.getfloat("scan", "sigma_lo"), cfg.getfloat("scan", "sigma_hi"))
    nu = (cfg.getfloat("scan", "nu_lo"), cfg.getfloat("scan", "nu_hi"))
    n_sigma = cfg.getint("scan", "n_sigma")
    n_nu = cfg.getint("scan", "n_nu")
    if n_sigma < 1 or n_nu < 1:
        raise ConfigError("scan.n_sigma and scan.n_nu must be >= 1")
    flag_ratio = cfg.getfloat("scan", "flag_ratio", 1e-8)
    refine = cfg.getbool("scan", "refine", True)
    result = fredholm.scan_characteristic_values(
        params, sigma, nu, n_sigma, n_nu, n,
        flag_ratio=flag_ratio, refine=refine)

    def scan_rows():
        for ix, sg in enumerate(result.sigma_values):
            for iy, nv in enumerate(result.nu_values):
                d = result.det_values[iy, ix]
                yield [_fmt(sg), _fmt(nv), _fmt(d.real), _fmt(d.imag)]

    _write_csv(outdir / "scan.csv",
               ["sigma", "nu", "Re det2", "Im det2"], scan_rows())
    _write_csv(outdir / "zeros.csv", ["Re s", "Im s"],
               ([_fmt(z.real), _fmt(z.imag)] for z in result.zeros))
    manifest = {
        "command": "scan",
        "config": cfg.sections,
        "flow": {"a": params.a, "M": params.M, "U": params.U,
                 "c": params.c, "beta2": 1.0 - params.M**2},
        "gates": {
            "zero_flagging": {"flag_ratio": flag_ratio,
                              "flagged_samples": int(result.flagged.sum()),
                              "winding_cells": len(result.windings)},
        },
        "rows": n_sigma * n_nu,
        "zeros": list(result.zeros),
        "artifacts": {"scan": "scan.csv", "zeros": "zeros.csv"},
    }
    _write_manifest(outdir / "scan_manifest.json", manifest)
    print(f"scan: {n_sigma * n_nu} samples, {len(result.zeros)} zero(s) "
          f"-> scan.csv, zeros.csv in {outdir}")
    return EXIT_OK


def cmd_dump_kernel(cfg: RunConfig) -> int:
    outdir = _output_dir(cfg)
    params = _flow_params(cfg)
    s = cfg.getcomplex("kernel", "s")
    n = cfg.getint("kernel", "n", 24)
    if n < 2:
        raise ConfigError("kernel.n must be >= 2")
    engine = kernel.get_engine(s, params)
    nodes = cheb.cheb_grid(n).nodes

    def rows():
        for x in nodes:
            for xi in nodes:
                if x == xi:
                    continue
                v = complex(engine.full(x, xi).ravel()[0])
                yield [_fmt(x), _fmt(xi), _fmt(v.real), _fmt(v.imag)]

    _write_csv(outdir / "kernel.csv", ["x", "xi", "Re K", "Im K"], rows())
    co = kernel.kernel_constants(s, params)
    manifest = {
        "command": "dump-kernel",
        "config": cfg.sections,
        "s": complex(s),
        "constants": {"singular_coeff": co.singular_coeff,
                      "normalizer": co.normalizer},
        "rows": n * n - n,
        "artifacts": {"kernel": "kernel.csv"},
    }
    _write_manifest(outdir / "kernel_manifest.json", manifest)
    print(f"dump-kernel: {n * n - n} samples -> kernel.csv in {outdir}")
    return EXIT_OK


# ---------------------------------------------------------- verify suites ---


def _check(name, value, threshold, op="<"):
    value = float(value)
    passed = value < threshold if op == "<" else value >= threshold
    return {"name": name, "value": value, "threshold": threshold,
            "comparison": op, "passed": bool(passed)}


def _verify_specfun():
    checks = []
    worst = 0.0
    for r in np.geomspace(0.5, 50.0, 9):
        for th in (0.1, np.pi / 4, np.pi / 2):
            z = r * np.exp(1j * th)
            h = 1e-3 * max(1.0, abs(z)) ** 0.5
            h0 = specfun.hankel1_0(np.array([z - h, z, z + h]))
            d1 = (h0[2] - h0[0]) / (2 * h)
            d2 = (h0[2] - 2 * h0[1] + h0[0]) / h**2
            resid = abs(d2 + d1 / z + h0[1]) / max(abs(d2), abs(h0[1]))
            worst = max(worst, resid)
    checks.append(_check("hankel_ode_fd_residual", worst, 2e-5))
    worst = 0.0
    for x in np.geomspace(0.1, 50.0, 25):
        rec = specfun.bessel_eval(x)
        wr = rec.j1 * rec.y0 - rec.j0 * rec.y1
        exact = 2.0 / (np.pi * x)
        worst = max(worst, abs(wr - exact) / exact)
    checks.append(_check("wronskian_residual", worst, 1e-9))
    frozen = {
        1.0: (0.7651976865579666 + 0.08825696421567696j,
              0.4400505857449335 - 0.7812128213002887j),
        1j: (-0.26803248203398855j, -0.38318604387456484 + 0j),
    }
    worst = 0.0
    for z, (h0_ref, h1_ref) in frozen.items():
        worst = max(worst,
                    abs(specfun.hankel1_0(z) - h0_ref) / abs(h0_ref),
                    abs(specfun.hankel1_1(z) - h1_ref) / abs(h1_ref))
    checks.append(_check("frozen_value_agreement", worst, 1e-9))
    return checks


def _verify_hilbert():
    checks = []
    n = 128
    grid = cheb.cheb_grid(n)
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(4):
        c = np.zeros(n, dtype=complex)
        c[:65] = rng.normal(size=65) + 1j * rng.normal(size=65)
        g = cheb.bounded_function(grid, cheb.u_values(grid, c))
        back = cheb.finite_hilbert(cheb.inverse_finite_hilbert(g))
        worst = max(worst, np.abs(back.values - g.values).max()
                    / max(np.abs(g.values).max(), 1e-300))
    checks.append(_check("transform_right_inverse", worst, 1e-8))
    g20 = cheb.cheb_grid(20)
    f = cheb.bounded_function(g20, np.sin(g20.theta) * 2 * g20.nodes)
    pair = np.abs(cheb.finite_hilbert(f).values
                  - (1.0 - 2.0 * g20.nodes**2)).max()
    checks.append(_check("halfweight_pair_identity", pair, 1e-10))
    uni = cheb.inverse_sqrt_function(g20, np.ones(20))
    checks.append(_check("unit_cofactor_annihilation",
                         np.abs(cheb.finite_hilbert(uni).values).max(), 1e-12))
    return checks


def _verify_kernel():
    checks = []
    par = derive_params(2.0, 0.5)
    s = 1 + 1j
    kp = kernel.possio_kernel_full(0.3, -0.2, s, par)
    km = kernel.possio_kernel_full(0.3, -0.2, np.conj(s), par)
    checks.append(_check("schwarz_reflection", abs(km + np.conj(kp)) / abs(kp),
                         1e-12))
    co = kernel.kernel_constants(s, par)
    est = kernel.cauchy_coefficient_estimate(0.2, s, par)
    checks.append(_check("cauchy_strength", abs(est - co.singular_coeff)
                         / abs(co.singular_coeff), 1e-5))
    fit = kernel.logfit_regular(0.1, s, par, lo=1e-6, hi=1e-4)
    pred = kernel.predicted_log_coefficient(s, par)
    checks.append(_check("log_coefficient", abs(fit.log_coeff - pred)
                         / abs(pred), 1e-5))
    checks.append(_check("log_fit_residual", fit.residual_rms
                         / (abs(fit.log_coeff) + abs(fit.const_coeff)), 1e-3))
    return checks


def _verify_fredholm():
    checks = []
    par = derive_params(2.0, 0.5)
    op = fredholm.build_operator(1 + 1j, par, 32)
    zero = fredholm.build_operator(
        1 + 1j, par, 8, kernel_fn=lambda x, xi: np.zeros_like(xi))
    checks.append(_check("zero_operator_det", abs(zero.det2 - 1.0), 1e-15))
    scale = 0.3 / op.hs_norm
    small = fredholm.DiscretizedOperator(op.s, par, op.grid, op.gamma,
                                         scale * op.matrix, op.weights)
    series = fredholm.det2_series_terms(small, 24).sum()
    checks.append(_check("det_series_vs_matrix", abs(series - small.det2)
                         / abs(small.det2), 1e-6))
    terms = fredholm.det2_series_terms(op, 10)
    margin = 0.0
    for m, cm in enumerate(terms):
        bound = fredholm.det2_series_bound(op.hs_norm, m)
        margin = max(margin, abs(cm) - bound * (1 + 1e-12))
    checks.append(_check("series_term_bounds_exceedance", margin, 1e-30))
    res = fredholm.resolvent(op)
    eye = np.eye(op.n)
    ident = np.abs((eye - res.matrix) @ (eye + op.matrix) - eye).max()
    checks.append(_check("resolvent_identity", ident, 1e-8))
    lhs, rhs = fredholm.carleman_bound_sides(op)
    checks.append(_check("resolvent_kernel_bound_exceedance",
                         float((lhs - rhs).max()), 1e-30))
    return checks


def _verify_laplace():
    checks = []
    t = 1.0
    values = {}
    for sigma in (1.0, 1.5):
        grid = laplace.contour_grid(sigma, nu_max=1.6e5, d_nu=0.25)
        samples = 1.0 / (grid.points + 1.0)
        values[sigma] = laplace.bromwich_invert(grid, samples, t)
    exact = np.exp(-t)
    worst = max(abs(values[sig] - exact) / exact for sig in values)
    checks.append(_check("closed_form_pair", worst, 1e-4))
    checks.append(_check("abscissa_independence",
                         abs(values[1.0] - values[1.5]) / exact, 1e-4))
    t_grid = np.arange(0.0, 20.0, 1e-3)
    spec = laplace.time_sample_downwash(
        t_grid, np.array([-0.5, 0.5]),
        np.exp(-t_grid)[:, None] * np.ones((1, 2)))
    w = laplace.laplace_transform(spec, 1.0 + 0.5j, cheb.cheb_grid(8))
    ref = 1.0 / (2.0 + 0.5j)
    checks.append(_check("time_sample_transform",
                         abs(w.values[0] - ref) / abs(ref), 1e-5))
    return checks


def _verify_field():
    checks = []
    par = derive_params(2.0, 0.5)
    n = 16
    grid = cheb.cheb_grid(n)
    spec = laplace.harmonic_downwash(
        cheb.bounded_function(grid, np.ones(n)), 0.5)
    fam = field.solve_family(par, spec, n)
    rep = field.flow_tangency_residual(fam, spec, np.linspace(-0.8, 0.8, 5))
    checks.append(_check("flow_tangency_relative", rep.relative, 2e-3))
    checks.append(_check("psi_consistency",
                         field.psi_consistency_residual(fam, (0.3, 0.4, 1.0)),
                         1e-3))
    near = abs(field.evaluate_phi(0.3, 0.5, 1.0, fam).phi)
    far = abs(field.evaluate_phi(0.3, 10.0, 1.0, fam).phi)
    checks.append(_check("far_field_ratio", far / near, 0.1))
    kut = field.kutta_residual(fam)
    checks.append(_check("kutta_ratio", kut.ratio, kut.tolerance))
    pde = field.pde_residual(fam, par, [(0.5, 0.8, 1.0)], h=0.05, levels=3)
    checks.append(_check("pde_fd_decay_ratio", pde.ratios.min(), 3.0, op=">="))
    return checks


_SUITES = {
    "specfun": _verify_specfun,
    "hilbert": _verify_hilbert,
    "kernel": _verify_kernel,
    "fredholm": _verify_fredholm,
    "laplace": _verify_laplace,
    "field": _verify_field,
}


def cmd_verify(cfg: RunConfig, names) -> int:
    if not names:
        raw = cfg.get("verify", "suites", "all")
        names = raw.split()
    expanded = []
    for name in names:
        if name == "all":
            expanded.extend(_SUITES)
        elif name in _SUITES:
            expanded.append(name)
        else:
            raise ConfigError(f"unknown verify suite: {name!r}")
    seen = []
    for name in expanded:
        if name not in seen:
            seen.append(name)
    report = {"suites": {}, "all_passed": True}
    for name in seen:
        checks = _SUITES[name]()
        report["suites"][name] = checks
        for chk in checks:
            status = "PASS" if chk["passed"] else "FAIL"
            print(f"[{status}] {name}.{chk['name']} "
                  f"value={chk['value']:.3e} "
                  f"threshold{chk['comparison']}{chk['threshold']:.1e}")
            report["all_passed"] = report["all_passed"] and chk["passed"]
    outdir = _output_dir(cfg)
    _write_manifest(outdir / "verify_report.json", report)
    print(("all suites passed" if report["all_passed"]
           else "verification FAILED") + f" -> verify_report.json in {outdir}")
    return EXIT_OK if report["all_passed"] else EXIT_FAIL


# ------------------------------------------------------------- dispatcher ---


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _extract_overrides(tokens):
    """Pull ``--section.key value`` (or ``=value``) pairs out of argv.

    Dotted long options are config overrides; everything else is left for
    argparse.  Doing this first keeps nargs='*' positionals from eating
    override values."""
    cleaned, overrides = [], []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("--") and "." in tok.split("=", 1)[0]:
            body = tok[2:]
            if "=" in body:
                dotted, value = body.split("=", 1)
            else:
                if i + 1 >= len(tokens):
                    raise ConfigError(f"override {tok!r} is missing a value")
                dotted, value = body, tokens[i + 1]
                i += 1
            overrides.append((dotted, value))
        else:
            cleaned.append(tok)
        i += 1
    return cleaned, overrides


def _build_parser() -> _Parser:
    parser = _Parser(prog="possio", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "scan", "dump-kernel", "field", "loads"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the INI config file")
    v = sub.add_parser("verify")
    v.add_argument("suites", nargs="*", help="suite names (default: all)")
    v.add_argument("-c", "--config", default=None)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cleaned, overrides = _extract_overrides(argv)
        args = _build_parser().parse_args(cleaned)
        if args.command == "verify":
            cfg = RunConfig.load(args.config, overrides)
            return cmd_verify(cfg, list(args.suites))
        cfg = RunConfig.load(args.config, overrides)
        handler = {"solve": cmd_solve, "scan": cmd_scan,
                   "dump-kernel": cmd_dump_kernel, "field": cmd_field,
                   "loads": cmd_loads}[args.command]
        return handler(cfg)
    except (ConfigError, DomainError, GridMismatchError, DecayError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CharacteristicValueError as exc:
        print(f"error: characteristic-value: {exc}", file=sys.stderr)
        return EXIT_CHARACTERISTIC
    except ConvergenceError as exc:
        print(f"error: convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PossioError as exc:
        print(f"error: internal: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
