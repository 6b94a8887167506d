"""Kernel construction: singular split, tail table, doublet fields, residual probes.

Reference values were produced with mpmath at 30 significant digits, building
the kernel bracket directly from mpmath.hankel1 and mpmath.quad with the
upstream tail truncated at exp(-45).
"""
import numpy as np
import pytest

from possio.errors import DomainError
from possio.flowconfig import derive_params
from possio import kernel as K

PAR_M05 = derive_params(2.0, 0.5)
PAR_M08 = derive_params(2.0, 0.8)

# frozen mpmath references: (params, s) -> {(x, xi): kern, "G": G(0.35)}
FROZEN_KERNEL = {
    (PAR_M05, 1 + 1j): {
        (0.3, -0.2): 0.692098866253614 + 0.7516978398147758j,
        (-0.6, 0.55): -0.06286802733010227 - 0.033031007375186945j,
        (0.9, 0.88): -1.267385392158309 + 26.224272247047637j,
        "G": -0.4518783098789305 - 0.9996670418087602j,
    },
    (PAR_M08, 2 + 0.5j): {
        (0.3, -0.2): 0.0532906488749188 + 0.10673134131007178j,
        (-0.6, 0.55): -0.0011428890139534903 - 0.0008983144527123307j,
        (0.9, 0.88): -0.16707976184599727 + 8.396453706267554j,
        "G": -0.07740708665911694 - 0.6373468278523274j,
    },
}

# mpmath.quad of the upstream integrating factor against the doublet field
FROZEN_PHI = -0.3084104514779034 - 0.46877119787205407j   # x=.3 y=.4 xi=0 s=1+1j M=.5
FROZEN_PSI = -0.1250318266298754 - 0.8471695777230762j    # same point


def test_full_kernel_frozen_values():
    for (par, s), vals in FROZEN_KERNEL.items():
        for key, ref in vals.items():
            if key == "G":
                continue
            got = K.possio_kernel_full(key[0], key[1], s, par)
            assert got == pytest.approx(ref, rel=1e-12)


def test_tail_table_frozen_value():
    for (par, s), vals in FROZEN_KERNEL.items():
        got = complex(K.get_engine(s, par).g_values(0.35)[0])
        assert got == pytest.approx(vals["G"], rel=1e-12)


def test_split_identity_is_exact():
    # full == q/d + regular holds to near-rounding (limited only by the
    # consistency of the two small-argument series), not to quadrature
    # accuracy: the two routes share every term except the reconstructed pole
    eng = K.get_engine(1 + 1j, PAR_M05)
    q = eng.co.singular_coeff
    for d in (0.3, -0.45, 1.2, -0.002, 1e-5):
        x, xi = 0.1, 0.1 - d
        full = eng.full(x, xi).ravel()[0]
        reg = eng.regular(x, xi).ravel()[0]
        assert abs(full - (q / d + reg)) < 1e-11 * abs(full)


def test_cauchy_strength_matches_analytic():
    for par, s in [(PAR_M05, 1 + 1j), (PAR_M08, 2 + 0.5j),
                   (derive_params(2.0, 0.3), 0.5 + 3j)]:
        q = K.kernel_constants(s, par).singular_coeff
        est = K.cauchy_coefficient_estimate(0.2, s, par)
        assert abs(est - q) < 5e-6 * abs(q)


def test_singular_coefficient_value():
    # q = 2i(1-M^2)/(pi U), purely imaginary with positive imaginary part
    co = K.kernel_constants(1 + 1j, PAR_M05)
    beta2 = 1 - 0.5**2
    assert co.singular_coeff == pytest.approx(2j * beta2 / (np.pi * PAR_M05.U), rel=1e-15)
    assert co.singular_coeff.real == 0.0
    assert co.singular_coeff.imag > 0.0


def test_normalizer_inverts_singular_strength():
    for par, s in [(PAR_M05, 1 + 1j), (PAR_M08, 3 + 0.25j)]:
        co = K.kernel_constants(s, par)
        assert co.normalizer * (-np.pi * co.singular_coeff) == pytest.approx(1.0, abs=1e-15)


def test_regular_part_log_fit():
    fit = K.logfit_regular(0.1, 1 + 1j, PAR_M05, lo=1e-6, hi=1e-4)
    pred = K.predicted_log_coefficient(1 + 1j, PAR_M05)
    assert abs(fit.log_coeff - pred) < 1e-6 * abs(pred)
    assert fit.residual_rms < 1e-3 * (abs(fit.log_coeff) + abs(fit.const_coeff))


def test_log_strength_same_on_both_sides():
    # fitting each side separately must give the same leading coefficient
    eng = K.get_engine(1 + 1j, PAR_M05)
    deltas = np.geomspace(1e-8, 1e-6, 12)
    design = np.column_stack([np.log(deltas), np.ones_like(deltas)])
    a_minus, *_ = np.linalg.lstsq(design, eng.regular(0.1, 0.1 - deltas), rcond=None)
    a_plus, *_ = np.linalg.lstsq(design, eng.regular(0.1, 0.1 + deltas), rcond=None)
    assert abs(a_minus[0] - a_plus[0]) < 1e-5 * abs(a_plus[0])


def test_odd_part_beyond_pole_stays_bounded():
    eng = K.get_engine(1 + 1j, PAR_M05)
    q = eng.co.singular_coeff
    bound = 0.0
    for d in np.geomspace(1e-5, 1e-2, 9):
        rest = eng.full(0.1, 0.1 - d) - eng.full(0.1, 0.1 + d) - 2 * q / d
        bound = max(bound, abs(rest.ravel()[0]))
    assert bound < 1.0          # while |kern| itself reaches ~3e4


def test_regular_growth_in_s_is_subquadratic():
    d = np.concatenate([-np.geomspace(1e-3, 1.9, 40), np.geomspace(1e-3, 1.9, 40)])
    sups = []
    for mag in (1.0, 2.0, 4.0, 8.0):
        s = mag * np.exp(0.3j)
        eng = K.get_engine(complex(s), PAR_M05)
        sups.append(np.abs(eng.regular(0.05, 0.05 - d)).max())
    expn = np.log(np.array(sups[1:]) / np.array(sups[:-1])) / np.log(2.0)
    assert expn.max() <= 2.3


def test_schwarz_reflection_of_kernel():
    for x, xi in [(0.3, -0.2), (-0.7, 0.64)]:
        kp = K.possio_kernel_full(x, xi, 1 + 1j, PAR_M05)
        km = K.possio_kernel_full(x, xi, 1 - 1j, PAR_M05)
        assert abs(km + np.conj(kp)) < 1e-13 * abs(kp)


def test_diagonal_and_half_plane_rejections():
    with pytest.raises(DomainError):
        K.possio_kernel_full(0.3, 0.3, 1 + 1j, PAR_M05)
    with pytest.raises(DomainError):
        K.KernelEngine(-0.5 + 1j, PAR_M05)
    with pytest.raises(DomainError):
        K.kernel_split(0.2, 0.2 + 1e-9, 1 + 1j, PAR_M05)


def test_kernel_split_record():
    ev = K.kernel_split(0.3, -0.2, 1 + 1j, PAR_M05)
    assert ev.full == ev.singular_coeff / (ev.x - ev.xi) + ev.regular
    ref = FROZEN_KERNEL[(PAR_M05, 1 + 1j)][(0.3, -0.2)]
    assert ev.full == pytest.approx(ref, rel=1e-12)


def test_engine_cache_and_vector_eval():
    e1 = K.get_engine(1 + 1j, PAR_M05)
    e2 = K.get_engine(1 + 1j, PAR_M05)
    assert e1 is e2
    xi = np.array([-0.5, 0.0, 0.25])
    out = K.possio_kernel_full(0.7, xi, 1 + 1j, PAR_M05)
    assert out.shape == xi.shape
    for j, v in enumerate(xi):
        assert out[j] == pytest.approx(K.possio_kernel_full(0.7, v, 1 + 1j, PAR_M05), rel=1e-14)


# ------------------------------------------------------------- doublets ---


def test_doublet_psi_frozen_value():
    got = K.doublet_psi(0.3, 0.4, 0.0, 1 + 1j, PAR_M05)
    assert got == pytest.approx(FROZEN_PSI, rel=1e-13)
    assert isinstance(got, complex)


def test_doublet_psi_vanishes_on_axis():
    # exact zeros, not small numbers: the factor y multiplies everything
    assert K.doublet_psi(0.5, 0.0, -0.2, 1 + 1j, PAR_M05) == 0.0
    out = K.doublet_psi(np.linspace(-0.9, 0.9, 5), 0.0, 0.95, 1 + 1j, PAR_M05)
    assert np.all(out == 0.0)


def test_doublet_psi_source_singularity():
    with pytest.raises(DomainError):
        K.doublet_psi(0.2, 0.0, 0.2, 1 + 1j, PAR_M05)


def test_doublet_potential_frozen_value():
    got = K.doublet_potential(0.3, 0.4, 0.0, 1 + 1j, PAR_M05)
    assert got == pytest.approx(FROZEN_PHI, rel=1e-12)


def test_doublet_potential_solves_transport_ode():
    # U phi_x + s(1+cU) phi = psi, phi_x by central differences
    def resid(x, y, s, h):
        pp = K.doublet_potential(x + h, y, 0.0, s, PAR_M05)
        pm = K.doublet_potential(x - h, y, 0.0, s, PAR_M05)
        p0 = K.doublet_potential(x, y, 0.0, s, PAR_M05)
        psi = K.doublet_psi(x, y, 0.0, s, PAR_M05)
        lhs = PAR_M05.U * (pp - pm) / (2 * h) + s * (1 + PAR_M05.c * PAR_M05.U) * p0
        return abs(lhs - psi) / abs(psi)

    assert resid(0.3, 0.4, 1 + 1j, 1e-3) < 2e-5
    assert resid(-0.5, 0.05, 1 + 1j, 1e-3) < 2e-5
    assert resid(0.2, 0.0125, 1 + 1j, 2e-4) < 2e-5


def test_doublet_potential_axis_behavior():
    # upstream of the doublet the integrand vanishes identically
    assert K.doublet_potential(-0.5, 0.0, 0.0, 1 + 1j, PAR_M05) == 0.0
    with pytest.raises(DomainError):
        K.doublet_potential(0.5, 0.0, 0.0, 1 + 1j, PAR_M05)


def test_doublet_potential_tail_truncation_converged():
    p1 = K.doublet_potential(0.3, 0.4, 0.0, 1 + 1j, PAR_M05, tail_factor=1.0)
    p2 = K.doublet_potential(0.3, 0.4, 0.0, 1 + 1j, PAR_M05, tail_factor=2.0)
    assert abs(p1 - p2) < 1e-9 * abs(p1)


# --------------------------------------------------------------- probes ---


def test_streamwise_integration_by_parts():
    assert K.streamwise_parts_residual(0.2, -0.4, 0.4, 1 + 0.5j, PAR_M05) < 1e-10
    assert K.streamwise_parts_residual(-0.3, 0.5, 0.25, 2 + 1j, PAR_M08) < 1e-10


def test_reduced_wave_equation_second_order():
    res = [K.reduced_wave_residual(0.3, 0.7, 0.0, 1 + 1j, PAR_M05, h)
           for h in (0.02, 0.01, 0.005)]
    assert res[0] / res[1] > 3.0 and res[1] / res[2] > 3.0
    assert res[2] < 5e-5


def test_convected_wave_equation_second_order():
    res = [K.convected_wave_residual_doublet(0.3, 0.7, 0.5, 0.0, 1 + 1j, PAR_M05, h)
           for h in (0.02, 0.01, 0.005)]
    assert res[0] / res[1] > 3.0 and res[1] / res[2] > 3.0
    assert res[2] < 5e-4
