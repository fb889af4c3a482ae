"""Tests of apertures, kernels and propagators."""

import math

import numpy as np
import pytest

from ghost_opa.errors import UsageError
from ghost_opa.optics import (
    C_LIGHT,
    FRAUNHOFER,
    FRESNEL,
    DoubleSlitAperture,
    OpticalGeometry,
    TransverseWavevector,
    aperture_ft,
    aperture_power_disc_integral,
    aperture_power_rect_integral,
    aperture_transmission,
    combined_propagator,
    fresnel_kernel,
    green_a,
    green_b,
    paraxial_q_max,
)

GEOM = OpticalGeometry(d1=0.3, d1p=1.0, d2=1.5, lambda_p=351e-9)
AP = DoubleSlitAperture(a=0.4e-3, b=0.165e-3, slit_len=10e-3)
W_S = GEOM.omega_signal  # degenerate signal frequency


# ------------------------------------------------------------ domain types


def test_geometry_requires_positive_distances():
    with pytest.raises(UsageError):
        OpticalGeometry(d1=0.0, d1p=1.0, d2=1.5, lambda_p=351e-9)
    with pytest.raises(UsageError):
        OpticalGeometry(d1=0.3, d1p=-1.0, d2=1.5, lambda_p=351e-9)


def test_geometry_omega_consistency():
    w = 2.0 * math.pi * C_LIGHT / 351e-9
    ok = OpticalGeometry(d1=0.3, d1p=1.0, d2=1.5, lambda_p=351e-9, omega_p=w)
    assert ok.omega_p == pytest.approx(w, rel=1e-15)
    with pytest.raises(UsageError):
        OpticalGeometry(d1=0.3, d1p=1.0, d2=1.5, lambda_p=351e-9, omega_p=w * (1 + 1e-9))


def test_aperture_invariants():
    with pytest.raises(UsageError):
        DoubleSlitAperture(a=0.1e-3, b=0.165e-3, slit_len=1e-2)  # overlapping slits
    with pytest.raises(UsageError):
        DoubleSlitAperture(a=0.4e-3, b=0.165e-3, slit_len=0.0)


# ------------------------------------------------------------ transmission


def test_transmission_reference_points():
    assert aperture_transmission(AP, 0.0, 0.0) == 0.0  # opaque center strip
    assert aperture_transmission(AP, 0.2e-3, 0.0) == 1.0  # slit center
    assert aperture_transmission(AP, 5e-3, 0.0) == 0.0  # outside both slits


def test_transmission_boundaries_are_closed_out():
    # dyadic sizes make the slit-edge arithmetic exact in binary floats
    ap = DoubleSlitAperture(a=2.0**-11, b=2.0**-12, slit_len=2.0**-6)
    edge_x = ap.a / 2 + ap.b / 2
    inner_x = ap.a / 2 - ap.b / 2
    assert aperture_transmission(ap, edge_x, 0.0) == 0.0
    assert aperture_transmission(ap, inner_x, 0.0) == 0.0
    assert aperture_transmission(ap, ap.a / 2, ap.slit_len / 2) == 0.0
    assert aperture_transmission(ap, ap.a / 2, 0.0) == 1.0


def test_transmission_vectorized():
    x = np.array([0.0, 0.2e-3, -0.2e-3, 5e-3])
    y = np.zeros_like(x)
    assert np.array_equal(aperture_transmission(AP, x, y), [0.0, 1.0, 1.0, 0.0])


# -------------------------------------------------------------- transform


def test_aperture_ft_dc_is_open_area():
    assert aperture_ft(AP, TransverseWavevector(0.0, 0.0)) == pytest.approx(
        AP.open_area, rel=1e-15
    )


def test_aperture_ft_zeros():
    assert aperture_ft(AP, TransverseWavevector(math.pi / AP.a, 0.0)) == pytest.approx(
        0.0, abs=1e-20
    )
    assert aperture_ft(AP, TransverseWavevector(2 * math.pi / AP.b, 0.0)) == pytest.approx(
        0.0, abs=1e-20
    )


def _piecewise_gl(f, lo, hi, rate):
    """Independent fixed-partition Gauss-Legendre oracle (16 nodes per
    quarter period of the fastest phase)."""
    n_panels = max(1, int(np.ceil((hi - lo) * max(rate, 1.0) / (np.pi / 2))))
    nodes, weights = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(lo, hi, n_panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halves = 0.5 * np.diff(edges)
    pts = mids[:, None] + halves[:, None] * nodes[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return np.sum(vals * weights[None, :] * halves[:, None])


def _direct_ft_oracle(ap, qx, qy):
    iy = _piecewise_gl(
        lambda y: np.exp(-1j * qy * y), -ap.slit_len / 2, ap.slit_len / 2, abs(qy)
    )
    ix = 0.0 + 0.0j
    for lo, hi in (
        (-ap.a / 2 - ap.b / 2, -ap.a / 2 + ap.b / 2),
        (ap.a / 2 - ap.b / 2, ap.a / 2 + ap.b / 2),
    ):
        ix += _piecewise_gl(lambda x: np.exp(-1j * qx * x), lo, hi, abs(qx))
    return ix * iy


def test_aperture_ft_matches_direct_integral_at_random_q():
    rng = np.random.default_rng(20240817)
    guard = paraxial_q_max(W_S)
    dc = AP.open_area
    for _ in range(50):
        r = guard * math.sqrt(rng.uniform())
        th = rng.uniform(0.0, 2.0 * math.pi)
        q = TransverseWavevector(r * math.cos(th), r * math.sin(th))
        closed = aperture_ft(AP, q)
        direct = _direct_ft_oracle(AP, q.qx, q.qy)
        assert abs(direct.imag) <= 1e-9 * dc  # transform of an even aperture is real
        scale = max(abs(closed), 1e-3 * dc)
        assert abs(direct.real - closed) / scale <= 1e-6


# ----------------------------------------------------------------- kernel


def test_fresnel_kernel_modulus_and_phase():
    w, d = W_S, 0.7
    h0 = fresnel_kernel(w, (0.0, 0.0), d)
    assert abs(h0) == pytest.approx(w / (2 * math.pi * C_LIGHT * d), rel=1e-12)
    rx = 1.3e-3
    h1 = fresnel_kernel(w, (rx, 0.0), d)
    dphase = np.angle(h1 / h0)
    expected = (w / (2 * C_LIGHT * d)) * rx * rx
    # the common optical phase k*d is millions of radians; its argument
    # reduction leaves ~1e-8 rad of noise in the ratio
    assert dphase == pytest.approx(math.remainder(expected, 2 * math.pi), abs=1e-7)


def test_fresnel_kernel_curvature_scaling():
    # doubling both frequency and distance keeps the quadratic curvature
    w, d, rx = W_S, 0.5, 0.9e-3
    c1 = np.angle(fresnel_kernel(w, (rx, 0.0), d) / fresnel_kernel(w, (0.0, 0.0), d))
    c2 = np.angle(
        fresnel_kernel(2 * w, (rx, 0.0), 2 * d) / fresnel_kernel(2 * w, (0.0, 0.0), 2 * d)
    )
    assert c1 == pytest.approx(c2, abs=1e-7)


def test_fresnel_kernel_rejects_nonpositive_distance():
    with pytest.raises(UsageError):
        fresnel_kernel(W_S, (0.0, 0.0), 0.0)


# ------------------------------------------------------------------ arm B


@pytest.mark.parametrize(
    "q,rho2",
    [
        ((0.0, 0.0), (0.0, 0.0)),
        ((1e4, -3e3), (2e-3, 1e-3)),
        ((-8e4, 5e4), (-4e-3, 0.0)),
    ],
)
def test_green_b_unit_modulus(q, rho2):
    val = green_b(W_S, TransverseWavevector(*q), rho2, GEOM.d2)
    assert abs(val) == pytest.approx(1.0, abs=5e-16)


def test_green_b_axial_value_and_plane_wave_phase():
    k = W_S / C_LIGHT
    v0 = green_b(W_S, TransverseWavevector(0.0, 0.0), (0.0, 0.0), GEOM.d2)
    assert v0 == pytest.approx(np.exp(1j * k * GEOM.d2), abs=1e-12)
    q = TransverseWavevector(2.0e4, -1.0e4)
    rho2 = (1.5e-3, 2.5e-3)
    shift = np.angle(
        green_b(W_S, q, rho2, GEOM.d2) / green_b(W_S, q, (0.0, 0.0), GEOM.d2)
    )
    expected = q.qx * rho2[0] + q.qy * rho2[1]
    assert shift == pytest.approx(math.remainder(expected, 2 * math.pi), abs=1e-9)


# ------------------------------------------------------------------ arm A


def test_green_a_far_field_zero_propagates():
    val = green_a(W_S, TransverseWavevector(math.pi / AP.a, 0.0), GEOM, AP, FRAUNHOFER)
    dc = green_a(W_S, TransverseWavevector(0.0, 0.0), GEOM, AP, FRAUNHOFER)
    assert abs(val) / abs(dc) <= 1e-15


def test_green_a_far_field_modulus_squared_consistency():
    q = TransverseWavevector(4.0e3, 1.0e3)
    got = abs(green_a(W_S, q, GEOM, AP, FRAUNHOFER)) ** 2
    expected = (W_S / (2 * math.pi * C_LIGHT * GEOM.d1p)) ** 2 * aperture_ft(AP, q) ** 2
    assert got == pytest.approx(expected, rel=1e-12)


def test_green_a_paraxial_guard():
    with pytest.raises(UsageError):
        green_a(W_S, TransverseWavevector(0.2 * W_S / C_LIGHT, 0.0), GEOM, AP)


def test_green_a_near_field_matches_far_field_for_short_slit():
    # reference distances and slit spacing, slit length short enough that
    # every quadratic phase stays small
    ap_short = DoubleSlitAperture(a=AP.a, b=AP.b, slit_len=0.5e-3)
    q0 = TransverseWavevector(0.0, 0.0)
    near = abs(green_a(W_S, q0, GEOM, ap_short, FRESNEL))
    far = abs(green_a(W_S, q0, GEOM, ap_short, FRAUNHOFER))
    assert abs(near - far) / far < 0.05


def test_green_a_unknown_regime():
    with pytest.raises(UsageError):
        green_a(W_S, TransverseWavevector(0.0, 0.0), GEOM, AP, "geometric")


# ------------------------------------------------------- combined propagator


def test_combined_far_field_peak_value():
    val = abs(combined_propagator(W_S, (0.0, 0.0), GEOM, AP, FRAUNHOFER))
    k = W_S / C_LIGHT
    expected = k * k / (GEOM.d1p * GEOM.d_source_to_scan) * AP.open_area
    assert val == pytest.approx(expected, rel=1e-12)


def test_combined_far_field_null_positions():
    # nulls at odd multiples of lambda_s*(d1+d2)/(2a)
    lam_s = 2 * GEOM.lambda_p
    first = lam_s * GEOM.d_source_to_scan / (2 * AP.a)
    peak = abs(combined_propagator(W_S, (0.0, 0.0), GEOM, AP, FRAUNHOFER))
    for k_idx in (0, 1):
        x = (2 * k_idx + 1) * first
        val = abs(combined_propagator(W_S, (x, 0.0), GEOM, AP, FRAUNHOFER))
        assert val / peak < 1e-12


def test_combined_far_field_even_in_rho2():
    for x, y in ((1.1e-3, 0.0), (2.7e-3, 0.4e-3)):
        plus = abs(combined_propagator(W_S, (x, y), GEOM, AP, FRAUNHOFER))
        minus_x = abs(combined_propagator(W_S, (-x, y), GEOM, AP, FRAUNHOFER))
        minus_y = abs(combined_propagator(W_S, (x, -y), GEOM, AP, FRAUNHOFER))
        assert plus == pytest.approx(minus_x, rel=1e-12)
        assert plus == pytest.approx(minus_y, rel=1e-12)


def test_combined_near_field_matches_far_field_when_truly_far():
    # scale all distances so every quadratic phase collapses; short slit
    geom_far = OpticalGeometry(d1=60.0, d1p=200.0, d2=300.0, lambda_p=GEOM.lambda_p)
    ap_short = DoubleSlitAperture(a=AP.a, b=AP.b, slit_len=0.5e-3)
    w = geom_far.omega_signal
    peak = abs(combined_propagator(w, (0.0, 0.0), geom_far, ap_short, FRAUNHOFER))
    for x in (0.0, 0.1, 0.2, 0.3159):
        near = abs(combined_propagator(w, (x, 0.0), geom_far, ap_short, FRESNEL))
        far = abs(combined_propagator(w, (x, 0.0), geom_far, ap_short, FRAUNHOFER))
        assert abs(near - far) / peak < 5e-4


def test_combined_paraxial_guard_on_detector_offset():
    with pytest.raises(UsageError):
        combined_propagator(W_S, (0.5, 0.0), GEOM, AP, FRAUNHOFER)


# ---------------------------------------------------------------- parseval


def test_parseval_extended_domain():
    val = aperture_power_rect_integral(
        AP, 1000 * math.pi / AP.b, 1000 * math.pi / AP.slit_len
    ) / (2 * math.pi) ** 2
    assert abs(val / AP.open_area - 1.0) < 1e-3


def test_parseval_narrow_domain_truncation_bias_is_pinned():
    # the |qx| <= 40*pi/b, |qy| <= 40*pi/slit_len window misses about 0.5%
    # of the power per axis (the squared-sinc tails fall off as 1/q^2);
    # regression-pin that known bias
    val = aperture_power_rect_integral(
        AP, 40 * math.pi / AP.b, 40 * math.pi / AP.slit_len
    ) / (2 * math.pi) ** 2
    ratio = val / AP.open_area
    assert ratio == pytest.approx(0.98989, abs=5e-4)


# ------------------------------------------------------------ disc integral


def test_disc_integral_small_radius_limit():
    q_r = 5.0  # q_r * slit_len / 2 = 0.025 rad: transform is flat to ~2e-4
    val = aperture_power_disc_integral(AP, q_r)
    expected = AP.open_area**2 * math.pi * q_r**2
    assert val == pytest.approx(expected, rel=1e-3)


def test_disc_integral_monotone_in_radius():
    vals = [aperture_power_disc_integral(AP, r) for r in (100.0, 300.0, 1000.0, 5000.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_disc_integral_rejects_bad_radius():
    with pytest.raises(UsageError):
        aperture_power_disc_integral(AP, 0.0)
