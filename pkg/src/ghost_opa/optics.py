"""Apertures, Fresnel kernels and the propagation Green's functions.

Conventions
-----------
* Transform: t~(q) = Integral d^2rho t(rho) exp(-i q.rho)  (plain integral,
  no 2pi normalization).  Floating (2pi) powers that would appear under
  other conventions are collected into FOURIER_CONVENTION_CONSTANT, which
  equals exactly 1.0 under this convention.  Every shipped observable is a
  ratio or a normalized pattern, so results do not depend on this choice.
* Quadratic phase: psi(u, s) = exp(i*s*u^2/2).  Propagation over distance d
  at angular frequency w uses s = w/(c*d) in transverse position and
  s = -(c/w)*d in transverse wavevector.
* Dimensional field prefactors (hbar*w/2*eps0*V and detector efficiencies)
  are dropped from stored amplitudes; kernels keep their geometric
  1/distance and w/c factors.

All functions are pure; inputs are immutable dataclasses safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quadrature
from .errors import UsageError

C_LIGHT = 299792458.0  # m/s, exact

# Collected floating (2pi) factor of the transform convention; exactly 1
# for the plain-integral transform used here.
FOURIER_CONVENTION_CONSTANT = 1.0

# Small-angle guard: transverse wavevectors above this fraction of w/c are
# rejected, keeping paraxial phase errors below the percent level.
PARAXIAL_FRACTION = 0.1

FRESNEL = "fresnel"
FRAUNHOFER = "fraunhofer"


@dataclass(frozen=True)
class OpticalGeometry:
    """Arm distances and pump frequency; fixes every propagator.

    d1: source plane to slit plane [m]
    d1p: slit plane to the fixed detector behind the slit [m]
    d2: source plane to the scanning detector plane [m]
    lambda_p: pump wavelength [m]; omega_p is derived unless supplied,
    in which case it must match 2*pi*c/lambda_p to 1e-12 relative.
    """

    d1: float
    d1p: float
    d2: float
    lambda_p: float
    omega_p: float | None = None

    def __post_init__(self):
        for name in ("d1", "d1p", "d2", "lambda_p"):
            if getattr(self, name) <= 0.0:
                raise UsageError(f"OpticalGeometry.{name} must be strictly positive")
        derived = 2.0 * math.pi * C_LIGHT / self.lambda_p
        if self.omega_p is None:
            object.__setattr__(self, "omega_p", derived)
        elif abs(self.omega_p - derived) > 1e-12 * derived:
            raise UsageError(
                "omega_p inconsistent with lambda_p: "
                f"{self.omega_p!r} vs 2*pi*c/lambda_p = {derived!r}"
            )

    @property
    def omega_signal(self) -> float:
        """Degenerate signal/idler angular frequency, omega_p / 2."""
        return self.omega_p / 2.0

    @property
    def d_source_to_scan(self) -> float:
        """Effective source-to-fringe distance d1 + d2."""
        return self.d1 + self.d2


@dataclass(frozen=True)
class DoubleSlitAperture:
    """Two slits of width b whose centers are separated by a; slit_len is
    the slit extent along y."""

    a: float
    b: float
    slit_len: float

    def __post_init__(self):
        if not (self.a > self.b > 0.0):
            raise UsageError("DoubleSlitAperture requires a > b > 0 (non-overlapping slits)")
        if self.slit_len <= 0.0:
            raise UsageError("DoubleSlitAperture.slit_len must be positive")

    @property
    def open_area(self) -> float:
        return 2.0 * self.b * self.slit_len


@dataclass(frozen=True)
class TransverseWavevector:
    """Wavevector component parallel to the source output face [rad/m]."""

    qx: float
    qy: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.qx, self.qy)


def paraxial_q_max(omega: float) -> float:
    return PARAXIAL_FRACTION * omega / C_LIGHT


def check_paraxial(q: TransverseWavevector, omega: float) -> None:
    limit = paraxial_q_max(omega)
    if q.magnitude > limit:
        raise UsageError(
            f"|q| = {q.magnitude:.6g} rad/m exceeds paraxial guard "
            f"{limit:.6g} rad/m at omega = {omega:.6g} rad/s"
        )


def _ensure_finite(z: complex) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ArithmeticError("propagator amplitude is not finite")
    return z


def sinc(u):
    """sin(u)/u with sinc(0) = 1 (unnormalized convention)."""
    return np.sinc(np.asarray(u) / np.pi)


def aperture_transmission(ap: DoubleSlitAperture, x, y):
    """Binary transmission of the double slit; edges (measure zero) are 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    in_slit_x = (np.abs(x - ap.a / 2.0) < ap.b / 2.0) | (np.abs(x + ap.a / 2.0) < ap.b / 2.0)
    in_y = np.abs(y) < ap.slit_len / 2.0
    out = np.where(in_slit_x & in_y, 1.0, 0.0)
    return float(out) if out.ndim == 0 else out


def aperture_ft(ap: DoubleSlitAperture, q: TransverseWavevector) -> float:
    """Closed-form transform of the double slit (real and even in q):
    2*b*slit_len * sinc(qx*b/2) * cos(qx*a/2) * sinc(qy*slit_len/2)."""
    val = (
        2.0
        * ap.b
        * ap.slit_len
        * sinc(q.qx * ap.b / 2.0)
        * math.cos(q.qx * ap.a / 2.0)
        * sinc(q.qy * ap.slit_len / 2.0)
    )
    return float(val)


def fresnel_kernel(omega: float, rho: tuple[float, float], d: float) -> complex:
    """Paraxial point-spread kernel over distance d (units 1/m^2):
    (-i*omega/(2*pi*c)) * exp(i(omega/c)d)/d * exp(i(omega/(2cd))|rho|^2)."""
    if d <= 0.0:
        raise UsageError("propagation distance must be positive")
    k = omega / C_LIGHT
    rho2 = rho[0] * rho[0] + rho[1] * rho[1]
    amp = -1j * omega / (2.0 * math.pi * C_LIGHT * d)
    return _ensure_finite(amp * np.exp(1j * (k * d + k * rho2 / (2.0 * d))))


def _slit_intervals(ap: DoubleSlitAperture):
    return (
        (-ap.a / 2.0 - ap.b / 2.0, -ap.a / 2.0 + ap.b / 2.0),
        (ap.a / 2.0 - ap.b / 2.0, ap.a / 2.0 + ap.b / 2.0),
    )


def _aperture_quadratic_phase_integral(
    ap: DoubleSlitAperture,
    s_curv: float,
    lin_x: float,
    lin_y: float,
    rel_tol: float,
) -> complex:
    """Integral d^2rho t(rho) exp(i*s_curv*|rho|^2/2) exp(i(lin_x*x + lin_y*y)).

    Separable for the rectangular double slit: the x factor runs over both
    slit intervals, the y factor over the slit length.
    """
    x_edge = ap.a / 2.0 + ap.b / 2.0
    rate_x = abs(s_curv) * x_edge + abs(lin_x)
    rate_y = abs(s_curv) * ap.slit_len / 2.0 + abs(lin_y)

    def fx(x: np.ndarray) -> np.ndarray:
        return np.exp(1j * (0.5 * s_curv * x * x + lin_x * x))

    def fy(y: np.ndarray) -> np.ndarray:
        return np.exp(1j * (0.5 * s_curv * y * y + lin_y * y))

    ix = 0.0 + 0.0j
    for lo, hi in _slit_intervals(ap):
        ix += quadrature.integrate(
            fx, lo, hi, rel_tol=0.5 * rel_tol, max_phase_rate=rate_x
        )
    iy = quadrature.integrate(
        fy,
        -ap.slit_len / 2.0,
        ap.slit_len / 2.0,
        rel_tol=0.5 * rel_tol,
        max_phase_rate=rate_y,
    )
    return ix * iy


def green_a(
    omega: float,
    q: TransverseWavevector,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
    regime: str = FRAUNHOFER,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
) -> complex:
    """Green's function of the slit arm, detector fixed on axis behind the
    slit.

    Far-field regime drops all quadratic phases:
        (-i*omega/(2*pi*c)) * exp(i(omega/c)(d1+d1p))/d1p * t~(-q)
    (times FOURIER_CONVENTION_CONSTANT).  The near-field regime evaluates
    the slit-plane integral with the quadratic phase of the slit-detector
    distance d1p and multiplies the wavevector-space quadratic phase of d1.
    """
    check_paraxial(q, omega)
    k = omega / C_LIGHT
    pref = (
        -1j
        * omega
        / (2.0 * math.pi * C_LIGHT)
        * np.exp(1j * k * (geom.d1 + geom.d1p))
        / geom.d1p
    )
    if regime == FRAUNHOFER:
        mirrored = TransverseWavevector(-q.qx, -q.qy)
        return _ensure_finite(pref * aperture_ft(ap, mirrored) * FOURIER_CONVENTION_CONSTANT)
    if regime != FRESNEL:
        raise UsageError(f"unknown propagation regime: {regime!r}")
    s_curv = k / geom.d1p
    slit_integral = _aperture_quadratic_phase_integral(ap, s_curv, q.qx, q.qy, rel_tol)
    q_phase = np.exp(-1j * 0.5 * (geom.d1 / k) * q.magnitude**2)
    return _ensure_finite(pref * slit_integral * q_phase)


def green_b(
    omega: float,
    q: TransverseWavevector,
    rho2: tuple[float, float],
    d2: float,
) -> complex:
    """Free propagation of one plane-wave mode to the scanning detector;
    always unit modulus."""
    if d2 <= 0.0:
        raise UsageError("propagation distance must be positive")
    check_paraxial(q, omega)
    k = omega / C_LIGHT
    phase = k * d2 + q.qx * rho2[0] + q.qy * rho2[1] - 0.5 * (d2 / k) * q.magnitude**2
    return _ensure_finite(np.exp(1j * phase))


def combined_propagator(
    omega: float,
    rho2: tuple[float, float],
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
    regime: str = FRAUNHOFER,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
) -> complex:
    """Mode-summed two-arm propagator Integral d^2q g_A(-q) g_B(q).

    Far field:
        -(omega/c)^2 * exp(i(omega/c)(d1+d1p+d2)) / (d1p*(d1+d2))
          * t~((omega/c) * rho2 / (d1+d2))
    times FOURIER_CONVENTION_CONSTANT.  Near field: the same prefactor
    times the detector-plane quadratic phase and the slit-plane integral
    with curvature (omega/c)(1/d1p + 1/(d1+d2)) and linear phase
    -(omega/c) rho2 . rho_a / (d1+d2).
    """
    k = omega / C_LIGHT
    dd = geom.d_source_to_scan
    kappa = k / dd  # rho2 -> fringe wavevector mapping
    q_star = kappa * math.hypot(rho2[0], rho2[1])
    if q_star > paraxial_q_max(omega):
        raise UsageError(
            f"detector offset {math.hypot(rho2[0], rho2[1]):.6g} m maps to "
            f"|q| beyond the paraxial guard at this geometry"
        )
    common = (
        -((omega / C_LIGHT) ** 2)
        * np.exp(1j * k * (geom.d1 + geom.d1p + geom.d2))
        / (geom.d1p * dd)
    )
    if regime == FRAUNHOFER:
        q_eff = TransverseWavevector(kappa * rho2[0], kappa * rho2[1])
        return _ensure_finite(common * aperture_ft(ap, q_eff) * FOURIER_CONVENTION_CONSTANT)
    if regime != FRESNEL:
        raise UsageError(f"unknown propagation regime: {regime!r}")
    s_eff = k * (1.0 / geom.d1p + 1.0 / dd)
    slit_integral = _aperture_quadratic_phase_integral(
        ap, s_eff, -kappa * rho2[0], -kappa * rho2[1], rel_tol
    )
    det_phase = np.exp(1j * 0.5 * kappa * (rho2[0] ** 2 + rho2[1] ** 2))
    return _ensure_finite(common * det_phase * slit_integral)


def _power_x(ap: DoubleSlitAperture, qx: np.ndarray) -> np.ndarray:
    """|x factor of t~|^2 = (2 b sinc(qx b/2) cos(qx a/2))^2."""
    return (2.0 * ap.b * sinc(qx * ap.b / 2.0) * np.cos(qx * ap.a / 2.0)) ** 2


def _power_y(ap: DoubleSlitAperture, qy: np.ndarray) -> np.ndarray:
    """|y factor of t~|^2 = (slit_len sinc(qy slit_len/2))^2."""
    return (ap.slit_len * sinc(qy * ap.slit_len / 2.0)) ** 2


class _CumulativeIntegralTable:
    """Prefix integrals of a smooth 1D function on [0, hi].

    Fixed panels no wider than an eighth period of the fastest oscillation,
    31-node Gauss-Legendre each (machine precision on such panels), with
    vectorized partial-panel queries for arbitrary upper limits.
    """

    _NODES, _WEIGHTS = np.polynomial.legendre.leggauss(31)

    def __init__(self, f, hi: float, max_phase_rate: float):
        n = 1
        if max_phase_rate > 0.0:
            n = max(1, int(np.ceil(hi * max_phase_rate / (np.pi / 4.0))))
        n = min(n, 2_000_000)
        self.f = f
        self.edges = np.linspace(0.0, hi, n + 1)
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        halves = 0.5 * np.diff(self.edges)
        pts = mids[:, None] + halves[:, None] * self._NODES[None, :]
        vals = f(pts.ravel()).reshape(pts.shape)
        panel_sums = (vals * self._WEIGHTS[None, :]).sum(axis=1) * halves
        self.prefix = np.concatenate([[0.0], np.cumsum(panel_sums)])

    def upto(self, y: np.ndarray) -> np.ndarray:
        """Vectorized integral of f from 0 to each y (y within [0, hi])."""
        y = np.clip(np.asarray(y, dtype=float), 0.0, self.edges[-1])
        idx = np.clip(np.searchsorted(self.edges, y, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[idx]
        mids = 0.5 * (lo + y)
        halves = 0.5 * (y - lo)
        pts = mids[:, None] + halves[:, None] * self._NODES[None, :]
        vals = self.f(pts.ravel()).reshape(pts.shape)
        partial = (vals * self._WEIGHTS[None, :]).sum(axis=1) * halves
        return self.prefix[idx] + partial


@lru_cache(maxsize=64)
def aperture_power_disc_integral(
    ap: DoubleSlitAperture, q_radius: float, rel_tol: float = 1e-7
) -> float:
    """Integral of |t~(q)|^2 over the disc |q| <= q_radius [m^2].

    Separable integrand over a circular domain: an adaptive pass over qx
    against a cumulative table of the qy factor, whose limit follows the
    circle.
    """
    if q_radius <= 0.0:
        raise UsageError("acceptance radius must be positive")
    rate_x = ap.a + ap.b  # fastest trig frequency of the squared x factor
    table = _CumulativeIntegralTable(
        lambda qy: _power_y(ap, qy), q_radius, ap.slit_len
    )

    def outer(qx: np.ndarray) -> np.ndarray:
        y_half = np.sqrt(np.maximum(q_radius * q_radius - qx * qx, 0.0))
        return _power_x(ap, qx) * 2.0 * table.upto(y_half) + 0.0j

    val = quadrature.integrate(
        outer, -q_radius, q_radius, rel_tol=0.5 * rel_tol, max_phase_rate=rate_x
    )
    return float(val.real)


def aperture_power_rect_integral(
    ap: DoubleSlitAperture,
    qx_max: float,
    qy_max: float,
    rel_tol: float = 1e-8,
) -> float:
    """Integral of |t~(q)|^2 over the rectangle |qx|<=qx_max, |qy|<=qy_max."""
    ix = quadrature.integrate(
        lambda qx: _power_x(ap, qx) + 0.0j,
        -qx_max,
        qx_max,
        rel_tol=0.5 * rel_tol,
        max_phase_rate=ap.a + ap.b,
    )
    iy = quadrature.integrate(
        lambda qy: _power_y(ap, qy) + 0.0j,
        -qy_max,
        qy_max,
        rel_tol=0.5 * rel_tol,
        max_phase_rate=ap.slit_len,
    )
    return float(ix.real * iy.real)
