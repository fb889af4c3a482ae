"""Analytic coincidence and singles rates and the visibility law.

Rate conventions
----------------
Rates are normalized: dimensional prefactors that cancel in every ratio
(field normalization, detector efficiency, absolute pair production) are
dropped.  What is kept is exactly the parameter dependence:

  paired (true) coincidences:
      R_ent = 2*pi*Delta * (w_p/2c)^4 * (slit_len*b/(d1p*(d1+d2)))^2
              * cosh^2(xi) * sinh^2(xi) * fringe_pattern(rho2)
  accidental coincidences:
      R_acc = Delta^2 * T * (w_p/(2*pi*c*d1p))^2 * sinh^4(xi)
              * Integral_{|q|<=qA} |t~|^2 d^2q * pi*qB^2

Delta is the angular-frequency bandwidth [rad/s] of the light reaching the
detectors.  The dimensionless product that controls visibility is the
number of resolvable temporal modes in the coincidence window,
deltaT_product = Delta*T/(2*pi) (i.e. ordinary-frequency bandwidth times
window).  With that definition the fringe visibility is exactly

      V = A*cosh^2(xi) / (A*cosh^2(xi) + 2*B*deltaT_product*sinh^2(xi))

with A and B derived from geometry, aperture and filter acceptances alone
(derive_visibility_constants); no fitted constants anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ApproximationRegimeError, UsageError
from .optics import (
    C_LIGHT,
    DoubleSlitAperture,
    OpticalGeometry,
    aperture_power_disc_integral,
    paraxial_q_max,
    sinc,
)

# Enforced lower bound for the wide-band approximation Delta*T >> 1.
DELTA_T_MIN = 10.0


@dataclass(frozen=True)
class SourceSpec:
    """Squeeze parameter (dimensionless parametric gain) and angular
    bandwidth [rad/s] of the light reaching the detectors."""

    xi: float
    delta: float

    def __post_init__(self):
        if self.xi < 0.0:
            raise UsageError("SourceSpec.xi must be >= 0")
        if self.delta <= 0.0:
            raise UsageError("SourceSpec.delta must be positive")


@dataclass(frozen=True)
class DetectionSpec:
    """Coincidence window, scan-detector position and filter acceptances.

    qA_accept / qB_accept are radii of the hard-disc transverse-wavevector
    acceptance of the filters in the slit arm / scan arm [rad/m].
    """

    window_T: float
    rho2: tuple[float, float] = (0.0, 0.0)
    qA_accept: float = 250.0
    qB_accept: float = 250.0

    def __post_init__(self):
        if self.window_T <= 0.0:
            raise UsageError("DetectionSpec.window_T must be positive")
        if self.qA_accept <= 0.0 or self.qB_accept <= 0.0:
            raise UsageError("filter acceptances must be positive")


@dataclass(frozen=True)
class VisibilityConstants:
    """The two derived constants of the visibility law; strictly positive."""

    A_const: float
    B_const: float

    def __post_init__(self):
        if self.A_const <= 0.0 or self.B_const <= 0.0:
            raise UsageError("visibility constants must be strictly positive")


@dataclass
class ScanResult:
    """A sampled curve: abscissa values, one or more value columns and a
    configuration echo in meta."""

    abscissa: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.abscissa.shape[0]:
            raise UsageError("ScanResult columns must match the abscissa length")
        if not np.all(np.isfinite(self.values)):
            raise UsageError("ScanResult values must be finite")


def gain_factors(xi: float) -> tuple[float, float]:
    """(cosh^2, sinh^2) of the gain, with cosh^2 - sinh^2 = 1 exactly."""
    sh = math.sinh(xi)
    sh2 = sh * sh
    return 1.0 + sh2, sh2


def delta_from_bandwidth(delta_lambda: float, lam: float) -> float:
    """Angular-frequency bandwidth [rad/s] of a wavelength band delta_lambda
    centered at lam: 2*pi*c*delta_lambda/lam^2."""
    if delta_lambda <= 0.0 or lam <= 0.0:
        raise UsageError("bandwidth and wavelength must be positive")
    return 2.0 * math.pi * C_LIGHT * delta_lambda / (lam * lam)


def deltaT_product(delta: float, window_T: float) -> float:
    """Resolvable temporal modes in the window: Delta*T/(2*pi) = nu_bw*T."""
    return delta * window_T / (2.0 * math.pi)


def _require_wideband(delta: float, window_T: float) -> None:
    if delta * window_T < DELTA_T_MIN:
        raise ApproximationRegimeError(
            "wide-band approximation requires Delta*T >= "
            f"{DELTA_T_MIN:g}; got {delta * window_T:.3g}"
        )


def fringe_pattern(
    rho2: tuple[float, float], geom: OpticalGeometry, ap: DoubleSlitAperture
) -> float:
    """Normalized coincidence fringe Sinc^2 * Cos^2 * Sinc^2 (peak 1 at the
    axis); argument scale (w_p/2c)/(d1+d2) per meter of detector offset."""
    kappa = (geom.omega_p / (2.0 * C_LIGHT)) / geom.d_source_to_scan
    ux = kappa * rho2[0]
    uy = kappa * rho2[1]
    return float(
        sinc(ux * ap.b / 2.0) ** 2
        * math.cos(ux * ap.a / 2.0) ** 2
        * sinc(uy * ap.slit_len / 2.0) ** 2
    )


def entangled_rate(
    rho2: tuple[float, float],
    src: SourceSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
) -> float:
    """Coincidence rate of mutually paired photons at scan position rho2."""
    ch2, sh2 = gain_factors(src.xi)
    k_half = geom.omega_p / (2.0 * C_LIGHT)
    prefactor = (
        2.0
        * math.pi
        * src.delta
        * k_half**4
        * (ap.slit_len * ap.b / (geom.d1p * geom.d_source_to_scan)) ** 2
    )
    return prefactor * ch2 * sh2 * fringe_pattern(rho2, geom, ap)


def _check_acceptances(det: DetectionSpec, geom: OpticalGeometry) -> None:
    guard = paraxial_q_max(geom.omega_signal)
    if det.qA_accept > guard or det.qB_accept > guard:
        raise UsageError(
            f"filter acceptance exceeds the paraxial guard {guard:.6g} rad/m"
        )


def accidental_rate(
    src: SourceSpec,
    det: DetectionSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
) -> float:
    """Rate of coincidences between photons of different pairs; independent
    of the scan position."""
    _require_wideband(src.delta, det.window_T)
    _check_acceptances(det, geom)
    _, sh2 = gain_factors(src.xi)
    slit_arm = aperture_power_disc_integral(ap, det.qA_accept)
    scan_arm = math.pi * det.qB_accept**2  # plane waves: area of the accepted disc
    k_over = geom.omega_p / (2.0 * math.pi * C_LIGHT * geom.d1p)
    return src.delta**2 * det.window_T * k_over**2 * sh2 * sh2 * slit_arm * scan_arm


def total_rate(
    rho2: tuple[float, float],
    src: SourceSpec,
    det: DetectionSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
) -> float:
    """Total coincidence rate: paired + accidental."""
    return entangled_rate(rho2, src, geom, ap) + accidental_rate(src, det, geom, ap)


def derive_visibility_constants(
    geom: OpticalGeometry, ap: DoubleSlitAperture, det: DetectionSpec
) -> VisibilityConstants:
    """Constants of the visibility law from geometry, aperture and filters.

    A is the paired-rate prefactor at the fringe peak with the common
    2*pi*Delta and gain factors divided out; B is the accidental prefactor
    with Delta^2*T and sinh^4 divided out.  With these,
    visibility(xi, deltaT_product(Delta, T)) reproduces the scan-based
    (max-min)/(max+min) identically.
    """
    _check_acceptances(det, geom)
    k_half = geom.omega_p / (2.0 * C_LIGHT)
    a_const = k_half**4 * (ap.slit_len * ap.b / (geom.d1p * geom.d_source_to_scan)) ** 2
    slit_arm = aperture_power_disc_integral(ap, det.qA_accept)
    b_const = (
        (geom.omega_p / (2.0 * math.pi * C_LIGHT * geom.d1p)) ** 2
        * slit_arm
        * math.pi
        * det.qB_accept**2
    )
    return VisibilityConstants(A_const=a_const, B_const=b_const)


def visibility(xi: float, deltaT: float, consts: VisibilityConstants) -> float:
    """Fringe visibility A*ch^2 / (A*ch^2 + 2*B*deltaT*sh^2); deltaT is the
    resolvable-mode product deltaT_product(Delta, T) and must be >= 10/2pi
    in Delta*T terms, enforced as deltaT >= DELTA_T_MIN/(2*pi)."""
    if xi < 0.0:
        raise UsageError("gain must be >= 0")
    if 2.0 * math.pi * deltaT < DELTA_T_MIN:
        raise ApproximationRegimeError(
            "visibility law assumes the wide-band regime: need "
            f"Delta*T = 2*pi*deltaT >= {DELTA_T_MIN:g}, got {2.0 * math.pi * deltaT:.3g}"
        )
    ch2, sh2 = gain_factors(xi)
    num = consts.A_const * ch2
    return num / (num + 2.0 * consts.B_const * deltaT * sh2)


def visibility_curve(
    xi_grid: Sequence[float],
    sources: Sequence[SourceSpec],
    det: DetectionSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
) -> ScanResult:
    """Visibility vs gain, one column per source bandwidth variant."""
    xi_arr = np.asarray(list(xi_grid), dtype=float)
    if xi_arr.size == 0:
        raise UsageError("gain grid must be nonempty")
    if np.any(np.diff(xi_arr) < 0.0):
        raise UsageError("gain grid must be sorted ascending")
    consts = derive_visibility_constants(geom, ap, det)
    cols = []
    labels = []
    for src in sources:
        p = deltaT_product(src.delta, det.window_T)
        cols.append([visibility(x, p, consts) for x in xi_arr])
        labels.append(f"delta={src.delta:.6g}rad/s")
    values = np.column_stack(cols)
    return ScanResult(
        abscissa=xi_arr,
        values=values,
        meta={
            "columns": labels,
            "A_const": consts.A_const,
            "B_const": consts.B_const,
            "window_T": det.window_T,
        },
    )


def singles_rate_a(
    qA_accept: float,
    src: SourceSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
) -> float:
    """Singles rate in the slit arm (detector fixed on axis): proportional
    to sinh^2 * Delta * Integral_{|q|<=qA} |t~|^2 (scale constant 1)."""
    if qA_accept <= 0.0 or qA_accept > paraxial_q_max(geom.omega_signal):
        raise UsageError("qA_accept must be positive and inside the paraxial guard")
    _, sh2 = gain_factors(src.xi)
    return src.delta * sh2 * aperture_power_disc_integral(ap, qA_accept)


def singles_rate_b(
    rho2: tuple[float, float], src: SourceSpec, det: DetectionSpec
) -> float:
    """Singles rate in the scan arm: flat in rho2 (uniform illumination);
    proportional to sinh^2 * Delta * accepted q-disc area."""
    _, sh2 = gain_factors(src.xi)
    return src.delta * sh2 * math.pi * det.qB_accept**2


def singles_fringe_visible(detection_angle: float, lambda_p: float, a: float) -> bool:
    """Whether the slit-arm singles pattern is resolvable: the detection
    angle must stay below 2*lambda_p/a."""
    if detection_angle <= 0.0 or lambda_p <= 0.0 or a <= 0.0:
        raise UsageError("angle, wavelength and slit separation must be positive")
    return detection_angle < 2.0 * lambda_p / a
