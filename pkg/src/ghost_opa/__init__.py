"""Desk-scale simulation of coincidence-count double-slit interference from
a multimode parametric source: analytic rates and visibility, photon
statistics, and a Monte Carlo coincidence validator."""

__version__ = "0.1.0"

from .optics import (  # noqa: F401
    C_LIGHT,
    DoubleSlitAperture,
    OpticalGeometry,
    TransverseWavevector,
    aperture_ft,
    aperture_transmission,
    combined_propagator,
    fresnel_kernel,
    green_a,
    green_b,
)
from .photon_stats import (  # noqa: F401
    build_truncated_state,
    classify_counts,
    p_good_closed,
    p_good_oracle,
)
from .rates import (  # noqa: F401
    DetectionSpec,
    ScanResult,
    SourceSpec,
    VisibilityConstants,
    accidental_rate,
    delta_from_bandwidth,
    deltaT_product,
    derive_visibility_constants,
    entangled_rate,
    singles_fringe_visible,
    singles_rate_a,
    singles_rate_b,
    total_rate,
    visibility,
    visibility_curve,
)
