"""Seeded Monte Carlo photon-timestamp streams and an ideal coincidence
circuit, used to validate the analytic accidental-rate scaling and the
visibility law.

Detection model: pair emissions are a homogeneous Poisson process; each
emission puts one timestamp in each stream, separated by a zero-mean
Gaussian jitter of width jitter_sigma (of order one over the source
bandwidth).  Uncorrelated singles are independent Poisson processes added
to each stream.  The circuit matches events greedily (earliest unmatched
first, each event used at most once) within |tA - tB| <= window.

Randomness comes from numpy's PCG64 generator; per-position streams use
spawned child sequences of the run seed, so tallies are bit-exact
reproducible for a fixed (spec, seed) on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ResourceLimitError, UsageError
from .optics import DoubleSlitAperture, OpticalGeometry
from .rates import (
    DetectionSpec,
    ScanResult,
    SourceSpec,
    accidental_rate,
    derive_visibility_constants,
    deltaT_product,
    entangled_rate,
    fringe_pattern,
    visibility,
)

RNG_ID = "numpy-PCG64"
MAX_EXPECTED_EVENTS = 100_000_000
BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class StreamSpec:
    """Rates, jitter, duration and seed of one simulated acquisition."""

    pair_rate: float
    jitter_sigma: float
    uncorrelated_rate_a: float
    uncorrelated_rate_b: float
    duration: float
    seed: int

    def __post_init__(self):
        for name in ("pair_rate", "jitter_sigma", "uncorrelated_rate_a", "uncorrelated_rate_b"):
            if getattr(self, name) < 0.0:
                raise UsageError(f"StreamSpec.{name} must be >= 0")
        if self.duration <= 0.0:
            raise UsageError("StreamSpec.duration must be positive")

    @property
    def expected_events(self) -> float:
        per_second = 2.0 * self.pair_rate + self.uncorrelated_rate_a + self.uncorrelated_rate_b
        return per_second * self.duration


@dataclass(frozen=True)
class EventStreams:
    """Two time-sorted timestamp arrays with pair-provenance tags
    (tag >= 0: index of the emitting pair; tag == -1: uncorrelated)."""

    times_a: np.ndarray
    tags_a: np.ndarray
    times_b: np.ndarray
    tags_b: np.ndarray
    spec: StreamSpec


@dataclass(frozen=True)
class CoincidenceTally:
    true_count: int
    accidental_count: int
    total_count: int
    duration: float

    def __post_init__(self):
        if self.total_count != self.true_count + self.accidental_count:
            raise UsageError("tally must satisfy total = true + accidental")

    def merge(self, other: "CoincidenceTally") -> "CoincidenceTally":
        """Combine tallies of independently simulated shards."""
        return CoincidenceTally(
            true_count=self.true_count + other.true_count,
            accidental_count=self.accidental_count + other.accidental_count,
            total_count=self.total_count + other.total_count,
            duration=self.duration + other.duration,
        )


def _poisson_times(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    n = rng.poisson(rate * duration) if rate > 0.0 else 0
    return np.sort(rng.uniform(0.0, duration, n))


def simulate_streams(spec: StreamSpec) -> EventStreams:
    """Generate both streams for one acquisition; deterministic per seed."""
    if spec.expected_events > MAX_EXPECTED_EVENTS:
        raise ResourceLimitError(
            f"expected event count {spec.expected_events:.3g} exceeds "
            f"{MAX_EXPECTED_EVENTS:g}"
        )
    root = np.random.SeedSequence(spec.seed)
    rng_pairs, rng_a, rng_b = (np.random.default_rng(s) for s in root.spawn(3))

    t_pairs = _poisson_times(rng_pairs, spec.pair_rate, spec.duration)
    n_pairs = t_pairs.size
    jitter = (
        rng_pairs.normal(0.0, spec.jitter_sigma, n_pairs)
        if spec.jitter_sigma > 0.0
        else np.zeros(n_pairs)
    )
    pair_ids = np.arange(n_pairs, dtype=np.int64)

    t_sa = _poisson_times(rng_a, spec.uncorrelated_rate_a, spec.duration)
    t_sb = _poisson_times(rng_b, spec.uncorrelated_rate_b, spec.duration)

    times_a = np.concatenate([t_pairs, t_sa])
    tags_a = np.concatenate([pair_ids, np.full(t_sa.size, -1, dtype=np.int64)])
    times_b = np.concatenate([t_pairs + jitter, t_sb])
    tags_b = np.concatenate([pair_ids, np.full(t_sb.size, -1, dtype=np.int64)])

    order_a = np.argsort(times_a, kind="stable")
    order_b = np.argsort(times_b, kind="stable")
    return EventStreams(
        times_a=times_a[order_a],
        tags_a=tags_a[order_a],
        times_b=times_b[order_b],
        tags_b=tags_b[order_b],
        spec=spec,
    )


@njit(cache=True)
def _greedy_match(ta, tb, window):  # pragma: no cover - exercised via wrapper
    na = ta.size
    nb = tb.size
    cap = min(na, nb)
    ia = np.empty(cap, np.int64)
    ib = np.empty(cap, np.int64)
    i = 0
    j = 0
    m = 0
    while i < na and j < nb:
        dt = ta[i] - tb[j]
        if dt > window:
            j += 1
        elif dt < -window:
            i += 1
        else:
            ia[m] = i
            ib[m] = j
            m += 1
            i += 1
            j += 1
    return ia[:m], ib[:m]


def count_coincidences(streams: EventStreams, window_T: float) -> CoincidenceTally:
    """Run the coincidence circuit: unordered pairs with |tA - tB| <= window,
    greedy earliest-unmatched, each event used at most once."""
    if window_T <= 0.0:
        raise UsageError("coincidence window must be positive")
    if not streams.spec.jitter_sigma < window_T / 3.0:
        raise UsageError(
            "pair jitter must satisfy jitter_sigma < window_T/3 so true "
            "pairs are not lost"
        )
    ia, ib = _greedy_match(streams.times_a, streams.times_b, window_T)
    tag_a = streams.tags_a[ia]
    tag_b = streams.tags_b[ib]
    true_count = int(np.count_nonzero((tag_a >= 0) & (tag_a == tag_b)))
    total = int(ia.size)
    return CoincidenceTally(
        true_count=true_count,
        accidental_count=total - true_count,
        total_count=total,
        duration=streams.spec.duration,
    )


def _bootstrap_visibility_err(
    rng: np.random.Generator, totals: np.ndarray, n_resamples: int = BOOTSTRAP_RESAMPLES
) -> float:
    """Parametric bootstrap standard error of (max-min)/(max+min)."""
    vs = np.empty(n_resamples)
    for k in range(n_resamples):
        draw = rng.poisson(totals).astype(float)
        hi, lo = draw.max(), draw.min()
        vs[k] = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
    return float(vs.std(ddof=1))


def mc_visibility(
    src: SourceSpec,
    det: DetectionSpec,
    geom: OpticalGeometry,
    ap: DoubleSlitAperture,
    n_fringe_points: int,
    seed: int,
    *,
    duration: float = 1.0,
    peak_true_counts: float = 10_000.0,
) -> ScanResult:
    """Monte Carlo fringe scan across one full fringe period.

    Pair rates follow the analytic paired-coincidence pattern; a position
    independent accidental floor is realized by uncorrelated singles whose
    product rate reproduces the analytic accidental rate.  Returns the scan
    with per-position tallies; meta carries the scan visibility, its
    bootstrap standard error and the analytic prediction.
    """
    if n_fringe_points < 5:
        raise UsageError("need at least 5 fringe points")
    lam_s = 2.0 * geom.lambda_p
    period = lam_s * geom.d_source_to_scan / ap.a
    positions = np.linspace(-period / 2.0, period / 2.0, n_fringe_points)

    r_ent_peak = entangled_rate((0.0, 0.0), src, geom, ap)
    r_acc = accidental_rate(src, det, geom, ap)
    if r_ent_peak <= 0.0:
        raise UsageError("zero gain produces no pairs to scan")
    floor_counts = peak_true_counts * r_acc / r_ent_peak
    # singles rate whose product gives the accidental floor in a 2T window
    u_rate = math.sqrt(floor_counts / (2.0 * det.window_T * duration))
    jitter = 1.0 / src.delta

    # refuse oversized runs before any stream is generated
    peak_pair_rate = peak_true_counts / duration
    worst_per_position = (2.0 * peak_pair_rate + 2.0 * u_rate) * duration
    if worst_per_position * n_fringe_points > MAX_EXPECTED_EVENTS:
        raise ResourceLimitError(
            f"scan would generate about {worst_per_position * n_fringe_points:.3g} "
            f"events, above the bound {MAX_EXPECTED_EVENTS:g}"
        )

    root = np.random.SeedSequence(seed)
    children = root.spawn(n_fringe_points + 1)

    true_c = np.empty(n_fringe_points, dtype=np.int64)
    acc_c = np.empty(n_fringe_points, dtype=np.int64)
    total_c = np.empty(n_fringe_points, dtype=np.int64)
    pair_rates = np.empty(n_fringe_points)
    for i, x in enumerate(positions):
        pattern = fringe_pattern((x, det.rho2[1]), geom, ap)
        pair_rate = peak_true_counts * pattern / duration
        pair_rates[i] = pair_rate
        spec = StreamSpec(
            pair_rate=pair_rate,
            jitter_sigma=jitter,
            uncorrelated_rate_a=u_rate,
            uncorrelated_rate_b=u_rate,
            duration=duration,
            seed=children[i].generate_state(2)[0],
        )
        tally = count_coincidences(simulate_streams(spec), det.window_T)
        true_c[i] = tally.true_count
        acc_c[i] = tally.accidental_count
        total_c[i] = tally.total_count

    hi, lo = float(total_c.max()), float(total_c.min())
    v_mc = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
    rng_boot = np.random.default_rng(children[-1])
    v_err = _bootstrap_visibility_err(rng_boot, total_c)

    consts = derive_visibility_constants(geom, ap, det)
    v_analytic = visibility(src.xi, deltaT_product(src.delta, det.window_T), consts)

    values = np.column_stack(
        [total_c.astype(float), true_c.astype(float), acc_c.astype(float), pair_rates]
    )
    return ScanResult(
        abscissa=positions,
        values=values,
        meta={
            "columns": ["total", "true", "accidental", "pair_rate"],
            "v_mc": v_mc,
            "v_mc_err": v_err,
            "v_analytic": v_analytic,
            "seed": seed,
            "rng": RNG_ID,
            "duration": duration,
            "peak_true_counts": peak_true_counts,
            "uncorrelated_rate": u_rate,
            "jitter_sigma": jitter,
        },
    )
