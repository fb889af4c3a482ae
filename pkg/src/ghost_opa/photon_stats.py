"""Truncated multimode parametric state and good/bad coincidence counting.

The source state, expanded to second order in the gain xi over n
signal/idler mode pairs, contains

  * the vacuum (amplitude 1),
  * n single-pair terms |1,1> (amplitude -xi/2),
  * n same-mode double-pair terms |2,2> (amplitude xi^2/8),
  * products of single pairs in two distinct modes.  The underlying double
    sum runs over ordered mode pairs; the enumeration here keeps one term
    per unordered pair {k, k'} with the ordered multiplicity 2 folded into
    the amplitude, i.e. 2 * xi^2/8 = xi^2/4.

A coincidence is "good" when the two detected photons come from the same
pair (or the same four-photon term) and "bad" when they come from two
different pairs; distinct-mode product terms contribute half good, half
bad.  The shipped closed form

    p_good_closed(n, xi) = (16 + ((n+1)/2) xi^2) / (16 + n xi^2)

corresponds to weighting the distinct-mode products per ordered pair,
(xi^2/8)^2 each; the brute-force enumeration with the unordered convention
above gives (16 + n xi^2) / (16 + (2n-1) xi^2).  The two agree exactly at
n = 1 and share the n -> infinity limit 1/2; the finite-n difference is
reported by the diagnostic suite and the closed form is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ResourceLimitError, UsageError

VACUUM = "vacuum"
PAIR = "pair"
DOUBLE_PAIR_SAME_MODE = "double_pair_same_mode"
PAIR_PRODUCT_DISTINCT_MODES = "pair_product_distinct_modes"

ORACLE_MODE_LIMIT = 12
XI_PERTURBATIVE_MAX = 0.5


class StateTerm(NamedTuple):
    amplitude: float
    occupancy: tuple  # mode indices carrying the photons
    term_class: str


@dataclass(frozen=True)
class TruncatedOpaState:
    """Second-order truncation of the multimode parametric output state."""

    n_modes: int
    xi: float
    terms: tuple[StateTerm, ...]


@dataclass(frozen=True)
class CountClassification:
    good_weight: float
    bad_weight: float

    def __post_init__(self):
        if not (math.isfinite(self.good_weight) and math.isfinite(self.bad_weight)):
            raise UsageError("count weights must be finite")


def build_truncated_state(n: int, xi: float) -> TruncatedOpaState:
    """Enumerate all terms of the state up to second order in the gain.

    Valid in the perturbative window 0 < xi <= 0.5.
    """
    if n < 1:
        raise UsageError("need at least one mode pair")
    if not (0.0 < xi <= XI_PERTURBATIVE_MAX):
        raise UsageError(
            f"truncated state is only valid for 0 < xi <= {XI_PERTURBATIVE_MAX}"
        )
    terms = [StateTerm(1.0, (), VACUUM)]
    for k in range(n):
        terms.append(StateTerm(-xi / 2.0, (k,), PAIR))
    for k in range(n):
        terms.append(StateTerm(xi * xi / 8.0, (k,), DOUBLE_PAIR_SAME_MODE))
    # unordered {k, k'}, ordered multiplicity 2 folded into the amplitude
    for k in range(n):
        for kp in range(k + 1, n):
            terms.append(
                StateTerm(2.0 * xi * xi / 8.0, (k, kp), PAIR_PRODUCT_DISTINCT_MODES)
            )
    return TruncatedOpaState(n_modes=n, xi=xi, terms=tuple(terms))


def classify_counts(state: TruncatedOpaState) -> CountClassification:
    """Split squared term amplitudes into good and bad coincidence weight.

    One photon is registered per arm per event.  Pair and same-mode
    double-pair detections are always good; each distinct-mode product term
    yields a good and a bad detection combination with equal weight.
    """
    good = 0.0
    bad = 0.0
    for term in state.terms:
        w = term.amplitude * term.amplitude
        if term.term_class in (PAIR, DOUBLE_PAIR_SAME_MODE):
            good += w
        elif term.term_class == PAIR_PRODUCT_DISTINCT_MODES:
            good += 0.5 * w
            bad += 0.5 * w
    return CountClassification(good_weight=good, bad_weight=bad)


def p_good_closed(n: int, xi: float) -> float:
    """Closed-form conditional probability that a coincidence is good."""
    if n < 1:
        raise UsageError("need at least one mode pair")
    if xi < 0.0:
        raise UsageError("gain must be >= 0")
    x2 = xi * xi
    return (16.0 + 0.5 * (n + 1) * x2) / (16.0 + n * x2)


def p_good_oracle(n: int, xi: float) -> float:
    """Brute-force good-count probability from the enumerated state.

    Bounded to n <= ORACLE_MODE_LIMIT mode pairs.
    """
    if n > ORACLE_MODE_LIMIT:
        raise ResourceLimitError(
            f"oracle enumeration is bounded to n <= {ORACLE_MODE_LIMIT}"
        )
    counts = classify_counts(build_truncated_state(n, xi))
    return counts.good_weight / (counts.good_weight + counts.bad_weight)
