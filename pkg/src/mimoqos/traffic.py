"""Effective-bandwidth delay QoS for a Poisson source with fixed-size packets.

All serve rates are in bits/second, delays in seconds.  The delay-violation
probability of a buffered source served at constant rate C is approximated by
``rho_hat * exp(-qos_exponent(C) * C * d_max)`` where the QoS exponent is the
largest space parameter s whose effective bandwidth still fits under C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .search import bisect_root

# exp() overflows float64 just above this exponent
_MAX_EXPONENT = 709.0


@dataclass(frozen=True)
class TrafficSpec:
    """Poisson packet source with a hard per-packet deadline.

    arrival_rate    packets/second
    packet_bits     bits per packet (fixed size)
    d_max           maximum tolerable waiting time, seconds
    epsilon0        target delay-violation probability
    rho_hat         probability that the buffer is nonempty (1.0 is the
                    conservative bound; a queue simulation can supply a
                    measured value)
    """

    arrival_rate: float
    packet_bits: int
    d_max: float
    epsilon0: float
    rho_hat: float = 1.0

    def __post_init__(self):
        if not self.arrival_rate > 0:
            raise ValueError("arrival_rate must be > 0")
        if not (isinstance(self.packet_bits, int) and self.packet_bits > 0):
            raise ValueError("packet_bits must be a positive integer")
        if not self.d_max > 0:
            raise ValueError("d_max must be > 0")
        if not 0 < self.epsilon0 < 1:
            raise ValueError("epsilon0 must lie in (0, 1)")
        if not 0 < self.rho_hat <= 1:
            raise ValueError("rho_hat must lie in (0, 1]")
        if not self.epsilon0 < self.rho_hat:
            raise ValueError(
                "epsilon0 must be < rho_hat (otherwise the delay constraint "
                "is met at zero rate)"
            )

    @property
    def offered_load(self) -> float:
        """Mean arrival rate in bits/second."""
        return self.arrival_rate * self.packet_bits


@dataclass(frozen=True)
class QosExponentResult:
    s_star: float  # 1/bits
    stable: bool   # True iff the serve rate strictly exceeds the offered load


def effective_bandwidth(spec: TrafficSpec, s: float) -> float:
    """Effective bandwidth (lambda/s)(e^{s*N_b} - 1) in bits/second, s > 0.

    Strictly increasing in s with limit ``offered_load`` as s -> 0+.  The
    small-s regime is evaluated by series to avoid cancellation.
    """
    if not s > 0:
        raise ValueError("space parameter s must be > 0")
    x = s * spec.packet_bits
    if x > _MAX_EXPONENT:
        raise OverflowError(f"s*packet_bits={x:.1f} exceeds the exponent range")
    if x < 1e-6:
        return spec.offered_load * (1.0 + x / 2.0 + x * x / 6.0)
    return spec.arrival_rate / s * math.expm1(x)


def qos_exponent(spec: TrafficSpec, c: float) -> QosExponentResult:
    """Largest s with effective_bandwidth(s) <= c; zero when c is at or below
    the offered load (unstable regime)."""
    if c < 0:
        raise ValueError("serve rate must be >= 0")
    if c <= spec.offered_load:
        return QosExponentResult(s_star=0.0, stable=False)
    # bracket by doubling, then bisect the increasing map s -> alpha(s) - c
    lo = 0.0
    hi = 1.0 / spec.packet_bits
    while effective_bandwidth(spec, hi) < c:
        lo = hi
        hi *= 2.0
        if hi * spec.packet_bits > _MAX_EXPONENT:
            raise OverflowError("serve rate too large to bracket the QoS exponent")

    def gap(s):
        if s == 0.0:
            return spec.offered_load - c
        return effective_bandwidth(spec, s) - c

    s_star = bisect_root(gap, lo, hi, rtol=1e-12)
    return QosExponentResult(s_star=s_star, stable=True)


def violation_probability(spec: TrafficSpec, c: float) -> float:
    """Probability that a packet waits longer than d_max at constant serve rate c.

    Equals rho_hat in the unstable regime and decays like
    exp(-qos_exponent * c * d_max) above it; always within [0, rho_hat].
    """
    res = qos_exponent(spec, c)
    if not res.stable:
        return spec.rho_hat
    p = spec.rho_hat * math.exp(-res.s_star * c * spec.d_max)
    return min(p, spec.rho_hat)


def min_serve_rate(spec: TrafficSpec) -> float:
    """Smallest serve rate whose violation probability equals epsilon0."""
    lo = spec.offered_load
    hi = 2.0 * lo
    for _ in range(200):
        if violation_probability(spec, hi) <= spec.epsilon0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise OverflowError("could not bracket the minimum serve rate")

    # epsilon0 - P_d(c) is increasing in c
    c = bisect_root(
        lambda r: spec.epsilon0 - violation_probability(spec, r), lo, hi, rtol=1e-8
    )
    return c


def min_serve_rate_approx(spec: TrafficSpec) -> float:
    """High-arrival-rate closed form for the minimum serve rate.

    Affine in the arrival rate with slope exactly packet_bits; the offset
    depends only on (epsilon0, rho_hat, d_max).  Accurate once
    arrival_rate * d_max is large relative to ln(rho_hat/epsilon0).
    """
    nb = spec.packet_bits
    gap = -nb * (math.log(spec.epsilon0) - math.log(spec.rho_hat)) / (2.0 * spec.d_max)
    return nb * spec.arrival_rate + gap
