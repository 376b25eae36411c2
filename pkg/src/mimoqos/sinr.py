"""Analytic SINR distribution under quantized-feedback zero-forcing beamforming.

The post-beamforming SINR of one user among n_t equally powered users has
approximate cdf ``1 - exp(-x/gamma) / (1 + theta*x)**(n_t-1)`` where
``theta = 2**(-b/(n_t-1))`` is the random-vector-quantization error scale of a
b-bit codebook.  Two asymptotic regimes drop the noise or the interference
factor.  Mixing the per-serve-level delay-violation probabilities over the
SINR bins of a modulation table yields the average violation probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .amc import ModulationTable, serve_rate
from .traffic import TrafficSpec, violation_probability

REGIMES = ("general", "interference_limited", "noise_limited")


@dataclass(frozen=True)
class SinrModelParams:
    """Link parameters of the analytic SINR model.

    gamma is the average transmit SNR p / (n_t * sigma2), linear; it may be
    given directly or derived from the total power p.  b is real-valued here
    so the allocator can relax it; simulation configs require integers.
    """

    n_t: int
    b: float
    gamma: float | None = None
    p: float | None = None
    sigma2: float = 1.0

    def __post_init__(self):
        if self.n_t < 2:
            raise ValueError("n_t must be >= 2")
        if self.b < 0:
            raise ValueError("b must be >= 0")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if self.gamma is None:
            if self.p is None:
                raise ValueError("provide gamma or p")
            object.__setattr__(self, "gamma", self.p / (self.n_t * self.sigma2))
        elif self.p is not None:
            implied = self.p / (self.n_t * self.sigma2)
            if not math.isclose(self.gamma, implied, rel_tol=1e-9):
                raise ValueError(
                    f"inconsistent parameters: gamma={self.gamma} but "
                    f"p/(n_t*sigma2)={implied}"
                )
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")

    @property
    def theta(self) -> float:
        """Quantization error scale 2^(-b/(n_t-1)), in (0, 1]."""
        return 2.0 ** (-self.b / (self.n_t - 1))


def _survival(params: SinrModelParams, x: float, regime: str) -> float:
    """P(SINR > x) under the chosen regime."""
    if math.isinf(x):
        return 0.0
    noise = math.exp(-x / params.gamma)
    interference = (1.0 + params.theta * x) ** -(params.n_t - 1)
    if regime == "general":
        return noise * interference
    if regime == "interference_limited":
        return interference
    if regime == "noise_limited":
        return noise
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def cdf_limited_feedback(params: SinrModelParams, x: float) -> float:
    """Cdf of the SINR with b-bit quantized feedback; x is linear, >= 0."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return 1.0 - _survival(params, x, "general")


def cdf_interference_limited(params: SinrModelParams, x: float) -> float:
    """Noise-free limit: 1 - (1 + theta*x)^-(n_t-1); independent of power."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return 1.0 - _survival(params, x, "interference_limited")


def cdf_noise_limited(params: SinrModelParams, x: float) -> float:
    """Perfect-feedback limit: 1 - exp(-x/gamma); independent of b."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return 1.0 - _survival(params, x, "noise_limited")


@lru_cache(maxsize=512)
def level_violation_probs(table: ModulationTable, spec: TrafficSpec) -> tuple[float, ...]:
    """Delay-violation probability at each serve level's rate (level 0 first)."""
    return tuple(
        violation_probability(spec, serve_rate(table, n))
        for n in range(table.num_levels)
    )


def average_violation(
    params: SinrModelParams,
    table: ModulationTable,
    spec: TrafficSpec,
    regime: str = "general",
) -> float:
    """SINR-bin average of the per-level delay-violation probabilities.

    Sums P_d(C_n) * [F(omega_{n+1}) - F(omega_n)] over the serve levels; all
    terms are nonnegative, which keeps the sum numerically safe.  The result
    is non-increasing in both transmit power and feedback bits.
    """
    pd = level_violation_probs(table, spec)
    surv = [_survival(params, om, regime) for om in table.thresholds]
    total = 0.0
    for n in range(table.num_levels):
        total += pd[n] * (surv[n] - surv[n + 1])
    return total


def average_violation_telescoped(
    params: SinrModelParams,
    table: ModulationTable,
    spec: TrafficSpec,
    regime: str = "general",
) -> float:
    """Algebraically equal form P_d(C_0) - sum (P_d(C_{n-1})-P_d(C_n)) S(omega_n).

    Kept as an independent evaluation route for identity testing.
    """
    pd = level_violation_probs(table, spec)
    total = pd[0]
    for n in range(1, table.num_levels):
        total -= (pd[n - 1] - pd[n]) * _survival(params, table.thresholds[n], regime)
    return total
