"""Cost-minimal joint transmit-power / feedback-bit allocation under a delay constraint.

The problem: minimize phi*P + psi*n_t*B subject to the average delay-violation
probability at (P, B) staying below epsilon0, P <= p_max and integer
B <= b_max.  Since the violation probability is monotone decreasing in P at
fixed B, the feasible boundary is an implicit curve P(B), and the relaxed
problem collapses to a 1-D line search over real B.  Rounding the relaxed
optimum to its two neighboring integers and keeping the cheaper one recovers
the integer optimum, which the exhaustive scan verifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .amc import ModulationTable
from .search import bisect_root, golden_section_min
from .sinr import SinrModelParams, average_violation
from .traffic import TrafficSpec


class InfeasibleError(Exception):
    """No allocation within the resource caps meets the violation target."""


@dataclass(frozen=True)
class CostModel:
    phi: float  # cost per watt
    psi: float  # cost per feedback bit

    def __post_init__(self):
        if not (self.phi > 0 and self.psi > 0):
            raise ValueError("cost factors must be > 0")

    @property
    def xi(self) -> float:
        """Relative cost factor psi/phi."""
        return self.psi / self.phi


@dataclass(frozen=True)
class ResourceBounds:
    p_max: float       # watts, linear
    b_max: int         # feedback bits
    p_min: float = 1.0  # minimum power (watts) sustaining the link

    def __post_init__(self):
        if not self.p_max > self.p_min >= 0:
            raise ValueError("need p_max > p_min >= 0")
        if not (isinstance(self.b_max, int) and self.b_max >= 0):
            raise ValueError("b_max must be a nonnegative integer")


@dataclass(frozen=True)
class AllocationResult:
    p: float
    b: int
    cost: float
    achieved_violation: float
    method: str


@dataclass(frozen=True)
class AllocationProblem:
    """Everything the solvers need: link model, AMC table, traffic and costs."""

    n_t: int
    sigma2: float
    table: ModulationTable
    spec: TrafficSpec
    cost: CostModel
    bounds: ResourceBounds
    regime: str = "general"

    def params_at(self, p: float, b: float) -> SinrModelParams:
        return SinrModelParams(n_t=self.n_t, b=b, p=p, sigma2=self.sigma2)

    def violation(self, p: float, b: float) -> float:
        return average_violation(
            self.params_at(p, b), self.table, self.spec, regime=self.regime
        )

    def total_cost(self, p: float, b: float) -> float:
        return self.cost.phi * p + self.cost.psi * self.n_t * b


def power_for_feedback(problem: AllocationProblem, b: float) -> float:
    """Smallest power meeting the violation target at feedback size b.

    Bisects the monotone map P -> violation(P, b) to relative tolerance 1e-8;
    raises InfeasibleError when even p_max misses the target.  Under the
    interference-limited regime the constraint does not depend on power, so
    the minimum sustaining power is returned whenever b alone is feasible.
    """
    if not 0 <= b <= problem.bounds.b_max:
        raise ValueError(f"b={b} outside [0, {problem.bounds.b_max}]")
    eps0 = problem.spec.epsilon0
    if problem.regime == "interference_limited":
        if problem.violation(max(problem.bounds.p_min, 1e-300), b) > eps0:
            raise InfeasibleError(f"b={b} infeasible regardless of power")
        return problem.bounds.p_min

    p_max = problem.bounds.p_max
    v_top = problem.violation(p_max, b)
    if v_top > eps0:
        raise InfeasibleError(
            f"violation {v_top:.3g} at (p_max, b={b}) exceeds target {eps0:.3g}"
        )
    if v_top == eps0:
        return p_max
    p_lo = p_max * 1e-15
    if problem.violation(p_lo, b) <= eps0:
        return p_lo
    # epsilon0 - violation(P) is increasing in P
    return bisect_root(
        lambda p: eps0 - problem.violation(p, b), p_lo, p_max, rtol=1e-8
    )


def solve_relaxed(problem: AllocationProblem) -> tuple[float, float]:
    """Minimizer (p, b) of the cost with b relaxed to a real in [0, b_max].

    A coarse scan at 0.25-bit steps brackets the minimum of
    h(b) = phi*P(b) + psi*n_t*b; golden-section refines to 1e-4 bits.
    """
    b_max = problem.bounds.b_max
    cache: dict[float, float] = {}

    def h(b):
        key = round(b, 9)
        if key not in cache:
            try:
                cache[key] = problem.total_cost(power_for_feedback(problem, b), b)
            except InfeasibleError:
                cache[key] = math.inf
        return cache[key]

    grid = [i * 0.25 for i in range(int(b_max / 0.25) + 1)]
    if grid[-1] != float(b_max):
        grid.append(float(b_max))
    values = [h(b) for b in grid]
    best = min(range(len(grid)), key=lambda i: values[i])
    if math.isinf(values[best]):
        raise InfeasibleError("no feedback size admits a feasible power")
    lo = grid[best - 1] if best > 0 else grid[0]
    hi = grid[best + 1] if best + 1 < len(grid) else grid[-1]
    if hi - lo < 1e-12:
        b_dag = grid[best]
    else:
        b_dag, _ = golden_section_min(h, lo, hi, xtol=1e-4)
        if h(grid[best]) < h(b_dag):
            b_dag = grid[best]
    return power_for_feedback(problem, b_dag), b_dag


def _result(problem, p, b, method) -> AllocationResult:
    return AllocationResult(
        p=p,
        b=b,
        cost=problem.total_cost(p, b),
        achieved_violation=problem.violation(p, b),
        method=method,
    )


def allocate_rounded(problem: AllocationProblem) -> AllocationResult:
    """Relax b, then compare the two integer roundings of the relaxed optimum.

    An integral relaxed optimum is returned directly; otherwise the cheaper of
    (P(floor), floor) and (P(ceil), ceil) wins, ties toward fewer feedback
    bits.  If one rounding is infeasible the other is returned.
    """
    _, b_dag = solve_relaxed(problem)
    method = "relax-round"
    if abs(b_dag - round(b_dag)) < 1e-9:
        bi = int(round(b_dag))
        return _result(problem, power_for_feedback(problem, bi), bi, method)

    b_f, b_c = int(math.floor(b_dag)), int(math.ceil(b_dag))
    candidates = []
    for b in (b_f, b_c):
        try:
            p = power_for_feedback(problem, b)
        except InfeasibleError:
            continue
        candidates.append((problem.total_cost(p, b), b, p))
    if not candidates:
        raise InfeasibleError("both roundings of the relaxed optimum are infeasible")
    if len(candidates) == 2 and candidates[1][0] < candidates[0][0]:
        _, b, p = candidates[1]  # ceiling strictly cheaper
    else:
        _, b, p = candidates[0]  # floor, or the single feasible rounding
    return _result(problem, p, b, method)


def allocate_exhaustive(problem: AllocationProblem) -> AllocationResult:
    """Scan every integer b in 0..b_max and keep the cheapest feasible pair."""
    best = None
    for b in range(problem.bounds.b_max + 1):
        try:
            p = power_for_feedback(problem, b)
        except InfeasibleError:
            continue
        cost = problem.total_cost(p, b)
        if best is None or cost < best[0]:
            best = (cost, b, p)
    if best is None:
        raise InfeasibleError("no integer feedback size is feasible")
    _, b, p = best
    return _result(problem, p, b, "exhaustive")


def allocate_interference_limited(problem: AllocationProblem) -> AllocationResult:
    """Noise-free allocation: power pinned at the sustaining minimum, feedback
    solved on the power-independent constraint and rounded up."""
    prob = replace(problem, regime="interference_limited")
    eps0 = prob.spec.epsilon0
    p = prob.bounds.p_min
    b_max = prob.bounds.b_max

    def viol(b):
        return prob.violation(p, b)

    if viol(b_max) > eps0:
        raise InfeasibleError("even b_max misses the target without noise")
    if viol(0.0) <= eps0:
        b = 0
    else:
        # epsilon0 - violation(b) is increasing in b
        b_dag = bisect_root(lambda b: eps0 - viol(b), 0.0, float(b_max), rtol=1e-10)
        b = int(math.ceil(b_dag - 1e-9))
    return _result(prob, p, b, "interference-limited")


def allocate_noise_limited(problem: AllocationProblem) -> AllocationResult:
    """Interference-free allocation: zero feedback bits, power solved directly."""
    prob = replace(problem, regime="noise_limited")
    p = power_for_feedback(prob, 0)
    return _result(prob, p, 0, "noise-limited")
