"""Closed-form convergence bounds for the information-transfer dynamics.

All functions are pure.  Bounds are real-valued; when comparing against
simulated first-passage step counts, take the ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import LearningFunction
from .errors import DomainError


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the symmetric multi-agent bound.

    ``i0`` is the initial pairwise information, which must stay below
    c_star = (1 - c_env) / (n - 1).
    """

    n: int
    c_env: float
    k: float
    i0: float
    eps: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DomainError(f"need n >= 2 agents, got {self.n}")
        if not 0.0 <= self.c_env < 1.0:
            raise DomainError(f"c_env must be in [0, 1), got {self.c_env}")
        if not 0.0 < self.k <= 1.0:
            raise DomainError(f"k must be in (0, 1], got {self.k}")
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must be in (0, 1), got {self.eps}")
        if not 0.0 <= self.i0 < self.c_star:
            raise DomainError(
                f"i0 must be in [0, c_star) with c_star={self.c_star}, got {self.i0}"
            )

    @property
    def c_star(self) -> float:
        return (1.0 - self.c_env) / (self.n - 1)


def closed_form_recurrence(alpha: float, c: float, g0: float, t: int) -> float:
    """Closed form of g(t) = g(t-1) + alpha * (c - g(t-1)): c - (1-alpha)^t (c - g0).

    Iterates satisfying the recurrence with '<=' never exceed this value.
    """
    if alpha < 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    if c < 0.0:
        raise DomainError(f"c must be >= 0, got {c}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return c - (1.0 - alpha) ** t * (c - g0)


def single_agent_bound(k_env: float, i0: float, eps: float) -> float:
    """Steps needed by a lone agent to reach total information 1 - eps.

    Exact (before the ceiling) for the identity learning function; a lower
    bound otherwise.  Degenerate cases where convergence is immediate
    (k_env = 1, or eps >= 1 - i0) return 0.
    """
    if not 0.0 < k_env <= 1.0:
        raise DomainError(f"k_env must be in (0, 1], got {k_env}")
    if not 0.0 <= i0 < 1.0:
        raise DomainError(f"i0 must be in [0, 1), got {i0}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must be in (0, 1), got {eps}")
    if k_env == 1.0 or eps >= 1.0 - i0:
        return 0.0
    return (math.log(eps) - math.log1p(-i0)) / math.log1p(-k_env)


def multi_agent_bound(inputs: BoundInputs) -> float:
    """Lower bound on the symmetric multi-agent convergence time.

    Numerator: log(c_star * eps / (c_star - i0)).  Denominator: log of
    1 - k + k * i0 / (c_env / (n-1) + c_star * (k + 1)).  Unlike the
    single-agent case this is not tight even under the identity learning
    function.
    """
    n, c_env, k, i0, eps = inputs.n, inputs.c_env, inputs.k, inputs.i0, inputs.eps
    c_star = inputs.c_star
    denom_arg = 1.0 - k + k * i0 / (c_env / (n - 1) + c_star * (k + 1.0))
    if denom_arg <= 0.0:
        # Only reachable at k == 1, i0 == 0: the bound degenerates to 0.
        return 0.0
    log_denom = math.log(denom_arg)
    if log_denom == 0.0:
        raise DomainError("bound is undefined: denominator argument rounds to 1")
    return math.log(c_star * eps / (c_star - i0)) / log_denom


def k1_limit_bound(n: int, c_star: float, i0: float, eps: float) -> float:
    """Limit of :func:`multi_agent_bound` at full centralization (k -> 1).

    Assumes the symmetric normalization c_env = 1 - (n-1) * c_star, under
    which the two expressions coincide at k = 1.
    """
    if n < 2:
        raise DomainError(f"need n >= 2 agents, got {n}")
    if c_star <= 0.0:
        raise DomainError(f"c_star must be positive, got {c_star}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must be in (0, 1), got {eps}")
    if not 0.0 < i0 < c_star:
        raise DomainError(f"i0 must be in (0, c_star={c_star}), got {i0}")
    denom_arg = i0 * (n - 1) / (1.0 + (n - 1) * c_star)
    log_denom = math.log(denom_arg)
    if log_denom == 0.0:
        raise DomainError("bound is undefined: denominator argument rounds to 1")
    return math.log(c_star * eps / (c_star - i0)) / log_denom


def compute_phi(n: int, c_env: float, k: float, lam: LearningFunction, i_star: float) -> float:
    """Loss fraction of the symmetric setting at pairwise information ``i_star``.

    phi = i_star / (c_env/(n-1) + i_star + k * lam(c_star - i_star)); the
    per-pair net change of one step is k * lam(c_star - i_star) * (1 - phi).
    """
    if n < 2:
        raise DomainError(f"need n >= 2 agents, got {n}")
    if not 0.0 <= c_env < 1.0:
        raise DomainError(f"c_env must be in [0, 1), got {c_env}")
    if not 0.0 < k <= 1.0:
        raise DomainError(f"k must be in (0, 1], got {k}")
    c_star = (1.0 - c_env) / (n - 1)
    if not 0.0 <= i_star <= c_star:
        raise DomainError(f"i_star must be in [0, c_star={c_star}], got {i_star}")
    if c_env == 0.0 and i_star == c_star:
        raise DomainError("phi degenerates to 1 when c_env = 0 and i_star = c_star")
    gap = c_star - i_star
    return i_star / (c_env / (n - 1) + i_star + k * lam(gap))


@dataclass(frozen=True)
class SweepPoint:
    """One point of the centralization sweep; ``t_star`` is NaN on error rows."""

    k: float
    t_star: float
    status: str


def sweep_k(n: int, c_env: float, i0: float, eps: float, k_grid: list[float]) -> list[SweepPoint]:
    """Evaluate the convergence-time bound over a grid of centralization values.

    k = 1 entries use the closed-form limit; per-point domain errors become
    marked rows instead of aborting the sweep.
    """
    for k in k_grid:
        if not 0.0 < k <= 1.0:
            raise DomainError(f"grid values must be in (0, 1], got {k}")
    c_star = (1.0 - c_env) / (n - 1)
    points: list[SweepPoint] = []
    for k in k_grid:
        try:
            if k == 1.0:
                t_star = k1_limit_bound(n, c_star, i0, eps)
            else:
                t_star = multi_agent_bound(BoundInputs(n, c_env, k, i0, eps))
            points.append(SweepPoint(k, t_star, "ok"))
        except DomainError as exc:
            points.append(SweepPoint(k, math.nan, f"domain-error: {exc}"))
    return points
