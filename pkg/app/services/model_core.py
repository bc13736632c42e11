"""
Single-agent stay-or-switch model.

An agent on the incumbent system S can spend effort e to push the sanction
probability down linearly, p(e) = p0 - alpha_mit * e, at convex cost
C(e) = k e^2 / 2, or move to the alternative system A for a riskless payoff.
"""
import math
import logging
from scipy.optimize import bisect

from ..config import INDIFFERENCE_TOL, THRESHOLD_XTOL
from ..errors import DomainError
from ..models import BaselineParams, BoundaryHit, Decision, EffortSolution, RangeFlag, ThresholdResult

def _check_effort(e: float):
    if not math.isfinite(e) or e < 0:
        raise DomainError(f"effort must be a finite value >= 0, got {e}")

def sanction_probability(e: float, params: BaselineParams) -> float:
    _check_effort(e)
    return min(max(params.p0 - params.alpha_mit * e, 0.0), 1.0)

def mitigation_cost(e: float, params: BaselineParams) -> float:
    _check_effort(e)
    return 0.5 * params.k * e * e

def eu_incumbent(e: float, params: BaselineParams) -> float:
    p = sanction_probability(e, params)
    network = params.theta * params.n_s
    return (1 - p) * (1 + params.epsilon + network) + p * (1 + network - params.loss) - mitigation_cost(e, params)

def eu_alternative(params: BaselineParams) -> float:
    return 1 + params.theta * params.n_a

def effort_ceiling(params: BaselineParams) -> float:
    """Largest effort keeping the unclamped p(e) nonnegative; 0 when effort is ineffective."""
    return params.p0 / params.alpha_mit if params.alpha_mit > 0 else 0.0

def optimal_effort(params: BaselineParams) -> EffortSolution:
    e_max = effort_ceiling(params)
    if params.alpha_mit == 0 or e_max == 0:
        e_star, hit = 0.0, BoundaryHit.LOWER
    else:
        # EU_S is concave on [0, e_max], so the optimum is the interior root capped at e_max
        interior = params.alpha_mit * (params.epsilon + params.loss) / params.k
        if interior < e_max:
            e_star, hit = interior, BoundaryHit.NONE
        else:
            e_star, hit = e_max, BoundaryHit.UPPER
    return EffortSolution(
        e_star=e_star,
        p_at_e_star=sanction_probability(e_star, params),
        eu_s_star=eu_incumbent(e_star, params),
        boundary_hit=hit,
    )

def _decide(gap: float) -> Decision:
    if gap > INDIFFERENCE_TOL: return Decision.SWITCH
    if gap < -INDIFFERENCE_TOL: return Decision.STAY
    return Decision.INDIFFERENT

def switching_gap(params: BaselineParams) -> float:
    """EU_A - max_e EU_S at the params' own p0."""
    return eu_alternative(params) - optimal_effort(params).eu_s_star

def switch_decision(params: BaselineParams) -> Decision:
    return _decide(switching_gap(params))

def threshold_closed_form(params: BaselineParams):
    """
    Fast path for p*. Valid when alpha_mit = 0, or when the optimal effort at p*
    is interior; returns None otherwise (or when p* falls outside [0, 1]).
    """
    spread = params.epsilon + params.loss
    base = params.epsilon + params.theta * (params.n_s - params.n_a)
    if params.alpha_mit == 0:
        p_star = base / spread
    else:
        p_star = (base + params.alpha_mit ** 2 * spread ** 2 / (2 * params.k)) / spread
        interior = params.alpha_mit * spread / params.k
        if not interior < p_star / params.alpha_mit: return None
    if not 0.0 <= p_star <= 1.0: return None
    return p_star

def critical_threshold(params: BaselineParams, fast: bool = False) -> ThresholdResult:
    gap = switching_gap(params)
    decision = _decide(gap)

    # f(p) = EU_A - max_e EU_S(e; p0 = p) is increasing in p
    def f(p: float) -> float:
        return switching_gap(params.model_copy(update={"p0": p}))

    p_star = threshold_closed_form(params) if fast else None
    if p_star is not None:
        return ThresholdResult(p_star=p_star, range_flag=RangeFlag.IN_RANGE, decision_at_p0=decision, eu_gap=gap)

    f_lo, f_hi = f(0.0), f(1.0)
    if f_lo > 0:
        logging.info(f"No threshold in [0, 1]: switching dominates at p0=0 (gap {f_lo:.3g})")
        return ThresholdResult(range_flag=RangeFlag.BELOW, decision_at_p0=decision, eu_gap=gap)
    if f_hi < 0:
        logging.info(f"No threshold in [0, 1]: staying dominates at p0=1 (gap {f_hi:.3g})")
        return ThresholdResult(range_flag=RangeFlag.ABOVE, decision_at_p0=decision, eu_gap=gap)
    if f_lo == 0: p_star = 0.0
    elif f_hi == 0: p_star = 1.0
    else: p_star = bisect(f, 0.0, 1.0, xtol=THRESHOLD_XTOL)
    return ThresholdResult(p_star=p_star, range_flag=RangeFlag.IN_RANGE, decision_at_p0=decision, eu_gap=gap)
