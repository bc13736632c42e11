"""
Two-system population dynamics with endogenous network benefit theta(s) = alpha_net * s**gamma.

Users of the incumbent (share 1 - s_B) keep the efficiency edge and mitigate
sanction risk with effort z; users of the alternative get only the network
term. The share of the alternative follows the replicator equation
    ds_B/dt = s_B (1 - s_B) (U_B - U_A).
"""
import math
import logging
from typing import Callable, List, Optional
import numpy as np
from scipy.optimize import bisect

from ..config import DEFAULT_DT, DEFAULT_T_END, EQUILIBRIUM_GRID_N, EQUILIBRIUM_TOL, ROOT_XTOL_FLOOR
from ..errors import DomainError
from ..models import (
    EquilibriumPoint, EquilibriumSet, OptimalZ, RegimeSpan, ReplicatorParams, Stability, Trajectory
)
from .model_core import effort_ceiling, mitigation_cost, sanction_probability

def check_share(s: float, name: str = "share"):
    if not math.isfinite(s) or not 0.0 <= s <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {s}")

def network_benefit(s: float, params: ReplicatorParams) -> float:
    check_share(s)
    return params.alpha_net * s ** params.gamma

def optimal_z(params: ReplicatorParams) -> OptimalZ:
    """
    Maximises -p(z) L - C(z). The theta(s_A) and epsilon terms of U_A do not
    depend on z, so the marginal benefit is alpha_mit * L (not alpha_mit * (epsilon + L)).
    """
    view = params.mitigation_view()
    if params.alpha_mit == 0:
        z = 0.0
    else:
        z = min(params.alpha_mit * params.loss / params.k, effort_ceiling(view))
    p = sanction_probability(z, view)
    cost = mitigation_cost(z, view)
    return OptimalZ(z_star=z, p_at_z=p, cost_at_z=cost, constant_term=params.epsilon - p * params.loss - cost)

def gap_function(params: ReplicatorParams) -> Callable[[float], float]:
    """U_B - U_A as a plain float function; the constant term is solved once."""
    a, g = params.alpha_net, params.gamma
    c = optimal_z(params).constant_term
    def gap(s: float) -> float:
        return a * s ** g - a * (1.0 - s) ** g - c
    return gap

def rhs_function(params: ReplicatorParams) -> Callable[[float], float]:
    gap = gap_function(params)
    def rhs(s: float) -> float:
        s = min(max(s, 0.0), 1.0)  # RK4 stages may overshoot the unit interval
        return s * (1.0 - s) * gap(s)
    return rhs

def utility_gap(s_b: float, params: ReplicatorParams) -> float:
    check_share(s_b, "s_b")
    return gap_function(params)(s_b)

def replicator_rhs(s_b: float, params: ReplicatorParams) -> float:
    check_share(s_b, "s_b")
    return rhs_function(params)(s_b)

# === INTEGRATION ===

def step_count(t_end: float, dt: float) -> int:
    for name, v in (("t_end", t_end), ("dt", dt)):
        if not math.isfinite(v) or v <= 0: raise DomainError(f"{name} must be finite and > 0, got {v}")
    return max(1, round(t_end / dt))

def share_path(s0: float, params: ReplicatorParams, n_steps: int, dt: float, rhs: Callable[[float], float] = None) -> List[float]:
    """Classical fixed-step RK4; every step is clamped to [0, 1]. Returns n_steps shares after s0."""
    rhs = rhs or rhs_function(params)
    s, out = s0, []
    half = 0.5 * dt
    for _ in range(n_steps):
        k1 = rhs(s)
        k2 = rhs(s + half * k1)
        k3 = rhs(s + half * k2)
        k4 = rhs(s + dt * k3)
        s = s + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        s = min(max(s, 0.0), 1.0)
        out.append(s)
    return out

def integrate(s0: float, params: ReplicatorParams, t_end: float = DEFAULT_T_END, dt: float = DEFAULT_DT) -> Trajectory:
    check_share(s0, "s0")
    n = step_count(t_end, dt)
    shares = [s0] + share_path(s0, params, n, dt)
    return Trajectory(
        times=[i * dt for i in range(n + 1)],
        shares=shares,
        params_at_t=[RegimeSpan(start_time=0.0, params=params.replicator_params())],
    )

# === EQUILIBRIA ===

def _bracket_root(gap: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Bisects until |gap(root)| <= tol; a steep gap needs a share tolerance well below tol."""
    xtol = tol
    root = bisect(gap, lo, hi, xtol=xtol)
    while abs(gap(root)) > tol and xtol > ROOT_XTOL_FLOOR:
        xtol /= 1024
        root = bisect(gap, lo, hi, xtol=xtol)
    return root

def _classify(x: float, rhs: Callable[[float], float], h: float) -> Stability:
    if x == 0.0:
        right = rhs(h)
        return Stability.STABLE if right < 0 else Stability.UNSTABLE if right > 0 else Stability.SEMISTABLE
    if x == 1.0:
        left = rhs(1.0 - h)
        return Stability.STABLE if left > 0 else Stability.UNSTABLE if left < 0 else Stability.SEMISTABLE
    offset = min(h, x / 2, (1.0 - x) / 2)
    left, right = rhs(x - offset), rhs(x + offset)
    if left > 0 and right < 0: return Stability.STABLE
    if left < 0 and right > 0: return Stability.UNSTABLE
    return Stability.SEMISTABLE

def find_equilibria(params: ReplicatorParams, grid_n: int = EQUILIBRIUM_GRID_N, tol: float = EQUILIBRIUM_TOL) -> EquilibriumSet:
    if grid_n < 16: raise DomainError(f"grid_n must be >= 16, got {grid_n}")
    if not tol > 0: raise DomainError(f"tol must be > 0, got {tol}")
    gap, rhs = gap_function(params), rhs_function(params)
    grid = np.linspace(0.0, 1.0, grid_n + 1)
    values = [gap(float(x)) for x in grid]

    roots = []
    for i in range(1, grid_n):
        if values[i] == 0.0: roots.append(float(grid[i]))
    for i in range(grid_n):
        if values[i] * values[i + 1] < 0:
            roots.append(_bracket_root(gap, float(grid[i]), float(grid[i + 1]), tol))
    shares = [0.0] + sorted(r for r in roots if 0.0 < r < 1.0) + [1.0]

    h = 1.0 / grid_n
    points = [EquilibriumPoint(share=x, stability=_classify(x, rhs, h)) for x in shares]
    interior = shares[1:-1]
    return EquilibriumSet(points=points, tipping_share=interior[0] if len(interior) == 1 else None)

def tipping_share(params: ReplicatorParams, tol: float = EQUILIBRIUM_TOL) -> Optional[float]:
    """
    Root of the indifference condition. theta(s) - theta(1 - s) is strictly
    increasing, so a root exists iff gap(0) < 0 < gap(1) and is then unique.
    """
    if not tol > 0: raise DomainError(f"tol must be > 0, got {tol}")
    gap = gap_function(params)
    if not gap(0.0) < 0.0 < gap(1.0):
        logging.debug(f"No tipping share: gap(0)={gap(0.0):.3g}, gap(1)={gap(1.0):.3g}")
        return None
    return _bracket_root(gap, 0.0, 1.0, tol)
