import logging
from typing import List, Optional, Tuple
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from pydantic import ValidationError

from ..config import DEFAULT_DT, EQUILIBRIUM_GRID_N, EQUILIBRIUM_TOL, HYSTERESIS_JUMP, WORKER_THREADS
from ..errors import DomainError, ScheduleError
from ..models import (
    BifurcationDiagram, BifurcationSample, HysteresisRow, RegimeSpan, ReplicatorParams,
    ScenarioResult, ShockSchedule, TippingDirection, TippingEvent, Trajectory
)
from .replicator import check_share, find_equilibria, rhs_function, share_path, step_count, tipping_share

# === HELPERS ===

def with_value(params: ReplicatorParams, field: str, value: float) -> ReplicatorParams:
    """Copy of params with one field replaced, re-validated (model_copy alone skips validation)."""
    if field not in ReplicatorParams.model_fields:
        raise ScheduleError(f"unknown parameter '{field}'")
    try:
        return ReplicatorParams.model_validate({**params.replicator_params().model_dump(), field: float(value)})
    except ValidationError as e:
        raise ScheduleError(f"{field}={value} is invalid: {e.errors()[0]['msg']}") from e

def validate_against(schedule: ShockSchedule, base: ReplicatorParams) -> List[ReplicatorParams]:
    """Parameter regime after each event, checked before any integration starts."""
    regimes, current = [], base.replicator_params()
    for event in schedule.events:
        current = with_value(current, event.field, event.value)
        regimes.append(current)
    return regimes

def _side(s: float, tip: Optional[float]) -> Optional[int]:
    if tip is None: return None
    return 1 if s > tip else -1 if s < tip else 0

def _check_range(parameter: str, lo: float, hi: float, n: int):
    if parameter not in ReplicatorParams.model_fields:
        raise DomainError(f"unknown parameter '{parameter}'")
    if not lo < hi: raise DomainError(f"lo must be < hi, got lo={lo}, hi={hi}")
    if n < 2: raise DomainError(f"n must be >= 2, got {n}")

def _sample_params(base: ReplicatorParams, parameter: str, lo: float, hi: float, n: int) -> List[Tuple[float, ReplicatorParams]]:
    samples = []
    for i, value in enumerate(np.linspace(lo, hi, n)):
        try:
            samples.append((float(value), with_value(base, parameter, float(value))))
        except ScheduleError as e:
            raise DomainError(f"sample {i} ({parameter}={float(value)}): {e}") from e
    return samples

# === SCENARIOS ===

def run_scenario(s0: float, base: ReplicatorParams, schedule: ShockSchedule, t_end: float, dt: float = DEFAULT_DT) -> ScenarioResult:
    check_share(s0, "s0")
    n_total = step_count(t_end, dt)
    regimes = validate_against(schedule, base)

    # Event times snap to the nearest step boundary
    starts = [0]
    params_list = [base.replicator_params()]
    for event, params in zip(schedule.events, regimes):
        step = round(event.time / dt)
        if step >= n_total:
            raise ScheduleError(f"shock at t={event.time} is not before t_end={t_end}")
        if step == starts[-1]:
            if step == 0 and len(starts) == 1:
                params_list[0] = params
                continue
            raise ScheduleError(f"shock at t={event.time} snaps onto the previous event step (dt={dt})")
        starts.append(step)
        params_list.append(params)
        logging.info(f"Shock at step {step} (t={step * dt:g}): {event.field} -> {event.value}")
    bounds = starts[1:] + [n_total]

    shares = [s0]
    regime_of_step = [0]
    for r, (params, a, b) in enumerate(zip(params_list, starts, bounds)):
        shares.extend(share_path(shares[-1], params, b - a, dt, rhs=rhs_function(params)))
        regime_of_step.extend([r] * (b - a))
    times = [i * dt for i in range(n_total + 1)]

    # Side of the governing regime's tipping share; a shock can flip it without the share moving
    tips = [tipping_share(p) for p in params_list]
    for i, a in enumerate(starts[1:], start=1):
        regime_of_step[a] = i
    events = []
    prev = _side(s0, tips[0])
    for i in range(1, n_total + 1):
        side = _side(shares[i], tips[regime_of_step[i]])
        if side is None:
            prev = None
            continue
        if side == 0: continue
        if prev is not None and prev != 0 and side != prev:
            direction = TippingDirection.BELOW_TO_ABOVE if side > 0 else TippingDirection.ABOVE_TO_BELOW
            events.append(TippingEvent(time=times[i], direction=direction))
        prev = side

    trajectory = Trajectory(
        times=times,
        shares=shares,
        params_at_t=[RegimeSpan(start_time=a * dt, params=p) for p, a in zip(params_list, starts)],
    )
    return ScenarioResult(
        trajectory=trajectory,
        tipping_events=events,
        long_run_share=shares[-1],
        regime_equilibria=[find_equilibria(p) for p in params_list],
    )

# === SWEEPS ===

def sweep(base: ReplicatorParams, parameter: str, lo: float, hi: float, n: int,
          grid_n: int = EQUILIBRIUM_GRID_N, tol: float = EQUILIBRIUM_TOL) -> BifurcationDiagram:
    _check_range(parameter, lo, hi, n)
    samples = _sample_params(base, parameter, lo, hi, n)
    logging.info(f"Sweeping {parameter} over [{lo}, {hi}] with {n} samples")
    with ThreadPoolExecutor(WORKER_THREADS) as pool:
        sets = list(pool.map(lambda item: find_equilibria(item[1], grid_n, tol), samples))
    return BifurcationDiagram(
        parameter=parameter,
        samples=[BifurcationSample(value=v, equilibria=eq) for (v, _), eq in zip(samples, sets)],
    )

def hysteresis_scan(base: ReplicatorParams, parameter: str, lo: float, hi: float, n: int, relax_t: float,
                    s0: float = 0.01, dt: float = DEFAULT_DT) -> List[HysteresisRow]:
    """Relax upward through the range, then back down, each step starting from the last relaxed share."""
    _check_range(parameter, lo, hi, n)
    check_share(s0, "s0")
    steps = step_count(relax_t, dt)
    samples = _sample_params(base, parameter, lo, hi, n)

    share, up = s0, []
    for _, params in samples:
        share = share_path(share, params, steps, dt)[-1]
        up.append(share)
    down = [0.0] * n
    for i in reversed(range(n)):
        share = share_path(share, samples[i][1], steps, dt)[-1]
        down[i] = share

    rows = [HysteresisRow(value=v, up_share=u, down_share=d) for (v, _), u, d in zip(samples, up, down)]
    jumps = hysteresis_jumps(rows)
    if jumps: logging.info(f"Hysteresis in {parameter}: branches split at {len(jumps)} of {n} samples")
    return rows

def hysteresis_jumps(rows: List[HysteresisRow], threshold: float = HYSTERESIS_JUMP) -> List[float]:
    return [r.value for r in rows if abs(r.up_share - r.down_share) > threshold]
