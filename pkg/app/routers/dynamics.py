from ..models import (
    EquilibriaRequest, HysteresisRequest, HysteresisScan, RunConfig, ScenarioRequest,
    ScenarioSummary, ShockSchedule, SimulateRequest, SweepRequest
)
from ..services.replicator import find_equilibria, integrate
from ..services.scenarios import hysteresis_jumps, hysteresis_scan, run_scenario, sweep
from . import Artifact, CommandRouter

router = CommandRouter()

@router.command("equilibria", EquilibriaRequest, help="fixed points of the replicator dynamic with stability")
def equilibria_command(req: EquilibriaRequest, run: RunConfig) -> Artifact:
    eq = find_equilibria(req.replicator_params(), grid_n=req.grid_n, tol=req.tol)
    rows = [(p.share, p.stability.value) for p in eq.points]
    return Artifact(payload=eq, header=["share", "stability"], rows=rows)

@router.command("simulate", SimulateRequest, help="integrate the replicator dynamic from s0")
def simulate_command(req: SimulateRequest, run: RunConfig) -> Artifact:
    traj = integrate(req.s0, req.replicator_params(), t_end=req.t_end, dt=req.dt)
    return Artifact(payload=traj, header=["time", "share"], rows=list(zip(traj.times, traj.shares)), plot=traj)

@router.command("scenario", ScenarioRequest, help="integrate with scheduled parameter shocks and detect tipping")
def scenario_command(req: ScenarioRequest, run: RunConfig) -> Artifact:
    result = run_scenario(req.s0, req.replicator_params(), ShockSchedule(events=req.shocks), req.t_end, req.dt)
    traj = result.trajectory
    summary = ScenarioSummary(
        tipping_events=result.tipping_events,
        long_run_share=result.long_run_share,
        regime_equilibria=result.regime_equilibria,
        regimes=traj.params_at_t,
    )
    return Artifact(payload=summary, header=["time", "share"], rows=list(zip(traj.times, traj.shares)), plot=traj)

@router.command("sweep", SweepRequest, help="bifurcation diagram over one parameter")
def sweep_command(req: SweepRequest, run: RunConfig) -> Artifact:
    diagram = sweep(req.replicator_params(), req.parameter, req.lo, req.hi, req.n, grid_n=req.grid_n, tol=req.tol)
    rows = [(s.value, p.share, p.stability.value) for s in diagram.samples for p in s.equilibria.points]
    return Artifact(payload=diagram, header=["value", "share", "stability"], rows=rows, plot=diagram)

@router.command("hysteresis", HysteresisRequest, help="upward then downward relaxation scan over one parameter")
def hysteresis_command(req: HysteresisRequest, run: RunConfig) -> Artifact:
    rows = hysteresis_scan(req.replicator_params(), req.parameter, req.lo, req.hi, req.n, req.relax_t, s0=req.s0, dt=req.dt)
    scan = HysteresisScan(parameter=req.parameter, rows=rows, jumps=hysteresis_jumps(rows))
    return Artifact(
        payload=scan,
        header=["value", "up_share", "down_share"],
        rows=[(r.value, r.up_share, r.down_share) for r in rows],
    )
