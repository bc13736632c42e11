from ..config import DEFAULT_SEED
from ..models import AbmRequest, CriticalMassCurve, RunConfig
from ..services.population import critical_mass_experiment, run_population
from . import Artifact, CommandRouter

router = CommandRouter()

@router.command("abm", AbmRequest, help="seeded agent simulation, or a critical-mass curve with --share-grid")
def abm_command(req: AbmRequest, run: RunConfig) -> Artifact:
    config = req.population_config(seed=DEFAULT_SEED if run.seed is None else run.seed)
    if req.share_grid is not None:
        points = critical_mass_experiment(config, req.share_grid, replicates=req.replicates)
        return Artifact(
            payload=CriticalMassCurve(replicates=req.replicates, points=points),
            header=["initial_share", "mean_final_share"],
            rows=[(p.initial_share, p.mean_final_share) for p in points],
        )
    result = run_population(config)
    rows = [(i, s, c) for i, (s, c) in enumerate(zip(result.share_path, result.sanction_events))]
    return Artifact(payload=result, header=["round", "share", "sanctions"], rows=rows, plot=result)
