from ..models import CalibrateRequest, RunConfig
from ..services.calibration import fit_replicator, load_series
from . import Artifact, CommandRouter

router = CommandRouter()

@router.command("calibrate", CalibrateRequest, help="least-squares fit of replicator parameters to a share series")
def calibrate_command(req: CalibrateRequest, run: RunConfig) -> Artifact:
    series = load_series(req.series)
    result = fit_replicator(series, set(req.free), req.bounds, req.replicator_params(), dt=req.dt)
    path = result.fitted_path
    return Artifact(
        payload=result,
        header=["period", "share"],
        rows=[(p.period, p.share) for p in path.points],
        plot=path,
    )
