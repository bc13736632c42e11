from ..models import BaselineParams, RunConfig, ThresholdRequest
from ..services.model_core import critical_threshold, optimal_effort
from . import Artifact, CommandRouter, record_rows

router = CommandRouter()

@router.command("effort", BaselineParams, help="optimal mitigation effort on the incumbent system")
def effort_command(req: BaselineParams, run: RunConfig) -> Artifact:
    solution = optimal_effort(req.baseline_params())
    return Artifact(payload=solution, header=["field", "value"], rows=record_rows(solution))

@router.command("threshold", ThresholdRequest, help="critical sanction probability p* and the stay/switch decision")
def threshold_command(req: ThresholdRequest, run: RunConfig) -> Artifact:
    result = critical_threshold(req.baseline_params(), fast=req.fast)
    return Artifact(payload=result, header=["field", "value"], rows=record_rows(result))
