import re
from typing import Any, Dict, List, Optional, Tuple
from enum import Enum
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_DT, DEFAULT_T_END, DEFAULT_REVISION_RATE, DEFAULT_SEED,
    EQUILIBRIUM_GRID_N, EQUILIBRIUM_TOL, FIT_MIN_POINTS
)

RECORD = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)
SEED_MAX = 2**64 - 1

class Decision(str, Enum):
    STAY = "Stay"
    SWITCH = "Switch"
    INDIFFERENT = "Indifferent"

class BoundaryHit(str, Enum):
    NONE = "none"
    LOWER = "lower"
    UPPER = "upper"

class RangeFlag(str, Enum):
    IN_RANGE = "InRange"
    BELOW = "Below"  # switching dominates even at p0 = 0
    ABOVE = "Above"  # staying dominates even at p0 = 1

class Stability(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    SEMISTABLE = "Semistable"

class TippingDirection(str, Enum):
    ABOVE_TO_BELOW = "AboveToBelow"
    BELOW_TO_ABOVE = "BelowToAbove"

class System(str, Enum):
    INCUMBENT = "Incumbent"
    ALTERNATIVE = "Alternative"

class RevisionProtocol(str, Enum):
    BEST_RESPONSE = "best_response"
    IMITATION = "imitation"

class HeterogeneousField(str, Enum):
    P0 = "p0"
    ALPHA_MIT = "alpha_mit"
    K = "k"
    EPSILON = "epsilon"
    LOSS = "loss"
    THETA = "theta"

class CommandName(str, Enum):
    EFFORT = "effort"
    THRESHOLD = "threshold"
    EQUILIBRIA = "equilibria"
    SIMULATE = "simulate"
    SCENARIO = "scenario"
    SWEEP = "sweep"
    HYSTERESIS = "hysteresis"
    ABM = "abm"
    CALIBRATE = "calibrate"

class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"

# === BASELINE MODEL ===

class BaselineParams(BaseModel):
    """Single-agent stay-or-switch parameters. N_S and N_A are independent inputs."""
    model_config = RECORD

    p0: float = Field(ge=0, le=1)
    alpha_mit: float = Field(ge=0)
    k: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    loss: float = Field(gt=0)
    theta: float = Field(ge=0)
    n_s: float = Field(default=1.0, ge=0, le=1)
    n_a: float = Field(default=0.0, ge=0, le=1)

    def baseline_params(self) -> "BaselineParams":
        return BaselineParams(**self.model_dump(include=set(BaselineParams.model_fields)))

class EffortSolution(BaseModel):
    model_config = RECORD

    e_star: float = Field(ge=0)
    p_at_e_star: float = Field(ge=0, le=1)
    eu_s_star: float
    boundary_hit: BoundaryHit

class ThresholdResult(BaseModel):
    model_config = RECORD

    p_star: Optional[float] = Field(default=None, ge=0, le=1)
    range_flag: RangeFlag
    decision_at_p0: Decision
    eu_gap: float

    @model_validator(mode="after")
    def check_flag(self):
        if (self.p_star is None) == (self.range_flag == RangeFlag.IN_RANGE):
            raise ValueError("p_star must be set exactly when range_flag is InRange")
        return self

# === REPLICATOR MODEL ===

class ReplicatorParams(BaseModel):
    """Endogenous-network parameters; alpha_net is the network scale, alpha_mit the mitigation slope."""
    model_config = RECORD

    alpha_net: float = Field(gt=0)
    gamma: float = Field(gt=1)
    p0: float = Field(ge=0, le=1)
    alpha_mit: float = Field(ge=0)
    k: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    loss: float = Field(gt=0)

    def replicator_params(self) -> "ReplicatorParams":
        return ReplicatorParams(**self.model_dump(include=set(ReplicatorParams.model_fields)))

    def mitigation_view(self) -> BaselineParams:
        # p(z) and C(z) only read p0, alpha_mit and k
        return BaselineParams(
            p0=self.p0, alpha_mit=self.alpha_mit, k=self.k,
            epsilon=self.epsilon, loss=self.loss, theta=0.0
        )

class OptimalZ(BaseModel):
    model_config = RECORD

    z_star: float = Field(ge=0)
    p_at_z: float = Field(ge=0, le=1)
    cost_at_z: float = Field(ge=0)
    constant_term: float

class EquilibriumPoint(BaseModel):
    model_config = RECORD

    share: float = Field(ge=0, le=1)
    stability: Stability

class EquilibriumSet(BaseModel):
    model_config = RECORD

    points: List[EquilibriumPoint]
    tipping_share: Optional[float] = Field(default=None, ge=0, le=1)

    @field_validator("points")
    @classmethod
    def check_points(cls, v):
        shares = [p.share for p in v]
        if shares != sorted(shares): raise ValueError("points must be sorted by share")
        if not shares or shares[0] != 0.0 or shares[-1] != 1.0:
            raise ValueError("boundary fixed points 0 and 1 must be present")
        return v

    def interior(self) -> List[EquilibriumPoint]:
        return [p for p in self.points if 0.0 < p.share < 1.0]

class RegimeSpan(BaseModel):
    model_config = RECORD

    start_time: float = Field(ge=0)
    params: ReplicatorParams

class Trajectory(BaseModel):
    model_config = RECORD

    times: List[float]
    shares: List[float]
    params_at_t: List[RegimeSpan] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_path(self):
        if len(self.times) != len(self.shares):
            raise ValueError("times and shares must have equal length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if any(not 0.0 <= s <= 1.0 for s in self.shares):
            raise ValueError("shares must lie in [0, 1]")
        return self

    @property
    def final_share(self) -> float:
        return self.shares[-1]

# === SCENARIOS ===

class ShockEvent(BaseModel):
    model_config = RECORD

    time: float = Field(ge=0)
    field: str
    value: float

    @field_validator("field")
    @classmethod
    def check_field(cls, v):
        if v not in ReplicatorParams.model_fields:
            raise ValueError(f"unknown parameter '{v}'")
        return v

class ShockSchedule(BaseModel):
    model_config = RECORD

    events: List[ShockEvent] = Field(default_factory=list)

    @field_validator("events")
    @classmethod
    def check_order(cls, v):
        if any(b.time <= a.time for a, b in zip(v, v[1:])):
            raise ValueError("event times must be strictly increasing")
        return v

class TippingEvent(BaseModel):
    model_config = RECORD

    time: float
    direction: TippingDirection

class ScenarioResult(BaseModel):
    model_config = RECORD

    trajectory: Trajectory
    tipping_events: List[TippingEvent]
    long_run_share: float = Field(ge=0, le=1)
    regime_equilibria: List[EquilibriumSet]

class BifurcationSample(BaseModel):
    model_config = RECORD

    value: float
    equilibria: EquilibriumSet

class BifurcationDiagram(BaseModel):
    model_config = RECORD

    parameter: str
    samples: List[BifurcationSample]

    @field_validator("samples")
    @classmethod
    def check_order(cls, v):
        if any(b.value < a.value for a, b in zip(v, v[1:])):
            raise ValueError("samples must be ordered by value")
        return v

class HysteresisRow(BaseModel):
    model_config = RECORD

    value: float
    up_share: float = Field(ge=0, le=1)
    down_share: float = Field(ge=0, le=1)

# === POPULATION SIMULATION ===

class PopulationConfig(BaseModel):
    model_config = RECORD

    n_agents: int = Field(ge=2)
    revision_rate: float = Field(default=DEFAULT_REVISION_RATE, gt=0, le=1)
    rounds: int = Field(ge=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=SEED_MAX)
    base: BaselineParams
    heterogeneity: Optional[Dict[HeterogeneousField, float]] = None
    initial_share_alt: float = Field(default=0.0, ge=0, le=1)
    protocol: RevisionProtocol = RevisionProtocol.BEST_RESPONSE
    imitation_scale: float = Field(default=1.0, gt=0)
    record_agents: bool = False

    @model_validator(mode="after")
    def check_heterogeneity(self):
        for name, width in (self.heterogeneity or {}).items():
            if width < 0: raise ValueError(f"heterogeneity.{name.value}: width must be >= 0")
            centre = getattr(self.base, name.value)
            for edge in (centre - width, centre + width):
                try:
                    self.base.model_validate({**self.base.model_dump(), name.value: edge})
                except ValueError:
                    raise ValueError(f"heterogeneity.{name.value}: draw range [{centre - width}, {centre + width}] leaves the valid domain")
        return self

class AgentState(BaseModel):
    model_config = RECORD

    params: BaselineParams
    system: System
    effort: float = Field(ge=0)
    cum_payoff: float
    sanctioned_count: int = Field(ge=0)

    @model_validator(mode="after")
    def check_effort(self):
        if self.system == System.ALTERNATIVE and self.effort != 0.0:
            raise ValueError("agents on the alternative system exert no effort")
        return self

class SimulationRun(BaseModel):
    model_config = RECORD

    rounds: int = Field(ge=0)
    share_path: List[float]
    sanction_events: List[int]
    final_share: float = Field(ge=0, le=1)
    seed: int = Field(ge=0, le=SEED_MAX)
    agents: List[AgentState] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.share_path) != self.rounds + 1 or len(self.sanction_events) != self.rounds + 1:
            raise ValueError("share_path and sanction_events must hold rounds + 1 entries")
        if any(not 0.0 <= s <= 1.0 for s in self.share_path):
            raise ValueError("shares must lie in [0, 1]")
        return self

class CriticalMassPoint(BaseModel):
    model_config = RECORD

    initial_share: float = Field(ge=0, le=1)
    mean_final_share: float = Field(ge=0, le=1)

# === CALIBRATION ===

PERIOD_RE = re.compile(r"^(\d{4})(?:-?Q([1-4]))?$")

def period_ordinal(period: str) -> Tuple[str, int]:
    """Maps "2018" to ("year", 2018) and "2018-Q3"/"2018Q3" to ("quarter", 4*2018 + 2)."""
    m = PERIOD_RE.match(period.strip())
    if not m: raise ValueError(f"unrecognised period '{period}'")
    year, quarter = int(m.group(1)), m.group(2)
    if quarter is None: return "year", year
    return "quarter", 4 * year + int(quarter) - 1

class SeriesPoint(BaseModel):
    model_config = RECORD

    period: str
    share: float = Field(ge=0, le=1)

class ShareSeries(BaseModel):
    model_config = RECORD

    label: str
    points: List[SeriesPoint]

    @field_validator("points")
    @classmethod
    def check_points(cls, v):
        if len(v) < FIT_MIN_POINTS:
            raise ValueError(f"too few points: {len(v)} < {FIT_MIN_POINTS}")
        keys = [period_ordinal(p.period) for p in v]
        if len({kind for kind, _ in keys}) > 1:
            raise ValueError("periods mix years and quarters")
        if any(b[1] <= a[1] for a, b in zip(keys, keys[1:])):
            raise ValueError("periods must be strictly increasing")
        return v

    def offsets(self) -> List[int]:
        """Elapsed periods since the first observation (one period = one time unit)."""
        ords = [period_ordinal(p.period)[1] for p in self.points]
        return [o - ords[0] for o in ords]

    def shares(self) -> List[float]:
        return [p.share for p in self.points]

class CalibrationResult(BaseModel):
    model_config = RECORD

    fitted: Dict[str, float]
    sse: float = Field(ge=0)
    fitted_path: ShareSeries
    grid_trace: int = Field(ge=0)
    pass_sse: List[float] = Field(default_factory=list)
    failed_points: int = Field(default=0, ge=0)

# === COMMAND REQUESTS ===

class ThresholdRequest(BaselineParams):
    fast: bool = False

class EquilibriaRequest(ReplicatorParams):
    grid_n: int = Field(default=EQUILIBRIUM_GRID_N, ge=16)
    tol: float = Field(default=EQUILIBRIUM_TOL, gt=0)

class SimulateRequest(ReplicatorParams):
    s0: float = Field(ge=0, le=1)
    t_end: float = Field(default=DEFAULT_T_END, gt=0)
    dt: float = Field(default=DEFAULT_DT, gt=0)

class ScenarioRequest(SimulateRequest):
    shocks: List[ShockEvent] = Field(default_factory=list)

class SweepRequest(ReplicatorParams):
    parameter: str
    lo: float
    hi: float
    n: int = Field(default=11, ge=2)
    grid_n: int = Field(default=EQUILIBRIUM_GRID_N, ge=16)
    tol: float = Field(default=EQUILIBRIUM_TOL, gt=0)

class HysteresisRequest(ReplicatorParams):
    parameter: str
    lo: float
    hi: float
    n: int = Field(default=11, ge=2)
    relax_t: float = Field(default=50.0, gt=0)
    s0: float = Field(default=0.01, ge=0, le=1)
    dt: float = Field(default=DEFAULT_DT, gt=0)

class AbmRequest(BaselineParams):
    n_agents: int = Field(default=1000, ge=2)
    revision_rate: float = Field(default=DEFAULT_REVISION_RATE, gt=0, le=1)
    rounds: int = Field(default=200, ge=0)
    initial_share_alt: float = Field(default=0.0, ge=0, le=1)
    heterogeneity: Optional[Dict[HeterogeneousField, float]] = None
    protocol: RevisionProtocol = RevisionProtocol.BEST_RESPONSE
    imitation_scale: float = Field(default=1.0, gt=0)
    share_grid: Optional[List[float]] = None
    replicates: int = Field(default=1, ge=1)

    def population_config(self, seed: int) -> PopulationConfig:
        return PopulationConfig(
            n_agents=self.n_agents, revision_rate=self.revision_rate, rounds=self.rounds,
            seed=seed, base=self.baseline_params(), heterogeneity=self.heterogeneity,
            initial_share_alt=self.initial_share_alt, protocol=self.protocol,
            imitation_scale=self.imitation_scale
        )

class CalibrateRequest(ReplicatorParams):
    series: str
    free: List[str] = Field(default_factory=list)
    bounds: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    dt: float = Field(default=DEFAULT_DT, gt=0)

class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: CommandName
    params: Dict[str, Any] = Field(default_factory=dict)
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    seed: Optional[int] = Field(default=None, ge=0, le=SEED_MAX)
    plot: Optional[str] = None

# === REPORTS ===

class ScenarioSummary(BaseModel):
    model_config = RECORD

    tipping_events: List[TippingEvent]
    long_run_share: float = Field(ge=0, le=1)
    regime_equilibria: List[EquilibriumSet]
    regimes: List[RegimeSpan]

class HysteresisScan(BaseModel):
    model_config = RECORD

    parameter: str
    rows: List[HysteresisRow]
    jumps: List[float]

class CriticalMassCurve(BaseModel):
    model_config = RECORD

    replicates: int = Field(ge=1)
    points: List[CriticalMassPoint]
