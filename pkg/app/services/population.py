"""
Seeded agent simulation of the repeated stay-or-switch game.

Each round a fraction revision_rate of agents revises against a snapshot of the
current shares, then every incumbent user faces a sanction draw. Randomness
comes from numpy 2.x PCG64 via default_rng and SeedSequence (numpy is pinned
below 3 in pyproject.toml): stream 0 of the config seed drives the
rounds, stream i + 1 draws agent i's parameters.
"""
import logging
from typing import List, Tuple
from concurrent.futures import ThreadPoolExecutor
import numpy as np

from ..config import WORKER_THREADS
from ..errors import DomainError
from ..models import (
    AgentState, BaselineParams, CriticalMassPoint, Decision, PopulationConfig,
    RevisionProtocol, SimulationRun, System
)
from .model_core import optimal_effort, switch_decision, switching_gap

DECISION_SIGN = {Decision.SWITCH: 1, Decision.STAY: -1, Decision.INDIFFERENT: 0}

def _agent_params(config: PopulationConfig, streams: List[np.random.SeedSequence]) -> Tuple[List[BaselineParams], np.ndarray]:
    """Per-agent parameter records plus each agent's index into the distinct-record list."""
    if not config.heterogeneity:
        return [config.base], np.zeros(config.n_agents, dtype=np.int64)
    fields = sorted(config.heterogeneity, key=lambda f: f.value)
    records = []
    for i in range(config.n_agents):
        rng = np.random.default_rng(streams[i + 1])
        update = {}
        for f in fields:
            centre, width = getattr(config.base, f.value), config.heterogeneity[f]
            update[f.value] = float(rng.uniform(centre - width, centre + width))
        records.append(BaselineParams.model_validate({**config.base.model_dump(), **update}))
    return records, np.arange(config.n_agents, dtype=np.int64)

class Population:
    """Vectorised agent state; parameter records are shared between identical agents."""

    def __init__(self, config: PopulationConfig):
        self.config = config
        streams = np.random.SeedSequence(config.seed).spawn(config.n_agents + 1 if config.heterogeneity else 1)
        self.rng = np.random.default_rng(streams[0])
        self.records, self.group = _agent_params(config, streams)

        n = config.n_agents
        self.p0 = np.array([r.p0 for r in self.records])[self.group]
        self.alpha = np.array([r.alpha_mit for r in self.records])[self.group]
        self.k = np.array([r.k for r in self.records])[self.group]
        self.epsilon = np.array([r.epsilon for r in self.records])[self.group]
        self.loss = np.array([r.loss for r in self.records])[self.group]
        self.theta = np.array([r.theta for r in self.records])[self.group]

        # First floor(n * share) agents start on the alternative
        self.on_alt = np.zeros(n, dtype=bool)
        self.on_alt[: int(np.floor(n * config.initial_share_alt))] = True
        self.effort = np.zeros(n)
        self.cum_payoff = np.zeros(n)
        self.sanctioned = np.zeros(n, dtype=np.int64)

        share = self.share_alt()
        incumbents = np.flatnonzero(~self.on_alt)
        if incumbents.size:
            e_star, _, _ = self._responses(np.unique(self.group[incumbents]), share)
            self.effort[incumbents] = e_star[self.group[incumbents]]

    def share_alt(self) -> float:
        return float(np.count_nonzero(self.on_alt)) / self.config.n_agents

    def _responses(self, groups: np.ndarray, share: float):
        """Optimal effort, decision sign and switching gap per record, evaluated at the current shares."""
        size = len(self.records)
        e_star, sign, gap = np.zeros(size), np.zeros(size, dtype=np.int64), np.zeros(size)
        for g in groups:
            params = self.records[g].model_copy(update={"n_s": 1.0 - share, "n_a": share})
            e_star[g] = optimal_effort(params).e_star
            sign[g] = DECISION_SIGN[switch_decision(params)]
            gap[g] = switching_gap(params)
        return e_star, sign, gap

    def step(self) -> int:
        cfg, n = self.config, self.config.n_agents
        share = self.share_alt()
        snapshot = self.on_alt.copy()

        revising = np.flatnonzero(self.rng.random(n) < cfg.revision_rate)
        if revising.size:
            groups = np.unique(self.group[revising])
            e_star, sign, gap = self._responses(groups, share)
            g = self.group[revising]
            if cfg.protocol == RevisionProtocol.BEST_RESPONSE:
                to_alt = np.where(sign[g] > 0, True, np.where(sign[g] < 0, False, snapshot[revising]))
            else:
                model = self.rng.integers(0, n, size=revising.size)
                u = self.rng.random(revising.size)
                # Advantage of the sampled agent's system over one's own
                advantage = np.where(snapshot[model], gap[g], -gap[g])
                prob = np.clip(advantage / cfg.imitation_scale, 0.0, 1.0)
                adopt = (snapshot[model] != snapshot[revising]) & (u < prob)
                to_alt = np.where(adopt, snapshot[model], snapshot[revising])
            self.on_alt[revising] = to_alt
            self.effort[revising] = np.where(to_alt, 0.0, e_star[g])

        share = self.share_alt()
        inc = ~self.on_alt
        p = np.clip(self.p0 - self.alpha * self.effort, 0.0, 1.0)
        hit = inc & (self.rng.random(n) < p)
        cost = 0.5 * self.k * self.effort ** 2
        incumbent_pay = 1.0 + self.theta * (1.0 - share) + np.where(hit, -self.loss, self.epsilon) - cost
        self.cum_payoff += np.where(inc, incumbent_pay, 1.0 + self.theta * share)
        self.sanctioned += hit
        return int(np.count_nonzero(hit))

    def agents(self) -> List[AgentState]:
        return [
            AgentState(
                params=self.records[self.group[i]],
                system=System.ALTERNATIVE if self.on_alt[i] else System.INCUMBENT,
                effort=float(self.effort[i]),
                cum_payoff=float(self.cum_payoff[i]),
                sanctioned_count=int(self.sanctioned[i]),
            )
            for i in range(self.config.n_agents)
        ]

def run_population(config: PopulationConfig) -> SimulationRun:
    pop = Population(config)
    shares, sanctions = [pop.share_alt()], [0]
    for _ in range(config.rounds):
        sanctions.append(pop.step())
        shares.append(pop.share_alt())
    logging.debug(f"Population run seed={config.seed}: share {shares[0]:.3f} -> {shares[-1]:.3f}")
    return SimulationRun(
        rounds=config.rounds,
        share_path=shares,
        sanction_events=sanctions,
        final_share=shares[-1],
        seed=config.seed,
        agents=pop.agents() if config.record_agents else [],
    )

def derived_seeds(seed: int, count: int) -> List[int]:
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(count)]

def critical_mass_experiment(config: PopulationConfig, share_grid: List[float], replicates: int = 1) -> List[CriticalMassPoint]:
    """Adoption S-curve: mean final alternative share against the initial share."""
    if replicates < 1: raise DomainError(f"replicates must be >= 1, got {replicates}")
    for s in share_grid:
        if not 0.0 <= s <= 1.0: raise DomainError(f"share_grid values must lie in [0, 1], got {s}")
    seeds = derived_seeds(config.seed, len(share_grid) * replicates)
    configs = [
        config.model_copy(update={"initial_share_alt": float(s), "seed": seeds[i * replicates + r]})
        for i, s in enumerate(share_grid) for r in range(replicates)
    ]
    logging.info(f"Critical-mass experiment: {len(share_grid)} initial shares x {replicates} replicates")
    with ThreadPoolExecutor(WORKER_THREADS) as pool:
        finals = [run.final_share for run in pool.map(run_population, configs)]
    return [
        CriticalMassPoint(initial_share=float(s), mean_final_share=float(np.mean(finals[i * replicates:(i + 1) * replicates])))
        for i, s in enumerate(share_grid)
    ]
