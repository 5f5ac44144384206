"""Campaign runner and per-run random streams.

Random streams are split from the base seed with
``SeedSequence(base_seed, spawn_key=key)``:

* ``(0,)`` builds the experiment (synthetic instances, TV weights, extraction);
* ``(1, run, 0)`` drives the environment of replication ``run``;
* ``(1, run, 1)`` drives the policy of replication ``run``;
* ``(1, run, 2)`` and ``(1, run, 3)`` draw per-run instances and oracle
  replays in the waiting-time experiment.

Every policy therefore faces the same environment stream in a given run, and
adding runs never perturbs earlier ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..environments import Environment, Spread
from ..estimation import record_spread
from ..policies import CampaignState, ConfigurationError, Policy, PolicyDecision, init_rounds

log = logging.getLogger(__name__)

SETUP_KEY = (0,)


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def run_streams(seed: int, run: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(environment stream, policy stream) of one replication."""
    return stream(seed, 1, run, 0), stream(seed, 1, run, 1)


@dataclass
class CampaignConfig:
    K: int = 20
    N: int = 200
    L: int = 1
    policy: str = "gt-ucb"
    env: str = "star"
    gamma: str = "one"
    runs: int = 1
    seed: int = 0
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not 1 <= self.L <= self.K:
            raise ConfigurationError(f"need 1 <= L <= K, got K={self.K}, L={self.L}")
        if self.N < 0 or self.runs < 0:
            raise ConfigurationError("N and runs must be non-negative")
        if self.N < init_rounds(self.K, self.L) and self.policy in ("gt-ucb", "fat-gt-ucb"):
            log.warning("budget N=%d is shorter than the %d initialization rounds",
                        self.N, init_rounds(self.K, self.L))


@dataclass
class RoundRecord:
    run: int
    round: int
    policy: str
    influencers: tuple[int, ...]
    spread_size: int
    new_activations: int
    cumulative: int


def iterate_campaign(env: Environment, policy: Policy, K: int, L: int,
                     env_rng: np.random.Generator, policy_rng: np.random.Generator,
                     ) -> Iterator[tuple[CampaignState, PolicyDecision, Spread, int]]:
    """Play rounds forever; yields (state, decision, spread, newly activated count)."""
    if env.K != K:
        raise ConfigurationError(f"environment has {env.K} influencers, config says K={K}")
    env.reset()
    policy.reset()
    state = CampaignState(K)
    schedule = policy.schedule(K, L)
    while True:
        t = state.t + 1
        decision = schedule[t - 1] if t <= len(schedule) else policy.select(state, t, L, policy_rng)
        spread = env.pull(decision.selected, env_rng)
        before = len(state.activated)
        state.activated.update(spread.attribution)
        record_spread(state.stats, spread, decision.selected)
        state.t = t
        yield state, decision, spread, len(state.activated) - before


def run_campaign(config: CampaignConfig, env: Environment, policy: Policy, run: int = 0,
                 rngs: tuple[np.random.Generator, np.random.Generator] | None = None,
                 ) -> list[RoundRecord]:
    """N rounds of ``policy`` on ``env``; deterministic given (config.seed, run)."""
    config.validate()
    env_rng, policy_rng = rngs if rngs is not None else run_streams(config.seed, run)
    records = []
    if config.N == 0:
        return records
    for state, decision, spread, new in iterate_campaign(env, policy, config.K, config.L,
                                                         env_rng, policy_rng):
        records.append(RoundRecord(run, state.t, policy.name, tuple(sorted(decision.selected)),
                                   len(spread), new, state.reward))
        if state.t >= config.N:
            break
    return records


def run_experiment(config: CampaignConfig, env: Environment, policy: Policy) -> list[RoundRecord]:
    """``config.runs`` independent replications, records sorted by (run, round)."""
    records = []
    for run in range(config.runs):
        records.extend(run_campaign(config, env, policy, run))
    records.sort(key=lambda r: (r.run, r.round))
    return records


def final_rewards(records: list[RoundRecord]) -> dict[int, int]:
    last: dict[int, int] = {}
    for r in records:
        last[r.run] = r.cumulative
    return last
