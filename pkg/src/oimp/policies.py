"""Seed-selection policies.

A policy first plays an optional deterministic initialization schedule,
then picks L influencers per round from the :class:`CampaignState`.  Ties
are always broken towards the lowest influencer index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .environments import (
    GAMMA_ONE,
    FatigueEnvironment,
    FatigueFunction,
    GraphEnvironment,
    StarEnvironment,
    UnsupportedEnvironment,
    live_edge_reach,
    sample_live_edges,
    simulate_spread_sizes,
    unwrap,
)
from .estimation import InfluencerStats, fat_ucb_index, new_stats, ucb_index
from .extraction import greedy_mc_im
from .graph import Graph


class ConfigurationError(ValueError):
    """Policy and environment or campaign parameters do not fit together."""


@dataclass
class PolicyDecision:
    selected: tuple[int, ...]
    indices: list[float] | None = None


@dataclass
class CampaignState:
    """Round counter, activated set W and per-influencer statistics."""

    K: int
    t: int = 0
    activated: set[int] = field(default_factory=set)
    stats: list[InfluencerStats] = field(default_factory=list)

    def __post_init__(self):
        if not self.stats:
            self.stats = new_stats(self.K)

    @property
    def reward(self) -> int:
        return len(self.activated)


def _check_kl(K: int, L: int) -> None:
    if not 1 <= L <= K:
        raise ConfigurationError(f"need 1 <= L <= K, got K={K}, L={L}")


def initialize(K: int, L: int) -> list[PolicyDecision]:
    """Play every influencer once, L at a time.

    A short final batch is padded with the lowest-index influencers not
    already in it.
    """
    _check_kl(K, L)
    rounds = []
    for start in range(0, K, L):
        batch = list(range(start, min(start + L, K)))
        pad = (k for k in range(K) if k not in batch)
        while len(batch) < L:
            batch.append(next(pad))
        rounds.append(PolicyDecision(tuple(batch)))
    return rounds


def top_l(scores: Sequence[float], L: int) -> tuple[int, ...]:
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    return tuple(sorted(order[:L]))


def _require_initialized(state: CampaignState) -> None:
    for k, st in enumerate(state.stats):
        if st.pulls < 1:
            raise ConfigurationError(f"influencer {k} has not been played yet")


def gtucb_select(state: CampaignState, t: int, L: int) -> PolicyDecision:
    _require_initialized(state)
    idx = [ucb_index(st, t) for st in state.stats]
    return PolicyDecision(top_l(idx, L), idx)


def fat_gtucb_select(state: CampaignState, t: int, L: int,
                     gamma: FatigueFunction) -> PolicyDecision:
    _require_initialized(state)
    idx = [fat_ucb_index(st, t, gamma) for st in state.stats]
    return PolicyDecision(top_l(idx, L), idx)


def random_select(K: int, L: int, rng: np.random.Generator) -> PolicyDecision:
    _check_kl(K, L)
    return PolicyDecision(tuple(sorted(rng.choice(K, size=L, replace=False).tolist())))


def effective_degrees(graph: Graph, nodes: Sequence[int], activated: set[int]) -> list[float]:
    """Out-degree of each node counting only edges to non-activated targets."""
    return [float(sum(v not in activated for v in graph.out_edges(u)[0].tolist()))
            for u in nodes]


def maxdegree_select(graph: Graph | None, state: CampaignState, L: int,
                     influencers: Sequence[int] | None = None) -> PolicyDecision:
    if graph is None:
        raise UnsupportedEnvironment("max-degree needs a graph-backed environment")
    nodes = list(range(state.K)) if influencers is None else influencers
    deg = effective_degrees(graph, nodes, state.activated)
    return PolicyDecision(top_l(deg, L), deg)


def oracle_select(env, state: CampaignState, L: int, mc_samples: int,
                  rng: np.random.Generator, fatigue_aware: bool = True) -> PolicyDecision:
    """Pick the influencers with the largest true remaining potential.

    On a star environment the potentials are exact.  On a graph the choice
    is greedy Monte-Carlo influence maximisation over the influencer nodes,
    with already activated nodes counting for nothing.  When the
    environment is fatigued and ``fatigue_aware`` is set, each influencer's
    value is scaled by gamma of its next pull.
    """
    gamma = env.gamma if isinstance(env, FatigueEnvironment) and fatigue_aware else GAMMA_ONE
    base = unwrap(env)
    scale = [gamma(st.pulls + 1) for st in state.stats]
    if isinstance(base, StarEnvironment):
        pot = [s * base.remaining(k, state.activated) for k, s in enumerate(scale)]
        return PolicyDecision(top_l(pot, L), pot)
    if isinstance(base, GraphEnvironment):
        if gamma.is_constant_one:
            res = greedy_mc_im(base.graph, L, base.model, mc_samples, state.activated, rng,
                               candidates=base.influencers)
            where = {u: k for k, u in enumerate(base.influencers)}
            return PolicyDecision(tuple(sorted(where[u] for u in res.influencers)), res.scores)
        # fatigue: rank single-seed expected gains, scaled by gamma
        sizes = simulate_spread_sizes(base.graph, [[u] for u in base.influencers], mc_samples,
                                      base.model, rng, discount=state.activated)
        pot = [s * m for s, m in zip(scale, sizes.mean(axis=1).tolist())]
        return PolicyDecision(top_l(pot, L), pot)
    raise UnsupportedEnvironment("oracle needs a star or graph environment")


# ----------------------------------------------------------- policy objects

class Policy:
    name = "policy"
    uses_initialization = False

    def schedule(self, K: int, L: int) -> list[PolicyDecision]:
        _check_kl(K, L)
        return initialize(K, L) if self.uses_initialization else []

    def reset(self) -> None:
        """Forget anything cached from a previous run."""

    def select(self, state: CampaignState, t: int, L: int,
               rng: np.random.Generator) -> PolicyDecision:
        raise NotImplementedError


class GTUCB(Policy):
    name = "gt-ucb"
    uses_initialization = True

    def select(self, state, t, L, rng):
        return gtucb_select(state, t, L)


class FatGTUCB(Policy):
    name = "fat-gt-ucb"
    uses_initialization = True

    def __init__(self, gamma: FatigueFunction = GAMMA_ONE):
        self.gamma = gamma

    def select(self, state, t, L, rng):
        return fat_gtucb_select(state, t, L, self.gamma)


class RandomPolicy(Policy):
    name = "random"

    def select(self, state, t, L, rng):
        return random_select(state.K, L, rng)


class MaxDegreePolicy(Policy):
    name = "max-degree"

    def __init__(self, env):
        base = unwrap(env)
        if not isinstance(base, GraphEnvironment):
            raise ConfigurationError("max-degree needs a graph-backed environment (ic or lt)")
        self.graph = base.graph
        self.influencers = base.influencers

    def select(self, state, t, L, rng):
        return maxdegree_select(self.graph, state, L, self.influencers)


def reach_select(reach: np.ndarray, state: CampaignState, L: int,
                 scale: Sequence[float] | None = None) -> PolicyDecision:
    """Greedy choice from precomputed reachable sets, shape (K, worlds, nodes).

    The gain of an influencer is the mean number of nodes it reaches that
    are neither activated nor covered by the influencers already chosen.
    With ``scale`` each influencer is ranked alone by its scaled gain.
    """
    K, worlds, n = reach.shape
    fresh = np.ones(n, dtype=bool)
    if state.activated:
        fresh[np.fromiter(state.activated, dtype=np.int64)] = False
    if scale is not None:
        gains = (reach & fresh).sum(axis=2).mean(axis=1)
        pot = [float(s * x) for s, x in zip(scale, gains)]
        return PolicyDecision(top_l(pot, L), pot)
    covered = np.zeros((worlds, n), dtype=bool)
    chosen: list[int] = []
    first = None
    for _ in range(L):
        gains = (reach & (fresh & ~covered)).sum(axis=2).mean(axis=1)
        gains[chosen] = -1.0
        if first is None:
            first = gains.tolist()
        k = int(np.argmax(gains))  # first maximum, so ties go to the lowest index
        chosen.append(k)
        covered |= reach[k]
    return PolicyDecision(tuple(sorted(chosen)), first)


class OraclePolicy(Policy):
    """Ground-truth policy.

    On graph environments it samples ``mc_samples`` live-edge worlds once per
    run and reuses them every round, the way pruned Monte-Carlo solvers do;
    if the reachability tensor would be too large it falls back to fresh
    simulations each round.
    """

    name = "oracle"
    max_cells = 100_000_000

    def __init__(self, env, mc_samples: int = 200, fatigue_aware: bool = True):
        if not isinstance(unwrap(env), (StarEnvironment, GraphEnvironment)):
            raise ConfigurationError("oracle needs a star or graph environment")
        self.env = env
        self.mc_samples = mc_samples
        self.fatigue_aware = fatigue_aware
        self._reach = None

    def reset(self):
        self._reach = None

    def select(self, state, t, L, rng):
        base = unwrap(self.env)
        cells = base.K * self.mc_samples * getattr(getattr(base, "graph", None), "node_count", 0)
        if not isinstance(base, GraphEnvironment) or cells > self.max_cells:
            return oracle_select(self.env, state, L, self.mc_samples, rng, self.fatigue_aware)
        if self._reach is None:
            live = sample_live_edges(base.graph, self.mc_samples, base.model, rng)
            self._reach = live_edge_reach(base.graph, base.influencers, live)
        gamma = self.env.gamma if isinstance(self.env, FatigueEnvironment) and self.fatigue_aware else GAMMA_ONE
        scale = None if gamma.is_constant_one else [gamma(st.pulls + 1) for st in state.stats]
        return reach_select(self._reach, state, L, scale)


POLICY_NAMES = ("gt-ucb", "fat-gt-ucb", "random", "max-degree", "oracle")


def make_policy(name: str, env, gamma: FatigueFunction = GAMMA_ONE,
                mc_samples: int = 200, oracle_fatigue_aware: bool = True) -> Policy:
    if name == "gt-ucb":
        return GTUCB()
    if name == "fat-gt-ucb":
        return FatGTUCB(gamma)
    if name == "random":
        return RandomPolicy()
    if name == "max-degree":
        return MaxDegreePolicy(env)
    if name == "oracle":
        return OraclePolicy(env, mc_samples, oracle_fatigue_aware)
    raise ConfigurationError(f"unknown policy {name!r}; valid: {', '.join(POLICY_NAMES)}")


def init_rounds(K: int, L: int) -> int:
    return math.ceil(K / L)
