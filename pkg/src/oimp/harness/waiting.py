"""Waiting times: the first round at which every influencer's remaining
potential has fallen to a fraction alpha of its first-pull spread."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..environments import (
    GAMMA_ONE,
    FatigueEnvironment,
    FatigueFunction,
    StarEnvironment,
    UnsupportedEnvironment,
    fatigue_filter,
    true_remaining_potential,
)
from ..policies import CampaignState, Policy
from .campaign import iterate_campaign

# smallest influencer spread for which the waiting-time bound is valid
LAMBDA_FLOOR = 13.0


class WaitingTimeExceeded(RuntimeError):
    pass


def _star(env) -> StarEnvironment:
    if not isinstance(env, StarEnvironment):
        raise UnsupportedEnvironment("waiting times need a star environment")
    return env


def first_spreads(env: StarEnvironment, gamma: FatigueFunction = GAMMA_ONE) -> np.ndarray:
    """Expected spread of each influencer's first pull."""
    return gamma(1) * env.lambdas


def measure_waiting_time(env: StarEnvironment, policy: Policy, alpha: float,
                         gamma: FatigueFunction = GAMMA_ONE,
                         rngs: tuple[np.random.Generator, np.random.Generator] | None = None,
                         L: int = 1, max_rounds: int = 1_000_000) -> int:
    """Round at which R_k(t) <= alpha * lambda_k holds for every k under ``policy``."""
    env = _star(env)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    target = alpha * first_spreads(env, gamma)

    def done(activated, stats):
        return all(true_remaining_potential(env, k, activated, gamma, stats[k].pulls + 1) <= target[k]
                   for k in range(env.K))

    empty = CampaignState(env.K)
    if done(empty.activated, empty.stats):
        return 0
    play_env = env if gamma.is_constant_one else FatigueEnvironment(env, gamma)
    env_rng, policy_rng = rngs if rngs is not None else (np.random.default_rng(), np.random.default_rng())
    for state, *_ in iterate_campaign(play_env, policy, env.K, L, env_rng, policy_rng):
        if done(state.activated, state.stats):
            return state.t
        if state.t >= max_rounds:
            raise WaitingTimeExceeded(f"condition not met within {max_rounds} rounds")
    raise AssertionError("unreachable")


def _isolated_pulls(env: StarEnvironment, k: int, alpha: float, gamma: FatigueFunction,
                    rng: np.random.Generator, max_pulls: int) -> int:
    target = alpha * gamma(1) * env.probs[k].sum()
    activated: set[int] = set()
    s = 0
    while true_remaining_potential(env, k, activated, gamma, s + 1) > target:
        s += 1
        if s > max_pulls:
            raise WaitingTimeExceeded(f"influencer {k} needs more than {max_pulls} pulls")
        activated.update(fatigue_filter(env.pull([k], rng), gamma, s, rng).attribution)
    return s


def oracle_waiting_time(env: StarEnvironment, alpha: float, gamma: FatigueFunction = GAMMA_ONE,
                        rng: np.random.Generator | None = None, replications: int = 1,
                        max_pulls: int = 1_000_000) -> np.ndarray:
    """Oracle waiting time T*(alpha) per replication.

    Each influencer is pulled in isolation until its own remaining potential
    drops to alpha * lambda_k; T* is the summed pull count.
    """
    env = _star(env)
    rng = rng if rng is not None else np.random.default_rng()
    return np.array([sum(_isolated_pulls(env, k, alpha, gamma, rng, max_pulls)
                         for k in range(env.K)) for _ in range(replications)], dtype=np.int64)


def expected_oracle_waiting_time(env: StarEnvironment, alpha: float,
                                 gamma: FatigueFunction = GAMMA_ONE,
                                 max_pulls: int = 1_000_000) -> int:
    """Deterministic variant: pulls until the *expected* remaining potential drops below target."""
    env = _star(env)
    total = 0
    for k in range(env.K):
        p = env.probs[k]
        target = alpha * gamma(1) * p.sum()
        never = np.ones_like(p)
        s = 0
        while gamma(s + 1) * float((never * p).sum()) > target:
            s += 1
            if s > max_pulls:
                raise WaitingTimeExceeded(f"influencer {k} needs more than {max_pulls} pulls")
            never *= 1.0 - gamma(s) * p
        total += s
    return total


def waiting_time_bound(tau_star: float, K: int, lambda_max: float,
                       lambda_min: float | None = None, alpha: float | None = None) -> float:
    """tau* + K lambda_max log(4 tau* + 11 K lambda_max) + 2K.

    When ``lambda_min`` and ``alpha`` are given their validity range is checked.
    """
    if lambda_min is not None:
        if lambda_min < LAMBDA_FLOOR:
            raise ValueError("the waiting-time bound needs lambda_min >= 13")
        if alpha is not None and not LAMBDA_FLOOR / lambda_min <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [13/lambda_min, 1] = [{LAMBDA_FLOOR / lambda_min:.4g}, 1]")
    return tau_star + K * lambda_max * math.log(4 * tau_star + 11 * K * lambda_max) + 2 * K


@dataclass
class WaitingTimeReport:
    run: int
    alpha: float
    t_ucb: int
    t_oracle: int
    tau_star: int
    bound: float

    @property
    def satisfied(self) -> bool:
        return self.t_ucb <= self.bound
