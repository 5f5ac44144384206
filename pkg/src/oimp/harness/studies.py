"""Experiments that check the estimators and policies empirically."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..environments import GAMMA_ONE, Environment, FatigueEnvironment, FatigueFunction
from ..estimation import (
    BayesianNodeBelief,
    bayes_remaining,
    beta_bound,
    good_turing,
    new_stats,
    record_spread,
)
from ..policies import GTUCB, make_policy
from .campaign import CampaignConfig, RoundRecord, run_campaign, stream
from .generators import gen_calibrated_star, gen_lambda_star
from .waiting import (
    LAMBDA_FLOOR,
    WaitingTimeReport,
    measure_waiting_time,
    oracle_waiting_time,
    waiting_time_bound,
)

# extra per-run stream keys, after the environment (0) and policy (1) streams
INSTANCE_KEY = 2
ORACLE_KEY = 3


# ------------------------------------------------------ Good-Turing vs Bayes

ESTIMATOR_COLUMNS = ("run", "pull", "true_potential", "good_turing", "bayesian")


def estimator_race(nodes: int = 50, runs: int = 200, pulls: int = 20, seed: int = 0,
                   prior: tuple[float, float] = (1.0, 20.0)) -> list[tuple]:
    """Track both remaining-potential estimators along repeated pulls of one influencer.

    Each run draws a fresh calibrated support of ``nodes`` nodes.
    """
    rows = []
    for run in range(runs):
        rng = stream(seed, 1, run, 0)
        env = gen_calibrated_star(1, nodes, rng)
        stats = new_stats(1)
        belief = BayesianNodeBelief(env.supports[0], *prior)
        activated: set[int] = set()
        for n in range(1, pulls + 1):
            spread = env.pull([0], rng)
            activated.update(spread.attribution)
            record_spread(stats, spread, [0])
            belief.observe(spread.attribution)
            rows.append((run, n, env.remaining(0, activated), good_turing(stats[0]),
                         bayes_remaining(belief, activated)))
    return rows


def race_errors(rows: Sequence[tuple], pull: int) -> tuple[np.ndarray, np.ndarray]:
    """Absolute errors of (Good-Turing, Bayesian) at a given pull, one entry per run."""
    sel = [r for r in rows if r[1] == pull]
    truth = np.array([r[2] for r in sel])
    return np.abs(np.array([r[3] for r in sel]) - truth), np.abs(np.array([r[4] for r in sel]) - truth)


# ------------------------------------------- vectorised single-influencer MC

def simulate_activations(probs: np.ndarray, pulls: int, reps: int, rng: np.random.Generator,
                         gamma: FatigueFunction = GAMMA_ONE) -> np.ndarray:
    """Boolean array (reps, pulls, nodes): node u activated at pull s w.p. gamma(s) p(u)."""
    g = np.array([gamma(s) for s in range(1, pulls + 1)])
    return rng.random((reps, pulls, probs.size)) < g[None, :, None] * probs[None, None, :]


def potentials_at(x: np.ndarray, probs: np.ndarray, n: int,
                  gamma: FatigueFunction = GAMMA_ONE) -> tuple[np.ndarray, np.ndarray]:
    """(true remaining potential, Good-Turing estimate) after the first n pulls of ``x``."""
    head = x[:, :n]
    counts = head.sum(axis=1)
    hapax = counts == 1
    first = head.argmax(axis=1) + 1
    inv_g = np.array([1.0 / gamma(s) for s in range(1, n + 1)])
    weight = gamma(n + 1) * inv_g[first - 1]
    r_hat = (hapax * weight).sum(axis=1) / n
    r_true = gamma(n + 1) * ((counts == 0) * probs).sum(axis=1)
    return r_true, r_hat


@dataclass
class BiasRow:
    n: int
    mean_bias: float  # E[R_hat] - E[R]
    stderr: float
    upper: float  # gamma(n+1) * lambda / n


@dataclass
class CoverageRow:
    n: int
    coverage: float
    stderr: float
    beta: float


def _chunks(reps: int, size: int):
    for lo in range(0, reps, size):
        yield min(size, reps - lo)


def bias_study(probs: np.ndarray, ns: Sequence[int], reps: int, rng: np.random.Generator,
               gamma: FatigueFunction = GAMMA_ONE, chunk: int = 20_000) -> list[BiasRow]:
    probs = np.asarray(probs, dtype=float)
    lam = probs.sum()
    nmax = max(ns)
    acc = {n: [] for n in ns}
    for size in _chunks(reps, chunk):
        x = simulate_activations(probs, nmax, size, rng, gamma)
        for n in ns:
            r_true, r_hat = potentials_at(x, probs, n, gamma)
            acc[n].append(r_hat - r_true)
    out = []
    for n in ns:
        d = np.concatenate(acc[n])
        out.append(BiasRow(n, float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size)),
                           gamma(n + 1) * lam / n))
    return out


def coverage_study(probs: np.ndarray, ns: Sequence[int], reps: int, rng: np.random.Generator,
                   delta: float = 0.05, gamma: FatigueFunction = GAMMA_ONE,
                   chunk: int = 2_000) -> list[CoverageRow]:
    """How often R_hat - beta - lambda/n <= R <= R_hat + beta holds.

    Under fatigue the width uses gamma(n+1) * lambda; the bias term keeps
    lambda / n.
    """
    probs = np.asarray(probs, dtype=float)
    lam = float(probs.sum())
    nmax = max(ns)
    hits = {n: 0 for n in ns}
    fatigued = None if gamma.is_constant_one else gamma
    beta = {n: beta_bound(n, lam, delta, fatigued) for n in ns}
    for size in _chunks(reps, chunk):
        x = simulate_activations(probs, nmax, size, rng, gamma)
        for n in ns:
            r_true, r_hat = potentials_at(x, probs, n, gamma)
            ok = (r_hat - beta[n] - lam / n <= r_true) & (r_true <= r_hat + beta[n])
            hits[n] += int(ok.sum())
    out = []
    for n in ns:
        c = hits[n] / reps
        out.append(CoverageRow(n, c, float(np.sqrt(c * (1 - c) / reps)), beta[n]))
    return out


# ----------------------------------------------------------- waiting times

WAITING_COLUMNS = ("run", "alpha", "t_ucb", "t_oracle", "tau_star", "bound", "satisfied")


def waiting_time_experiment(K: int = 4, alpha: float = 0.5, runs: int = 100, seed: int = 0,
                            lambda_range: tuple[float, float] = (30.0, 40.0),
                            support: int = 200) -> list[WaitingTimeReport]:
    """GT-UCB waiting time against the oracle-based bound, one fresh instance per run."""
    reports = []
    for run in range(runs):
        env = gen_lambda_star(K, support, lambda_range, stream(seed, 1, run, INSTANCE_KEY))
        lam = env.lambdas
        lam_min, lam_max = float(lam.min()), float(lam.max())
        oracle_rng = stream(seed, 1, run, ORACLE_KEY)
        tau = int(oracle_waiting_time(env, alpha - LAMBDA_FLOOR / lam_min, rng=oracle_rng)[0])
        t_star = int(oracle_waiting_time(env, alpha, rng=oracle_rng)[0])
        bound = waiting_time_bound(tau, K, lam_max, lambda_min=lam_min, alpha=alpha)
        t_ucb = measure_waiting_time(env, GTUCB(), alpha,
                                     rngs=(stream(seed, 1, run, 0), stream(seed, 1, run, 1)))
        reports.append(WaitingTimeReport(run, alpha, t_ucb, t_star, tau, bound))
    return reports


def waiting_rows(reports: Sequence[WaitingTimeReport]) -> list[tuple]:
    return [(r.run, r.alpha, r.t_ucb, r.t_oracle, r.tau_star, r.bound, int(r.satisfied))
            for r in reports]


# -------------------------------------------------------- policy comparison

def compare_policies(env: Environment, names: Sequence[str], K: int, N: int, runs: int,
                     seed: int, L: int = 1, gamma: FatigueFunction = GAMMA_ONE,
                     mc_samples: int = 200) -> list[RoundRecord]:
    """Run every named policy for ``runs`` replications on the same environment streams."""
    records = []
    for name in names:
        policy = make_policy(name, env, gamma=gamma, mc_samples=mc_samples)
        config = CampaignConfig(K=K, N=N, L=L, policy=name, runs=runs, seed=seed)
        for run in range(runs):
            records.extend(run_campaign(config, env, policy, run))
    records.sort(key=lambda r: (r.run, r.policy, r.round))
    return records


def fatigue_study(base: Environment, gamma: FatigueFunction, N: int = 300, runs: int = 50,
                  seed: int = 0, L: int = 1,
                  names: Sequence[str] = ("fat-gt-ucb", "gt-ucb", "random")) -> list[RoundRecord]:
    env = FatigueEnvironment(base, gamma)
    return compare_policies(env, names, base.K, N, runs, seed, L=L, gamma=gamma)


def final_by_policy(records: Sequence[RoundRecord]) -> dict[str, np.ndarray]:
    last: dict[tuple[str, int], int] = {}
    for r in records:
        last[(r.policy, r.run)] = r.cumulative
    out: dict[str, list[int]] = {}
    for (policy, run), v in sorted(last.items()):
        out.setdefault(policy, []).append(v)
    return {k: np.array(v, dtype=float) for k, v in out.items()}
