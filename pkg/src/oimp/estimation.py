"""Per-influencer statistics and the estimators built on them.

Good-Turing style estimators of an influencer's remaining potential count
*hapaxes*: nodes the influencer activated exactly once and that no other
influencer ever activated.  All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .environments import GAMMA_ONE, FatigueFunction, Spread

SQRT2_PLUS_1 = 1.0 + math.sqrt(2.0)


class EstimatorError(ValueError):
    """An estimator was queried before its preconditions hold."""


@dataclass
class InfluencerStats:
    """Feedback history of one influencer.

    ``totals`` is shared by every influencer of a campaign and counts the
    activations of each node by anyone, so activations by the *other*
    influencers are ``totals[u] - counts[u]``.
    """

    pulls: int = 0
    counts: dict[int, int] = field(default_factory=dict)
    hapax_round: dict[int, int] = field(default_factory=dict)
    spread_sizes: list[int] = field(default_factory=list)
    totals: dict[int, int] = field(default_factory=dict)

    def others(self, u: int) -> int:
        return self.totals.get(u, 0) - self.counts.get(u, 0)

    def hapaxes(self) -> list[int]:
        """Nodes activated exactly once by this influencer and never by another."""
        return [u for u in self.hapax_round if self.totals[u] == 1]


def new_stats(K: int) -> list[InfluencerStats]:
    totals: dict[int, int] = {}
    return [InfluencerStats(totals=totals) for _ in range(K)]


def record_spread(all_stats: Sequence[InfluencerStats], spread: Spread,
                  seeded: Iterable[int]) -> None:
    """Fold one trial into the statistics.

    Every seeded influencer gains a pull, even if nothing was attributed to
    it, and its attributed share of the spread is appended as that pull's
    spread.
    """
    seeded = sorted(set(seeded))
    for k in seeded:
        all_stats[k].pulls += 1
    sizes = dict.fromkeys(seeded, 0)
    for u, k in spread.attribution.items():
        if k not in sizes:
            raise ValueError(f"node {u} attributed to influencer {k}, which was not seeded")
        st = all_stats[k]
        c = st.counts.get(u, 0) + 1
        st.counts[u] = c
        if c == 1:
            st.hapax_round[u] = st.pulls
        else:
            st.hapax_round.pop(u, None)
        st.totals[u] = st.totals.get(u, 0) + 1
        sizes[k] += 1
    for k in seeded:
        all_stats[k].spread_sizes.append(sizes[k])


def _require_pulls(stats: InfluencerStats) -> int:
    if stats.pulls < 1:
        raise EstimatorError("estimator needs at least one pull")
    return stats.pulls


def good_turing(stats: InfluencerStats) -> float:
    n = _require_pulls(stats)
    return float(len(stats.hapaxes())) / n


def fat_good_turing(stats: InfluencerStats, gamma: FatigueFunction) -> float:
    """Hapaxes reweighted by gamma(n+1) / gamma(i), i the pull that produced them."""
    n = _require_pulls(stats)
    g_next = gamma(n + 1)
    return sum(g_next / gamma(stats.hapax_round[u]) for u in stats.hapaxes()) / n


def lambda_hat(stats: InfluencerStats) -> float:
    n = _require_pulls(stats)
    return sum(stats.spread_sizes) / n


def fat_lambda_hat(stats: InfluencerStats, gamma: FatigueFunction) -> float:
    n = _require_pulls(stats)
    undone = sum(size / gamma(s) for s, size in enumerate(stats.spread_sizes, 1))
    return gamma(n + 1) * undone / n


def confidence_bonus(lam: float, n: int, log_term: float) -> float:
    return SQRT2_PLUS_1 * math.sqrt(lam * log_term / n) + log_term / (3 * n)


def _check_round(t: int) -> None:
    if t < 1:
        raise EstimatorError("round index t must be >= 1")


def ucb_index(stats: InfluencerStats, t: int) -> float:
    _check_round(t)
    return good_turing(stats) + confidence_bonus(lambda_hat(stats), stats.pulls, math.log(4 * t))


def fat_ucb_index(stats: InfluencerStats, t: int, gamma: FatigueFunction) -> float:
    _check_round(t)
    return (fat_good_turing(stats, gamma)
            + confidence_bonus(fat_lambda_hat(stats, gamma), stats.pulls, math.log(4 * t)))


def beta_bound(n: int, lam: float, delta: float, gamma: FatigueFunction | None = None) -> float:
    """Deviation width at confidence 1 - delta after n pulls.

    With ``gamma`` the spread mass is the fatigued gamma(n+1) * lam.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if n < 1 or lam < 0:
        raise ValueError("need n >= 1 and lam >= 0")
    if gamma is not None:
        lam = gamma(n + 1) * lam
    return confidence_bonus(lam, n, math.log(4.0 / delta))


def bias_interval(lam: float, n: int, gamma: FatigueFunction = GAMMA_ONE) -> tuple[float, float]:
    """Interval holding E[R_n] - E[R_hat_n]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (-gamma(n + 1) * lam / n, 0.0)


class BayesianNodeBelief:
    """Independent Beta posteriors on the activation probability of each support node."""

    def __init__(self, support: Iterable[int], a: float = 1.0, b: float = 20.0):
        if a <= 0 or b <= 0:
            raise ValueError("Beta parameters must be positive")
        self.support = np.asarray(list(support), dtype=np.int64)
        self.prior = (a, b)
        self.a = np.full(self.support.size, float(a))
        self.b = np.full(self.support.size, float(b))

    def observe(self, activated: Iterable[int]) -> None:
        """One trial: support nodes in ``activated`` count as successes."""
        hit = np.isin(self.support, np.fromiter(activated, dtype=np.int64))
        self.a += hit
        self.b += ~hit

    @property
    def means(self) -> np.ndarray:
        return self.a / (self.a + self.b)


def bayes_remaining(belief: BayesianNodeBelief, activated: set[int]) -> float:
    """Sum of posterior means over support nodes not activated yet."""
    fresh = np.fromiter((u not in activated for u in belief.support.tolist()),
                        dtype=bool, count=belief.support.size)
    return float(belief.means[fresh].sum())
