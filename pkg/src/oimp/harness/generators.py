"""Synthetic environments: calibrated star instances, cascade logbooks, graphs."""

from __future__ import annotations

import numpy as np

from ..environments import CascadeLog, StarEnvironment
from ..graph import Graph

# empirical retweet probabilities: 90th percentile at 0.045
CALIBRATION_QUANTILE = 0.9
CALIBRATION_VALUE = 0.045


def calibrated_p_min(value: float = CALIBRATION_VALUE, q: float = CALIBRATION_QUANTILE) -> float:
    """Lower end of a log-uniform law on [p_min, 1] whose q-quantile is ``value``.

    The q-quantile of log-uniform on [a, 1] is a ** (1 - q).
    """
    return value ** (1.0 / (1.0 - q))


def sample_calibrated_probs(size: int, rng: np.random.Generator,
                            p_min: float | None = None) -> np.ndarray:
    """I.i.d. heavy-tailed activation probabilities in (0, 1]."""
    p_min = calibrated_p_min() if p_min is None else p_min
    if not 0.0 < p_min < 1.0:
        raise ValueError("p_min must lie in (0, 1)")
    return np.exp(rng.uniform(np.log(p_min), 0.0, size=size))


def _disjoint_supports(sizes) -> list[np.ndarray]:
    out, start = [], 0
    for m in sizes:
        if m < 1:
            raise ValueError("support sizes must be >= 1")
        out.append(np.arange(start, start + m))
        start += m
    return out


def gen_calibrated_star(K: int, support_sizes, rng: np.random.Generator,
                        p_min: float | None = None) -> StarEnvironment:
    """K influencers on disjoint supports with calibrated heavy-tailed probabilities.

    ``support_sizes`` is one size for all influencers or a list of K sizes.
    """
    sizes = [support_sizes] * K if np.isscalar(support_sizes) else list(support_sizes)
    if len(sizes) != K:
        raise ValueError("need one support size per influencer")
    supports = _disjoint_supports(sizes)
    return StarEnvironment(supports, [sample_calibrated_probs(s.size, rng, p_min) for s in supports])


def gen_lambda_star(K: int, support_size: int, lambda_range: tuple[float, float],
                    rng: np.random.Generator) -> StarEnvironment:
    """Star instance whose expected first spreads lambda_k are uniform on ``lambda_range``.

    Probabilities are uniform weights rescaled to sum to lambda_k; draws that
    would push a probability above 1 are redrawn.
    """
    lo, hi = lambda_range
    if hi > support_size:
        raise ValueError("lambda cannot exceed the support size")
    supports = _disjoint_supports([support_size] * K)
    probs = []
    for _ in range(K):
        lam = rng.uniform(lo, hi)
        while True:
            w = rng.random(support_size)
            p = w * (lam / w.sum())
            if p.max() <= 1.0:
                break
        probs.append(p)
    return StarEnvironment(supports, probs)


def default_fatigue_profile() -> list[int]:
    """Support sizes of 20 influencers: best five, middle, tail and worst five."""
    return [2000] * 5 + [400] * 5 + [60] * 5 + [5] * 5


def gen_fatigue_logbook(profile, rng: np.random.Generator, cascades: int = 50,
                        p_min: float | None = None) -> CascadeLog:
    """Logged cascades for influencers with support sizes ``profile``.

    Each influencer owns a disjoint support with calibrated probabilities;
    each logged cascade samples that support once, so mean cascade size
    scales with the support size.
    """
    profile = list(profile)
    if not profile:
        raise ValueError("fatigue profile must list at least one influencer")
    if cascades < 1:
        raise ValueError("need at least one cascade per influencer")
    log = CascadeLog()
    for k, support in enumerate(_disjoint_supports(profile)):
        p = sample_calibrated_probs(support.size, rng, p_min)
        hits = rng.random((cascades, support.size)) < p
        log.cascades[k] = [frozenset(support[row].tolist()) for row in hits]
    return log


def gen_powerlaw_digraph(n: int, mean_degree: float, rng: np.random.Generator,
                         out_exponent: float = 2.7, in_exponent: float = 2.1) -> Graph:
    """Directed graph with heavy-tailed out-degrees and target popularity.

    Out-degrees follow a Pareto law rescaled to ``mean_degree``; each edge
    picks its target with probability proportional to a Pareto weight.
    Self-loops are dropped; parallel edges may occur.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    raw = rng.pareto(out_exponent - 1.0, n) + 1.0
    deg = np.minimum(np.maximum(1, np.round(raw * mean_degree / raw.mean())), n - 1).astype(np.int64)
    pop = rng.pareto(in_exponent - 1.0, n) + 1.0
    src = np.repeat(np.arange(n), deg)
    dst = rng.choice(n, size=src.size, p=pop / pop.sum())
    return Graph.from_edges(n, zip(src.tolist(), dst.tolist()))
