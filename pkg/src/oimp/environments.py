"""Diffusion environments.

Every environment answers one query: given the influencers seeded in a
trial, which basic nodes activate, and which influencer is responsible for
each activation.  Influencers are addressed by their index ``0 .. K-1``.

When several influencers are seeded together, ties in attribution go to the
lowest influencer index.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph


class UnsupportedEnvironment(TypeError):
    """The operation needs ground truth or a graph the environment lacks."""


@dataclass
class Spread:
    """Nodes activated by one trial, each mapped to the responsible influencer."""

    attribution: dict[int, int] = field(default_factory=dict)

    @property
    def activations(self) -> set[int]:
        return set(self.attribution)

    def __len__(self) -> int:
        return len(self.attribution)

    def attributed_to(self, k: int) -> list[int]:
        return [u for u, owner in self.attribution.items() if owner == k]


_GAMMA_KINDS = ("one", "inv", "invsqrt", "table")


@dataclass(frozen=True)
class FatigueFunction:
    """Non-increasing weariness multiplier gamma(s), s = 1, 2, ...

    ``table`` holds gamma(1), gamma(2), ...; the last value is reused past
    the end of the table.
    """

    kind: str = "one"
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _GAMMA_KINDS:
            raise ValueError(f"unknown fatigue kind {self.kind!r}; expected one of {_GAMMA_KINDS}")
        if self.kind == "table":
            if not self.values:
                raise ValueError("table fatigue needs at least one value")
            if any(not 0.0 < v <= 1.0 for v in self.values):
                raise ValueError("fatigue values must lie in (0, 1]")
            if any(b > a for a, b in zip(self.values, self.values[1:])):
                raise ValueError("fatigue table must be non-increasing")

    @classmethod
    def from_name(cls, name: str) -> "FatigueFunction":
        return cls(name)

    @property
    def is_constant_one(self) -> bool:
        return self.kind == "one" or (self.kind == "table" and all(v == 1.0 for v in self.values))

    def __call__(self, s: int) -> float:
        if s < 1:
            raise ValueError("fatigue is defined for pull index s >= 1")
        if self.kind == "one":
            return 1.0
        if self.kind == "inv":
            return 1.0 / s
        if self.kind == "invsqrt":
            return 1.0 / math.sqrt(s)
        return self.values[min(s, len(self.values)) - 1]


GAMMA_ONE = FatigueFunction("one")


class Environment:
    """Common interface: ``pull`` one trial, ``reset`` between runs."""

    K: int

    def pull(self, influencers: Sequence[int], rng: np.random.Generator) -> Spread:
        raise NotImplementedError

    def reset(self) -> None:
        pass

    def _check(self, influencers: Sequence[int]) -> list[int]:
        ks = sorted(set(int(k) for k in influencers))
        for k in ks:
            if not 0 <= k < self.K:
                raise ValueError(f"unknown influencer {k} (K={self.K})")
        return ks


# ---------------------------------------------------------------- star model

class StarEnvironment(Environment):
    """Influencer k activates each node of its support independently."""

    def __init__(self, supports: Sequence[Iterable[int]], probs: Sequence[Iterable[float]]):
        if len(supports) != len(probs):
            raise ValueError("supports and probs must list the same influencers")
        self.supports = [np.asarray(list(s), dtype=np.int64) for s in supports]
        self.probs = [np.asarray(list(p), dtype=np.float64) for p in probs]
        for s, p in zip(self.supports, self.probs):
            if s.shape != p.shape:
                raise ValueError("each support needs one probability per node")
            if p.size and (p.min() < 0.0 or p.max() > 1.0):
                raise ValueError("activation probabilities must lie in [0, 1]")
            if np.unique(s).size != s.size:
                raise ValueError("support lists a node twice")
        self.K = len(self.supports)

    @property
    def lambdas(self) -> np.ndarray:
        """Expected first-pull spread size of every influencer."""
        return np.array([p.sum() for p in self.probs])

    def pull(self, influencers, rng):
        attribution: dict[int, int] = {}
        for k in self._check(influencers):
            hit = rng.random(self.probs[k].size) < self.probs[k]
            for u in self.supports[k][hit].tolist():
                attribution.setdefault(u, k)
        return Spread(attribution)

    def remaining(self, k: int, activated: set[int]) -> float:
        if not 0 <= k < self.K:
            raise ValueError(f"unknown influencer {k}")
        fresh = np.fromiter((u not in activated for u in self.supports[k].tolist()),
                            dtype=bool, count=self.supports[k].size)
        return float(self.probs[k][fresh].sum())


def star_pull(env: StarEnvironment, k: int, rng: np.random.Generator) -> Spread:
    return env.pull([k], rng)


def true_remaining_potential(env, k: int, activated: set[int],
                             gamma: FatigueFunction = GAMMA_ONE, next_pull: int = 1) -> float:
    """gamma(next_pull) times the summed probabilities of k's unactivated support."""
    if isinstance(env, FatigueEnvironment):
        env = env.base
    if not isinstance(env, StarEnvironment):
        raise UnsupportedEnvironment("remaining potential needs a star environment")
    return gamma(next_pull) * env.remaining(k, activated)


def read_star_spec(path: str | os.PathLike) -> StarEnvironment:
    """Load ``{"influencers": [{"node": prob, ...}, ...]}`` JSON."""
    with open(path) as fh:
        doc = json.load(fh)
    supports, probs = [], []
    for entry in doc["influencers"]:
        items = sorted((int(u), float(p)) for u, p in entry.items())
        supports.append([u for u, _ in items])
        probs.append([p for _, p in items])
    return StarEnvironment(supports, probs)


def write_star_spec(env: StarEnvironment, path: str | os.PathLike) -> None:
    doc = {"influencers": [{str(u): float(p) for u, p in zip(s.tolist(), q.tolist())}
                           for s, q in zip(env.supports, env.probs)]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ------------------------------------------------------------ graph cascades

def _order_by_owner(frontier: list[int], attribution: dict[int, int]) -> list[int]:
    return sorted(frontier, key=attribution.__getitem__)


def _seed(seeds: Sequence[int]) -> tuple[dict[int, int], list[int]]:
    attribution: dict[int, int] = {}
    for i, s in enumerate(seeds):
        attribution.setdefault(int(s), i)
    return attribution, list(attribution)


def ic_cascade(g: Graph, seeds: Sequence[int], rng: np.random.Generator) -> Spread:
    """One Independent Cascade run.

    Attribution values are positions in ``seeds``.  Layers advance in
    lockstep, so a node reached in the same layer from several seeds goes to
    the lowest position.
    """
    attribution, frontier = _seed(seeds)
    while frontier:
        nxt = []
        for u in _order_by_owner(frontier, attribution):
            targets, w = g.out_edges(u)
            if not targets.size:
                continue
            owner = attribution[u]
            for v in targets[rng.random(targets.size) < w].tolist():
                if v not in attribution:
                    attribution[v] = owner
                    nxt.append(v)
        frontier = nxt
    return Spread(attribution)


LT_TOLERANCE = 1e-9


def check_lt_weights(g: Graph) -> None:
    if g.node_count and g.in_weight_sums.max() > 1.0 + LT_TOLERANCE:
        v = int(np.argmax(g.in_weight_sums))
        raise ValueError(f"incoming weights of node {v} sum to {g.in_weight_sums[v]:.6g} > 1")


def lt_cascade(g: Graph, seeds: Sequence[int], rng: np.random.Generator) -> Spread:
    """One Linear Threshold run with thresholds drawn fresh, uniform on [0, 1].

    A node's threshold is drawn the first time an active in-neighbour
    touches it; it activates once its active in-weight reaches the
    threshold.  Attribution follows the first active in-neighbour to touch
    it.
    """
    check_lt_weights(g)
    attribution, frontier = _seed(seeds)
    acc: dict[int, float] = {}
    theta: dict[int, float] = {}
    first: dict[int, int] = {}
    while frontier:
        touched: dict[int, None] = {}
        for u in _order_by_owner(frontier, attribution):
            targets, w = g.out_edges(u)
            owner = attribution[u]
            for v, wv in zip(targets.tolist(), w.tolist()):
                if v in attribution:
                    continue
                if v not in theta:
                    theta[v] = rng.random()
                    first[v] = owner
                    acc[v] = 0.0
                acc[v] += wv
                touched[v] = None
        frontier = [v for v in touched if acc[v] >= theta[v]]
        for v in frontier:
            attribution[v] = first[v]
    return Spread(attribution)


_CASCADES = {"ic": ic_cascade, "lt": lt_cascade}


class GraphEnvironment(Environment):
    """Influencers are graph nodes; spreads come from IC or LT cascades."""

    def __init__(self, graph: Graph, influencers: Sequence[int], model: str = "ic"):
        if model not in _CASCADES:
            raise ValueError(f"unknown diffusion model {model!r}")
        if model == "lt":
            check_lt_weights(graph)
        self.graph = graph
        self.influencers = [int(u) for u in influencers]
        if len(set(self.influencers)) != len(self.influencers):
            raise ValueError("influencer nodes must be distinct")
        if any(not 0 <= u < graph.node_count for u in self.influencers):
            raise ValueError("influencer node out of range")
        self.model = model
        self.K = len(self.influencers)

    def pull(self, influencers, rng):
        ks = self._check(influencers)
        spread = _CASCADES[self.model](self.graph, [self.influencers[k] for k in ks], rng)
        return Spread({u: ks[pos] for u, pos in spread.attribution.items()})


# ------------------------------------------------------------ cascade replay

@dataclass
class CascadeLog:
    """Historical spreads per influencer id."""

    cascades: dict[int, list[frozenset[int]]] = field(default_factory=dict)

    @property
    def influencer_ids(self) -> list[int]:
        return sorted(self.cascades)

    def mean_size(self, influencer: int) -> float:
        return float(np.mean([len(c) for c in self.cascades[influencer]]))


def replay_pull(log: CascadeLog, k: int, rng: np.random.Generator) -> Spread:
    """Return one of k's logged cascades, chosen uniformly, attributed to k."""
    logged = log.cascades.get(k)
    if not logged:
        raise ValueError(f"no logged cascade for influencer {k}")
    chosen = logged[int(rng.integers(len(logged)))]
    return Spread({u: k for u in sorted(chosen)})


class ReplayEnvironment(Environment):
    """Index k addresses the k-th smallest influencer id of the log."""

    def __init__(self, log: CascadeLog):
        self.log = log
        self.ids = log.influencer_ids
        for i in self.ids:
            if not log.cascades[i]:
                raise ValueError(f"influencer {i} has no logged cascade")
        self.K = len(self.ids)

    def pull(self, influencers, rng):
        attribution: dict[int, int] = {}
        for k in self._check(influencers):
            for u in replay_pull(self.log, self.ids[k], rng).attribution:
                attribution.setdefault(u, k)
        return Spread(attribution)


def read_cascade_log(path: str | os.PathLike) -> CascadeLog:
    """Parse ``influencer_id;node,node,...`` lines (``#`` comments allowed)."""
    log = CascadeLog()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            head, sep, tail = line.partition(";")
            try:
                if not sep:
                    raise ValueError
                k = int(head)
                nodes = frozenset(int(x) for x in tail.split(",") if x.strip())
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'influencer;node,node,...'") from None
            log.cascades.setdefault(k, []).append(nodes)
    return log


def write_cascade_log(log: CascadeLog, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        for k in log.influencer_ids:
            for c in log.cascades[k]:
                fh.write(f"{k};{','.join(map(str, sorted(c)))}\n")


# ------------------------------------------------------------------ fatigue

def fatigue_filter(spread: Spread, gamma: FatigueFunction, s: int,
                   rng: np.random.Generator) -> Spread:
    """Keep each activated node independently with probability gamma(s)."""
    keep_p = gamma(s)
    if keep_p >= 1.0:
        return Spread(dict(spread.attribution))
    nodes = sorted(spread.attribution)
    kept = np.asarray(nodes, dtype=np.int64)[rng.random(len(nodes)) < keep_p]
    return Spread({u: spread.attribution[u] for u in kept.tolist()})


class FatigueEnvironment(Environment):
    """Wraps an environment; the s-th pull of k keeps each of its nodes w.p. gamma(s).

    Pull counters are kept here, independently of any policy bookkeeping.
    """

    def __init__(self, base: Environment, gamma: FatigueFunction):
        self.base = base
        self.gamma = gamma
        self.K = base.K
        self.pulls = np.zeros(self.K, dtype=np.int64)

    def reset(self):
        self.base.reset()
        self.pulls[:] = 0

    def pull(self, influencers, rng):
        ks = self._check(influencers)
        for k in ks:
            self.pulls[k] += 1
        spread = self.base.pull(ks, rng)
        keep = {k: self.gamma(int(self.pulls[k])) for k in ks}
        if all(p >= 1.0 for p in keep.values()):
            return spread
        nodes = sorted(spread.attribution)
        draws = rng.random(len(nodes))
        return Spread({u: spread.attribution[u] for u, r in zip(nodes, draws)
                       if r < keep[spread.attribution[u]]})


def unwrap(env: Environment) -> Environment:
    while isinstance(env, FatigueEnvironment):
        env = env.base
    return env


# ------------------------------------------------- batched Monte-Carlo spread

_MAX_CELLS = 20_000_000


def simulate_spread_sizes(g: Graph, seed_sets: Sequence[Sequence[int]], samples: int,
                          model: str, rng: np.random.Generator,
                          discount: Iterable[int] | None = None) -> np.ndarray:
    """Sizes of ``samples`` independent cascades from each seed set.

    Returns an array of shape ``(len(seed_sets), samples)``.  Nodes in
    ``discount`` are simulated normally but not counted.  All cascades of a
    chunk run as parallel "worlds" on a dense activation matrix.
    """
    if model not in _CASCADES:
        raise ValueError(f"unknown diffusion model {model!r}")
    if model == "lt":
        check_lt_weights(g)
    n = g.node_count
    counted = np.ones(n, dtype=bool)
    if discount is not None:
        idx = np.fromiter(discount, dtype=np.int64)
        counted[idx] = False
    out = np.zeros((len(seed_sets), samples), dtype=np.int64)
    per_chunk = max(1, _MAX_CELLS // max(1, n * samples))
    step = _batch_ic if model == "ic" else _batch_lt
    for lo in range(0, len(seed_sets), per_chunk):
        chunk = seed_sets[lo:lo + per_chunk]
        active = step(g, chunk, samples, rng)
        out[lo:lo + len(chunk)] = (active & counted).sum(axis=1).reshape(len(chunk), samples)
    return out


def _initial_worlds(seed_sets, samples, n):
    worlds = len(seed_sets) * samples
    active = np.zeros((worlds, n), dtype=bool)
    fw, fu = [], []
    for i, seeds in enumerate(seed_sets):
        seeds = np.unique(np.asarray(list(seeds), dtype=np.int64))
        w = np.repeat(np.arange(i * samples, (i + 1) * samples), seeds.size)
        fw.append(w)
        fu.append(np.tile(seeds, samples))
    fw = np.concatenate(fw) if fw else np.zeros(0, dtype=np.int64)
    fu = np.concatenate(fu) if fu else np.zeros(0, dtype=np.int64)
    active[fw, fu] = True
    return active, fw, fu


def _expand(g: Graph, fw: np.ndarray, fu: np.ndarray):
    """Every out-edge of every (world, node) in the frontier."""
    starts = g.indptr[fu]
    counts = g.indptr[fu + 1] - starts
    total = int(counts.sum())
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(total)
    return np.repeat(fw, counts), g.indices[offsets], g.weights[offsets]


def sample_live_edges(g: Graph, samples: int, model: str, rng: np.random.Generator) -> np.ndarray:
    """Boolean (samples, edges) masks of live edges, in CSR edge order.

    IC keeps each edge independently with its weight.  LT lets every node
    keep at most one incoming edge, edge (u, v) with probability w(u, v);
    reachability in such a world has the law of an LT cascade.
    """
    if model == "ic":
        return rng.random((samples, g.edge_count)) < g.weights
    if model != "lt":
        raise ValueError(f"unknown diffusion model {model!r}")
    check_lt_weights(g)
    order = np.lexsort((np.arange(g.edge_count), g.indices))  # edges grouped by target
    tgt = g.indices[order]
    cum = np.cumsum(g.weights[order])
    block_start = np.searchsorted(tgt, np.arange(g.node_count), side="left")
    block_end = np.searchsorted(tgt, np.arange(g.node_count), side="right")
    base = np.concatenate(([0.0], cum))[block_start]
    # shift each block so that it starts at 2 v; draws land in [2 v, 2 v + 1)
    key = 2.0 * tgt + (cum - base[tgt])
    live = np.zeros((samples, g.edge_count), dtype=bool)
    for s in range(samples):
        q = 2.0 * np.arange(g.node_count) + rng.random(g.node_count)
        pick = np.searchsorted(key, q, side="right")
        ok = pick < block_end
        live[s, order[pick[ok]]] = True
    return live


def live_edge_reach(g: Graph, seeds: Sequence[int], live: np.ndarray) -> np.ndarray:
    """Boolean (len(seeds), worlds, nodes): nodes reachable from each seed in each world."""
    n = g.node_count
    worlds = live.shape[0]
    reach = np.zeros((len(seeds), worlds, n), dtype=bool)
    flat = reach.reshape(len(seeds) * worlds, n)
    fw = np.arange(len(seeds) * worlds)
    fu = np.repeat(np.asarray(seeds, dtype=np.int64), worlds)
    flat[fw, fu] = True
    while fw.size:
        starts = g.indptr[fu]
        counts = g.indptr[fu + 1] - starts
        offsets = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(int(counts.sum()))
        ew = np.repeat(fw, counts)
        ok = live[ew % worlds, offsets]
        ew, ev = ew[ok], g.indices[offsets[ok]]
        fresh = ~flat[ew, ev]
        key = np.unique(ew[fresh] * n + ev[fresh])
        fw, fu = key // n, key % n
        flat[fw, fu] = True
    return reach


def _batch_ic(g, seed_sets, samples, rng):
    n = g.node_count
    active, fw, fu = _initial_worlds(seed_sets, samples, n)
    while fw.size:
        ew, ev, ep = _expand(g, fw, fu)
        hit = rng.random(ew.size) < ep
        ew, ev = ew[hit], ev[hit]
        fresh = ~active[ew, ev]
        key = np.unique(ew[fresh] * n + ev[fresh])
        fw, fu = key // n, key % n
        active[fw, fu] = True
    return active


def _batch_lt(g, seed_sets, samples, rng):
    n = g.node_count
    active, fw, fu = _initial_worlds(seed_sets, samples, n)
    acc = np.zeros(active.shape)
    theta = np.full(active.shape, np.nan)
    while fw.size:
        ew, ev, ep = _expand(g, fw, fu)
        fresh = ~active[ew, ev]
        key, inv = np.unique(ew[fresh] * n + ev[fresh], return_inverse=True)
        if not key.size:
            break
        tw, tv = key // n, key % n
        acc[tw, tv] += np.bincount(inv.ravel(), weights=ep[fresh], minlength=key.size)
        th = theta[tw, tv]
        unseen = np.isnan(th)
        th[unseen] = rng.random(int(unseen.sum()))
        theta[tw, tv] = th
        fire = acc[tw, tv] >= th
        fw, fu = tw[fire], tv[fire]
        active[fw, fu] = True
    return active
