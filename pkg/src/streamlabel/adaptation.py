"""Streaming self-adaptation: per-chunk labeling, prototype updates and new-label founding.

One ``process_chunk`` call is one labeling step. Instances are matched
against every heuristic function (nearest prototype inside its widened
radius), matched prototypes absorb the instance, and the ensemble decides.
Deferred instances wait in a TTL-bounded buffer which is scanned with the
q-neighborhood silhouette coefficient for cohorts sharing an unseen label.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .clustering import ClusteringConfig, impurity_kmeans
from .core import (
    ASSIGNED,
    Chunk,
    HeuristicFunction,
    Instance,
    LabelDecision,
    LabelSpace,
    Prototype,
    check_dims,
    distance,
    nearest_prototype,
)
from .ensemble import EnsembleConfig, aggregate, generate_heuristics
from .errors import ConfigError, ContractError


@dataclass(frozen=True)
class AdaptationConfig:
    q: int = 5
    min_cohort: Optional[int] = None  # defaults to 2q
    check_period: int = 1
    max_prototypes: Optional[int] = None  # defaults to 2 * num_hf * k_per_hf
    new_label_k: int = 1
    ttl_chunks: int = 5

    def __post_init__(self):
        if self.q < 1 or self.check_period < 1 or self.new_label_k < 1 or self.ttl_chunks < 1:
            raise ConfigError("q, check_period, new_label_k and ttl_chunks must be positive")
        if self.min_cohort is not None and self.min_cohort < 2:
            raise ConfigError("min_cohort must be at least 2")

    @property
    def cohort_size(self) -> int:
        return self.min_cohort if self.min_cohort is not None else max(2 * self.q, 2)

    def cap(self, ens: EnsembleConfig) -> int:
        if self.max_prototypes is not None:
            return self.max_prototypes
        return 2 * ens.num_hf * ens.k_per_hf


@dataclass(frozen=True)
class EngineConfig:
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    adaptation: AdaptationConfig = field(default_factory=AdaptationConfig)


@dataclass
class NoveltyBuffer:
    entries: list = field(default_factory=list)  # [(Instance, chunk index)]
    ttl_chunks: int = 5

    def add(self, x: Instance, chunk: int) -> None:
        self.entries.append((x, chunk))

    def evict_expired(self, now: int) -> int:
        keep = [(x, c) for x, c in self.entries if now - c < self.ttl_chunks]
        dropped = len(self.entries) - len(keep)
        self.entries = keep
        return dropped

    def remove(self, ids: Iterable[int]) -> None:
        ids = set(ids)
        self.entries = [(x, c) for x, c in self.entries if x.id not in ids]

    @property
    def instances(self) -> list:
        return [x for x, _ in self.entries]

    def __len__(self):
        return len(self.entries)


@dataclass
class ChunkStats:
    chunk: int
    assigned: int
    deferred: int
    prototypes: int
    buffer: int
    num_labels: int
    founded: tuple = ()


@dataclass
class EngineState:
    label_space: LabelSpace
    ensemble: list
    buffer: NoveltyBuffer
    dim: int
    chunk_counter: int = 0
    decisions: list = field(default_factory=list)
    stats: list = field(default_factory=list)
    seed: int = 0

    @property
    def total_prototypes(self) -> int:
        return sum(len(h) for h in self.ensemble)

    def centroid_matrix(self) -> np.ndarray:
        return np.concatenate([h.centroids for h in self.ensemble])


def init_state(labeled: Sequence[Instance], cfg: EngineConfig) -> EngineState:
    """Generate the initial ensemble from the labeled seed set."""
    if not labeled:
        raise ConfigError("the labeled seed set is empty")
    dim = labeled[0].dim
    check_dims(labeled, dim)
    hfs = generate_heuristics(labeled, cfg.ensemble)
    cap = cfg.adaptation.cap(cfg.ensemble)
    total = sum(len(h) for h in hfs)
    if cap < total:
        raise ConfigError(f"max_prototypes={cap} is below the initial ensemble size {total}")
    seeds = {x.true_label for x in labeled}
    return EngineState(
        label_space=LabelSpace(frozenset(seeds)),
        ensemble=hfs,
        buffer=NoveltyBuffer(ttl_chunks=cfg.adaptation.ttl_chunks),
        dim=dim,
        seed=cfg.ensemble.seed,
    )


def update_prototype(p: Prototype, x, assigned: Optional[int] = None) -> Prototype:
    """Absorb ``x`` into ``p`` (running mean); count ``assigned`` when given."""
    f = x.features if isinstance(x, Instance) else np.asarray(x, dtype=float)
    s = p.support
    c = (s * p.centroid + f) / (s + 1)
    d = distance(f, c)
    radius = max(p.radius, d)
    mean_distance = min((p.mean_distance * s + d) / (s + 1), radius)
    freqs = dict(p.frequencies)
    if assigned is not None:
        freqs[assigned] = freqs.get(assigned, 0) + 1
    return Prototype(c, radius, mean_distance, s + 1, freqs, p.born)


def add_frequency(p: Prototype, label: int) -> Prototype:
    freqs = dict(p.frequencies)
    freqs[label] = freqs.get(label, 0) + 1
    if sum(freqs.values()) > p.support:
        return p
    return Prototype(p.centroid, p.radius, p.mean_distance, p.support, freqs, p.born)


def _mean_q_smallest(D: np.ndarray, q: int) -> np.ndarray:
    q = min(q, D.shape[1])
    return np.sort(D, axis=1)[:, :q].mean(axis=1)


def _silhouette(d_out, d_in):
    d_out = np.asarray(d_out, dtype=float)
    d_in = np.asarray(d_in, dtype=float)
    m = np.maximum(d_out, d_in)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(m > 0, (d_out - d_in) / np.where(m > 0, m, 1.0), 0.0)
    return np.clip(v, -1.0, 1.0)


def qnsc_from_distances(d_in: float, d_out: float) -> float:
    return float(_silhouette(d_out, d_in))


def qnsc(x: Instance, buffer: NoveltyBuffer, ensemble: Sequence[HeuristicFunction],
         q: int) -> Optional[float]:
    """q-neighborhood silhouette of ``x`` against the buffer and the ensemble.

    Returns None (not ready) when the buffer holds fewer than ``q`` other entries.
    """
    others = [y.features for y in buffer.instances if y.id != x.id]
    if len(others) < q:
        return None
    if not ensemble:
        raise ContractError("ensemble is empty")
    d_in = _mean_q_smallest(np.sqrt(np.sum((np.asarray(others) - x.features) ** 2, axis=1))[None, :], q)[0]
    P = np.concatenate([h.centroids for h in ensemble])
    d_out = _mean_q_smallest(np.sqrt(np.sum((P - x.features) ** 2, axis=1))[None, :], q)[0]
    return qnsc_from_distances(d_in, d_out)


def buffer_qnsc(buffer: NoveltyBuffer, ensemble: Sequence[HeuristicFunction], q: int) -> np.ndarray:
    """q-NSC for every buffer entry (NaN for all entries when the buffer is not ready)."""
    m = len(buffer)
    if m - 1 < q:
        return np.full(m, np.nan)
    B = np.asarray([x.features for x in buffer.instances])
    D = np.sqrt(np.sum((B[:, None, :] - B[None, :, :]) ** 2, axis=2))
    np.fill_diagonal(D, np.inf)
    d_in = _mean_q_smallest(D, q)
    P = np.concatenate([h.centroids for h in ensemble])
    DP = np.sqrt(np.sum((B[:, None, :] - P[None, :, :]) ** 2, axis=2))
    d_out = _mean_q_smallest(DP, q)
    return _silhouette(d_out, d_in)


def knn_groups(X: np.ndarray, q: int) -> list:
    """Connected components of the q-nearest-neighbor graph, largest first.

    An edge joins two entries when either is among the other's q nearest
    (single linkage over the kNN graph).
    """
    n = X.shape[0]
    if n == 1:
        return [[0]]
    qq = min(q, n - 1)
    D = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2))
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind="stable")[:, :qq]
    A = np.zeros((n, n), dtype=bool)
    A[np.repeat(np.arange(n), qq), nn.ravel()] = True
    _, comp = connected_components(csr_matrix(A | A.T), directed=False)
    groups: dict[int, list] = {}
    for i, c in enumerate(comp):
        groups.setdefault(c, []).append(i)
    return sorted(groups.values(), key=lambda g: (-len(g), g[0]))


def scan_buffer(state: EngineState, cfg: EngineConfig) -> Optional[list]:
    """Largest kNN-connected group of positive-q-NSC buffer entries, if big enough."""
    acfg = cfg.adaptation
    scores = buffer_qnsc(state.buffer, state.ensemble, acfg.q)
    cand = np.flatnonzero(scores > 0)  # NaN compares False
    if cand.size < acfg.cohort_size:
        return None
    insts = state.buffer.instances
    X = np.asarray([insts[i].features for i in cand])
    group = knn_groups(X, acfg.q)[0]
    if len(group) < acfg.cohort_size:
        return None
    return [insts[cand[i]] for i in group]


def found_new_label(S: Sequence[Instance], state: EngineState, cfg: EngineConfig) -> int:
    """Register a new label for cohort ``S`` and give every HF prototypes for it."""
    acfg = cfg.adaptation
    if len(S) < acfg.cohort_size:
        raise ContractError(f"cohort of {len(S)} is below min_cohort={acfg.cohort_size}")
    chunk = state.chunk_counter
    label = state.label_space.add(chunk)
    k = min(acfg.new_label_k, len(S))
    seed = int(np.random.SeedSequence([state.seed, chunk, label]).generate_state(1)[0])
    ccfg = ClusteringConfig(k=k, lam=cfg.ensemble.lam, max_iters=cfg.ensemble.max_iters, seed=seed)
    protos = impurity_kmeans([(x.features, label) for x in S], ccfg, born=chunk)
    state.ensemble = [h.replace(h.prototypes + tuple(protos)) for h in state.ensemble]
    state.buffer.remove(x.id for x in S)
    for x in S:
        state.decisions.append(LabelDecision(x.id, ASSIGNED, label, 1.0, (), chunk, retroactive=True))
    return label


def enforce_cap(state: EngineState, cfg: EngineConfig) -> int:
    """Evict smallest-support prototypes until the ensemble fits the cap; returns evictions."""
    cap = cfg.adaptation.cap(cfg.ensemble)
    evicted = 0
    while state.total_prototypes > cap:
        carriers: dict[int, int] = {}
        for h in state.ensemble:
            for p in h.prototypes:
                for y in p.frequencies:
                    carriers[y] = carriers.get(y, 0) + 1
        best = None
        for hi, h in enumerate(state.ensemble):
            if len(h) <= 1:
                continue
            for j, p in enumerate(h.prototypes):
                if any(carriers[y] == 1 for y in p.frequencies):
                    continue
                key = (p.support, p.born, h.id, j)
                if best is None or key < best[0]:
                    best = (key, hi, j)
        if best is None:
            raise ConfigError(
                f"cannot reduce {state.total_prototypes} prototypes to max_prototypes={cap} "
                "without dropping a label's last prototype"
            )
        _, hi, j = best
        h = state.ensemble[hi]
        state.ensemble[hi] = h.replace(h.prototypes[:j] + h.prototypes[j + 1:])
        evicted += 1
    return evicted


def process_chunk(chunk: Chunk, state: EngineState, cfg: EngineConfig) -> list:
    """Label one chunk and adapt the ensemble; returns this chunk's decisions.

    Decisions made retroactively for a founding cohort are appended to
    ``state.decisions`` as well as to the returned list.
    """
    ecfg, acfg = cfg.ensemble, cfg.adaptation
    if chunk.index != state.chunk_counter:
        raise ContractError(f"expected chunk {state.chunk_counter}, got {chunk.index}")
    check_dims(chunk.instances, state.dim)
    bound = 1.0 + ecfg.slack
    out = []
    pending = []  # (hf index, prototype index, label); applied after the chunk
    for x in chunk.instances:
        matched = []
        for hi, h in enumerate(state.ensemble):
            j, d = nearest_prototype(h, x)
            p = h.prototypes[j]
            if d <= p.radius * bound:
                protos = list(h.prototypes)
                protos[j] = update_prototype(p, x)
                state.ensemble[hi] = h.replace(protos)
                matched.append((hi, j))
        dec = aggregate(x, state.ensemble, ecfg, chunk.index)
        if dec.assigned:
            pending.extend((hi, j, dec.label) for hi, j in matched)
        else:
            state.buffer.add(x, chunk.index)
        out.append(dec)
    state.decisions.extend(out)

    for hi, j, y in pending:
        h = state.ensemble[hi]
        protos = list(h.prototypes)
        protos[j] = add_frequency(protos[j], y)
        state.ensemble[hi] = h.replace(protos)

    state.buffer.evict_expired(chunk.index)
    founded = []
    if state.chunk_counter % acfg.check_period == 0:
        while True:
            S = scan_buffer(state, cfg)
            if S is None:
                break
            n_before = len(state.decisions)
            founded.append(found_new_label(S, state, cfg))
            out.extend(state.decisions[n_before:])
    enforce_cap(state, cfg)

    state.stats.append(ChunkStats(
        chunk=chunk.index,
        assigned=sum(1 for d in out if d.assigned and not d.retroactive),
        deferred=sum(1 for d in out if not d.assigned),
        prototypes=state.total_prototypes,
        buffer=len(state.buffer),
        num_labels=len(state.label_space),
        founded=tuple(founded),
    ))
    state.chunk_counter += 1
    return out


def make_chunks(stream: Sequence[Instance], chunk_size: int) -> list:
    if chunk_size < 1:
        raise ConfigError("chunk_size must be positive")
    return [Chunk(stream[i:i + chunk_size], n)
            for n, i in enumerate(range(0, len(stream), chunk_size))]


def run_stream(labeled: Sequence[Instance], stream: Sequence[Instance], cfg: EngineConfig,
               chunk_size: int = 20) -> EngineState:
    state = init_state(labeled, cfg)
    for chunk in make_chunks(list(stream), chunk_size):
        process_chunk(chunk, state, cfg)
    return state


def final_assignments(decisions: Sequence[LabelDecision]) -> dict:
    """Last decision per instance id (retroactive assignments override deferrals)."""
    final: dict[int, LabelDecision] = {}
    for d in decisions:
        final[d.instance_id] = d
    return final
