"""Heuristic-function pool: generation, per-function votes and the threshold verifier."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .clustering import ClusteringConfig, impurity_kmeans
from .core import (
    ASSIGNED,
    DEFERRED,
    HeuristicFunction,
    Instance,
    LabelDecision,
    distances_to,
    nearest_prototype,
)
from .errors import ConfigError


@dataclass(frozen=True)
class EnsembleConfig:
    num_hf: int = 6
    k_per_hf: int = 40
    tau: float = 0.7
    lam: float = 1.0
    slack: float = 0.10
    seed: int = 0
    bootstrap: bool = True
    max_iters: int = 100

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        if self.num_hf < 1 or self.k_per_hf < 1:
            raise ConfigError("num_hf and k_per_hf must be positive")
        if self.slack < 0:
            raise ConfigError("slack must be non-negative")


@dataclass(frozen=True)
class AggregateResult:
    best_label: Optional[int]
    score: float
    covered: bool
    votes: tuple  # (hf_id, label, raw_conf, normalized_conf)


def hf_seeds(seed: int, n: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(n)]


def generate_heuristics(labeled: Sequence[Instance], cfg: EnsembleConfig) -> list:
    """Build ``cfg.num_hf`` heuristic functions from the labeled seed set.

    Each function clusters its own bootstrap resample of the labeled rows with
    a distinct seed derived from ``cfg.seed``.
    """
    if len(labeled) < cfg.k_per_hf:
        raise ConfigError(
            f"need at least k_per_hf={cfg.k_per_hf} labeled rows, got {len(labeled)}"
        )
    if any(x.true_label is None for x in labeled):
        raise ConfigError("every row of the labeled seed set needs a label")
    points = [(x.features, x.true_label) for x in labeled]
    hfs = []
    for i, s in enumerate(hf_seeds(cfg.seed, cfg.num_hf)):
        if cfg.bootstrap:
            rng = np.random.default_rng(s)
            idx = np.sort(rng.integers(len(points), size=len(points)))
            sample = [points[j] for j in idx]
        else:
            sample = points
        ccfg = ClusteringConfig(k=cfg.k_per_hf, lam=cfg.lam, max_iters=cfg.max_iters, seed=s)
        hfs.append(HeuristicFunction(i, impurity_kmeans(sample, ccfg), s))
    return hfs


def hf_label(h: HeuristicFunction, x) -> tuple[Optional[int], float]:
    """Nearest prototype's majority label and ``(r - d) * purity``.

    A nearest prototype with no labeled members abstains: ``(None, 0.0)``.
    """
    j, d = nearest_prototype(h, x)
    p = h.prototypes[j]
    top = p.majority()
    if top is None:
        return None, 0.0
    label, fmax = top
    return label, (p.radius - d) * fmax / p.labeled_count


def normalize_confidences(raw) -> list[float]:
    """Clamp at zero, then scale by the largest value."""
    c = np.maximum(np.asarray(raw, dtype=float), 0.0)
    m = c.max() if c.size else 0.0
    if m <= 0:
        return [0.0] * c.size
    return (c / m).tolist()


def label_scores(labels, confs) -> dict:
    """Confidence-weighted vote share per label (all zero when no confidence)."""
    total = float(sum(confs))
    scores: dict[int, float] = {}
    for y, c in zip(labels, confs):
        scores[y] = scores.get(y, 0.0) + c
    if total <= 0:
        return {y: 0.0 for y in scores}
    return {y: min(v / total, 1.0) for y, v in scores.items()}


def vote_scores(labels, confs) -> tuple[Optional[int], float]:
    scores = label_scores(labels, confs)
    if not scores:
        return None, 0.0
    best = min(scores, key=lambda y: (-scores[y], y))
    return best, scores[best]


def is_covered(hfs: Sequence[HeuristicFunction], x, slack: float) -> bool:
    f = x.features if isinstance(x, Instance) else np.asarray(x, dtype=float)
    bound = 1.0 + slack
    for h in hfs:
        if np.any(distances_to(h.centroids, f) <= h.radii * bound):
            return True
    return False


def aggregate_votes(hfs: Sequence[HeuristicFunction], x, slack: float) -> AggregateResult:
    covered = is_covered(hfs, x, slack)
    labels, raws, ids = [], [], []
    for h in hfs:
        y, c = hf_label(h, x)
        if y is None:
            continue
        ids.append(h.id)
        labels.append(y)
        raws.append(c)
    if not labels:
        return AggregateResult(None, 0.0, covered, ())
    norm = normalize_confidences(raws)
    best, score = vote_scores(labels, norm)
    votes = tuple(zip(ids, labels, raws, norm))
    return AggregateResult(best, score, covered, votes)


def aggregate(x: Instance, hfs: Sequence[HeuristicFunction], cfg: EnsembleConfig,
              chunk: int = 0) -> LabelDecision:
    """Assign the top label when the instance is covered and its score reaches tau."""
    res = aggregate_votes(hfs, x, cfg.slack)
    raw_votes = tuple((hid, y, r) for hid, y, r, _ in res.votes)
    if res.covered and res.best_label is not None and res.score > 0 and res.score >= cfg.tau:
        return LabelDecision(x.id, ASSIGNED, res.best_label, res.score, raw_votes, chunk)
    return LabelDecision(x.id, DEFERRED, None, res.score, raw_votes, chunk)
