"""Impurity-penalized K-means.

The objective is the usual within-cluster squared dispersion plus ``lam``
times the summed label impurity of each cluster, where a cluster's impurity is
``label_diverse * entropy`` over its labeled members. Optimization alternates a
sequential assignment sweep (centroids held fixed) with a centroid update; each
half-step can only lower the objective, and at ``lam == 0`` the sweep is the
plain Lloyd assignment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Prototype
from .errors import ConfigError, ContractError


@dataclass(frozen=True)
class ClusteringConfig:
    k: int = 40
    lam: float = 1.0
    max_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.lam < 0 or not np.isfinite(self.lam):
            raise ConfigError("lambda must be finite and non-negative")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be positive")


def impurity_from_counts(counts) -> float:
    """Impurity of a cluster given its per-label counts of labeled members."""
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    n = c.sum()
    if c.size < 2:
        return 0.0
    label_diverse = float(np.sum(c * (n - c)))
    p = c / n
    entropy = float(-np.sum(p * np.log(p)))
    return label_diverse * entropy


def prototype_impurity(labeled_members) -> float:
    """``labeled_members`` is a sequence of ``(features, label)`` pairs."""
    labels = [y for _, y in labeled_members if y is not None]
    if not labels:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    return impurity_from_counts(counts)


def _split_points(points) -> tuple[np.ndarray, list]:
    if len(points) == 0:
        raise ContractError("no points")
    X = np.asarray([np.asarray(f, dtype=float) for f, _ in points])
    if X.ndim != 2:
        raise ContractError("points must share one dimension")
    labels = [None if y is None else int(y) for _, y in points]
    return X, labels


def total_loss(points, assignment, centroids, lam: float) -> tuple[float, float, float]:
    X, labels = _split_points(points)
    assignment = np.asarray(assignment)
    if assignment.shape[0] != X.shape[0] or np.any(assignment < 0):
        raise ContractError("every point must be assigned to a cluster")
    C = np.asarray(centroids, dtype=float)
    if np.any(assignment >= C.shape[0]):
        raise ContractError("assignment refers to a missing centroid")
    km = float(np.sum((X - C[assignment]) ** 2))
    imp = 0.0
    for i in range(C.shape[0]):
        members = [(None, labels[j]) for j in np.flatnonzero(assignment == i)]
        imp += prototype_impurity(members)
    return km, imp, km + lam * imp


def build_prototype(members, born: int = -1) -> Prototype:
    if len(members) == 0:
        raise ContractError("cannot build a prototype from zero members")
    X, labels = _split_points(members)
    c = X.mean(axis=0)
    d = np.sqrt(np.sum((X - c) ** 2, axis=1))
    freqs: dict[int, int] = {}
    for y in labels:
        if y is not None:
            freqs[y] = freqs.get(y, 0) + 1
    radius = float(d.max())
    mean_distance = min(float(d.mean()), radius)
    return Prototype(c, radius, mean_distance, len(members), dict(sorted(freqs.items())), born)


def seed_centroids(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, then D^2-weighted draws."""
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            j = int(np.flatnonzero(~np.isin(np.arange(n), idx))[0])
        else:
            j = int(rng.choice(n, p=d2 / total))
        idx.append(j)
        d2 = np.minimum(d2, np.sum((X - X[j]) ** 2, axis=1))
    return X[idx].copy()


@dataclass
class KMeansResult:
    prototypes: list
    assignment: np.ndarray
    centroids: np.ndarray
    history: list  # total loss after every half-step
    iterations: int


def _label_codes(labels) -> tuple[np.ndarray, int]:
    known = sorted({y for y in labels if y is not None})
    code = {y: i for i, y in enumerate(known)}
    return np.array([-1 if y is None else code[y] for y in labels]), len(known)


def _impurity_rows(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=1, keepdims=True)
    label_diverse = np.sum(counts * (n - counts), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(counts > 0, counts / np.where(n > 0, n, 1), 1.0)
        entropy = -np.sum(np.where(counts > 0, p * np.log(p), 0.0), axis=1)
    return label_diverse * entropy


def label_seeded_centroids(X: np.ndarray, codes: np.ndarray, k: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Seeds spread over label groups (unlabeled points form their own group).

    Each group gets a share of ``k`` proportional to its size (largest
    remainder, at least one per group while seeds last); a group with one seed
    contributes its mean, otherwise k-means++ runs inside the group.
    """
    groups = sorted(set(codes.tolist()), key=lambda g: (g < 0, g))
    sizes = np.array([np.sum(codes == g) for g in groups], dtype=float)
    share = np.zeros(len(groups), dtype=int)
    if k >= len(groups):
        share[:] = 1
    else:
        share[np.argsort(-sizes, kind="stable")[:k]] = 1
    rest = k - share.sum()
    if rest > 0:
        quota = sizes / sizes.sum() * rest
        share += np.floor(quota).astype(int)
        left = k - share.sum()
        order = np.argsort(-(quota - np.floor(quota)), kind="stable")
        share[order[:left]] += 1
    seeds = []
    for g, m in zip(groups, share):
        if m == 0:
            continue
        Xg = X[codes == g]
        m = min(m, Xg.shape[0])
        seeds.append(Xg.mean(axis=0)[None, :] if m == 1 else seed_centroids(Xg, m, rng))
    C = np.concatenate(seeds)
    if C.shape[0] < k:
        C = np.concatenate([C, seed_centroids(X, k - C.shape[0], rng)])
    return C


def impurity_kmeans_run(points, cfg: ClusteringConfig, init: Optional[np.ndarray] = None,
                        born: int = -1) -> KMeansResult:
    """One descent run from ``init`` (k-means++ seeds from ``cfg.seed`` when None)."""
    X, labels = _split_points(points)
    n = X.shape[0]
    k = cfg.k
    if n < k:
        raise ConfigError(f"need at least k={k} points, got {n}")
    codes, n_labels = _label_codes(labels)
    if init is None:
        C = seed_centroids(X, k, np.random.default_rng(cfg.seed))
    else:
        C = np.array(init, dtype=float)
        if C.shape != (k, X.shape[1]):
            raise ContractError(f"init must have shape {(k, X.shape[1])}, got {C.shape}")
    lam = cfg.lam

    # initial assignment: greedy in point order, impurity-aware once lam > 0
    d2 = np.sum((X[:, None, :] - C[None, :, :]) ** 2, axis=2)
    L = max(n_labels, 1)
    counts = np.zeros((k, L), dtype=float)
    imp = np.zeros(k)
    eye = np.eye(L)
    # plus[i, y]: impurity of cluster i after one more member with label y
    plus = np.zeros((k, L))

    def refresh(i):
        imp[i] = impurity_from_counts(counts[i])
        plus[i] = _impurity_rows(counts[i] + eye)

    a = np.empty(n, dtype=int)
    for j in range(n):
        y = codes[j]
        if lam == 0 or y < 0:
            a[j] = int(np.argmin(d2[j]))
        else:
            a[j] = int(np.argmin(d2[j] + lam * (plus[:, y] - imp)))
        if y >= 0:
            counts[a[j], y] += 1
            if lam > 0:
                refresh(a[j])
            else:
                imp[a[j]] = impurity_from_counts(counts[a[j]])

    def loss():
        return float(np.sum((X - C[a]) ** 2) + lam * imp.sum())

    history = [loss()]
    it = 0
    for it in range(1, cfg.max_iters + 1):
        # update step: centroids to member means
        for i in range(k):
            m = a == i
            if np.any(m):
                C[i] = X[m].mean(axis=0)
        history.append(loss())

        # assignment sweep with centroids fixed
        changed = False
        d2 = np.sum((X[:, None, :] - C[None, :, :]) ** 2, axis=2)
        for j in range(n):
            cur = a[j]
            if lam == 0 or codes[j] < 0:
                cost = d2[j]
            else:
                y = codes[j]
                # cost of x joining each cluster, measured against the cluster without x
                delta = plus[:, y] - imp
                base = counts[cur].copy()
                base[y] -= 1
                delta[cur] = imp[cur] - impurity_from_counts(base)
                cost = d2[j] + lam * delta
            best = int(np.argmin(cost))
            if best != cur and cost[best] < cost[cur]:
                if codes[j] >= 0:
                    y = codes[j]
                    counts[cur, y] -= 1
                    counts[best, y] += 1
                    refresh(cur)
                    refresh(best)
                a[j] = best
                changed = True

        # empty-cluster repair: reseed at the point farthest from its centroid
        for i in range(k):
            if np.any(a == i):
                continue
            sizes = np.bincount(a, minlength=k)
            dist = np.sum((X - C[a]) ** 2, axis=1)
            dist[sizes[a] <= 1] = -1.0
            j = int(np.argmax(dist))
            if dist[j] <= 0:
                break
            old = a[j]
            gain = dist[j]
            if codes[j] >= 0:
                reduced = counts[old].copy()
                reduced[codes[j]] -= 1
                gain -= lam * (impurity_from_counts(reduced) - imp[old])
            if gain <= 0:
                break
            a[j] = i
            C[i] = X[j]
            if codes[j] >= 0:
                counts[old, codes[j]] -= 1
                counts[i, codes[j]] += 1
                refresh(old)
                refresh(i)
            changed = True
        history.append(loss())
        if not changed:
            break

    prototypes = []
    for i in range(k):
        idx = np.flatnonzero(a == i)
        if idx.size:
            prototypes.append(build_prototype([points[j] for j in idx], born))
    return KMeansResult(prototypes, a, C, history, it)


def impurity_kmeans_best(points, cfg: ClusteringConfig, born: int = -1) -> KMeansResult:
    """Best of a k-means++ start and, when labels are present, a label-seeded start."""
    best = impurity_kmeans_run(points, cfg, born=born)
    X, labels = _split_points(points)
    codes, n_labels = _label_codes(labels)
    if n_labels > 0 and cfg.lam > 0:
        rng = np.random.default_rng([cfg.seed, 1])
        init = label_seeded_centroids(X, codes, cfg.k, rng)
        other = impurity_kmeans_run(points, cfg, init=init, born=born)
        if other.history[-1] < best.history[-1]:
            best = other
    return best


def impurity_kmeans(points, cfg: ClusteringConfig, born: int = -1) -> list:
    """Cluster ``(features, label-or-None)`` pairs into at most ``cfg.k`` prototypes."""
    return impurity_kmeans_best(points, cfg, born=born).prototypes
