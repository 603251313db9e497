"""Shared value types and the geometric primitives used by every other module.

Label ids are dense non-negative integers and every tie breaks toward the
smallest id / index so that runs are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ContractError


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ContractError(f"expected a 1-d feature vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Instance:
    id: int
    features: np.ndarray
    true_label: Optional[int] = None  # scoring only; the engine never reads it
    arrival_index: int = 0

    def __post_init__(self):
        v = as_vector(self.features)
        if not np.all(np.isfinite(v)):
            raise ContractError(f"instance {self.id} has non-finite features")
        object.__setattr__(self, "features", v)

    @property
    def dim(self) -> int:
        return self.features.shape[0]


@dataclass
class LabelSpace:
    seed_labels: frozenset
    discovered: list = field(default_factory=list)  # [(label, founding chunk)]

    def __post_init__(self):
        self.seed_labels = frozenset(int(y) for y in self.seed_labels)

    @property
    def discovered_labels(self) -> list[int]:
        return [y for y, _ in self.discovered]

    @property
    def all_labels(self) -> list[int]:
        return sorted(self.seed_labels) + self.discovered_labels

    def next_label(self) -> int:
        labels = self.all_labels
        return (max(labels) + 1) if labels else 0

    def add(self, chunk_index: int) -> int:
        y = self.next_label()
        self.discovered.append((y, chunk_index))
        return y

    def founding_chunk(self, label: int) -> Optional[int]:
        for y, c in self.discovered:
            if y == label:
                return c
        return None

    def __len__(self):
        return len(self.seed_labels) + len(self.discovered)


@dataclass(frozen=True)
class Prototype:
    """Cluster summary standing in for the discarded member points.

    ``born`` is the chunk index at which the prototype was created (-1 for the
    initial ensemble); it orders evictions under the prototype cap.
    """

    centroid: np.ndarray
    radius: float
    mean_distance: float
    support: int
    frequencies: Mapping[int, int] = field(default_factory=dict)
    born: int = -1

    def __post_init__(self):
        object.__setattr__(self, "centroid", as_vector(self.centroid))
        object.__setattr__(self, "frequencies", dict(self.frequencies))
        if self.radius < 0 or self.mean_distance < 0:
            raise ContractError("radius and mean distance must be non-negative")
        if self.support < 1:
            raise ContractError("support must be positive")

    @property
    def labeled_count(self) -> int:
        return sum(self.frequencies.values())

    def majority(self) -> Optional[tuple[int, int]]:
        """(label, count) of the most frequent label, smallest id on ties."""
        if not self.frequencies:
            return None
        label = min(self.frequencies, key=lambda y: (-self.frequencies[y], y))
        return label, self.frequencies[label]


@dataclass(frozen=True)
class HeuristicFunction:
    id: int
    prototypes: tuple
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prototypes", tuple(self.prototypes))

    @cached_property
    def centroids(self) -> np.ndarray:
        return np.stack([p.centroid for p in self.prototypes])

    @cached_property
    def radii(self) -> np.ndarray:
        return np.array([p.radius for p in self.prototypes])

    def __len__(self):
        return len(self.prototypes)

    def replace(self, prototypes) -> "HeuristicFunction":
        return HeuristicFunction(self.id, tuple(prototypes), self.rng_seed)


@dataclass(frozen=True)
class Chunk:
    instances: tuple
    index: int

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))

    def __len__(self):
        return len(self.instances)


ASSIGNED = "assigned"
DEFERRED = "deferred"


@dataclass(frozen=True)
class LabelDecision:
    instance_id: int
    outcome: str
    label: Optional[int] = None
    score: float = 0.0
    per_hf_votes: tuple = ()  # (hf_id, label, raw_conf)
    chunk: int = 0
    retroactive: bool = False

    @property
    def assigned(self) -> bool:
        return self.outcome == ASSIGNED


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _features(x) -> np.ndarray:
    return x.features if isinstance(x, Instance) else as_vector(x)


def distances_to(centroids: np.ndarray, x: np.ndarray) -> np.ndarray:
    if centroids.shape[1] != x.shape[0]:
        raise ContractError(
            f"dimension mismatch: centroids have d={centroids.shape[1]}, x has d={x.shape[0]}"
        )
    return np.sqrt(np.sum((centroids - x) ** 2, axis=1))


def nearest_prototype(h: HeuristicFunction, x) -> tuple[int, float]:
    if len(h) == 0:
        raise ContractError(f"heuristic function {h.id} has no prototypes")
    d = distances_to(h.centroids, _features(x))
    j = int(np.argmin(d))  # first minimum -> lowest index on ties
    return j, float(d[j])


def covers(p: Prototype, x, slack: float = 0.0) -> bool:
    if slack < 0:
        raise ContractError("slack must be non-negative")
    return distance(_features(x), p.centroid) <= p.radius * (1.0 + slack)


def check_dims(instances: Sequence[Instance], d: int) -> None:
    for inst in instances:
        if inst.dim != d:
            raise ContractError(f"instance {inst.id} has d={inst.dim}, expected {d}")
