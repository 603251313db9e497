"""Gaussian streams with planted novel classes, used by the acceptance scenarios."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Instance
from .errors import ConfigError


@dataclass(frozen=True)
class GaussianScenario:
    seed: int = 0
    n_seed_classes: int = 3
    novel_onsets: tuple = (10, 25)  # chunk index at which each novel class starts
    n_stream: int = 1000
    n_labeled: int = 476  # labeled pool at the default split ratio for ~5000 rows
    chunk_size: int = 20
    sigma: float = 0.5
    min_separation: float = 5.0
    box: float = 8.0
    dim: int = 2


@dataclass
class GaussianData:
    centers: np.ndarray
    labeled: list
    stream: list
    seed_labels: tuple
    novel_labels: tuple
    first_arrival: dict = field(default_factory=dict)  # novel label -> chunk


def class_centers(n: int, dim: int, min_sep: float, box: float,
                  rng: np.random.Generator, tries: int = 10000) -> np.ndarray:
    centers: list = []
    for _ in range(tries):
        c = rng.uniform(-box, box, size=dim)
        if all(np.linalg.norm(c - o) >= min_sep for o in centers):
            centers.append(c)
            if len(centers) == n:
                return np.array(centers)
    raise ConfigError(f"could not place {n} centers {min_sep} apart inside +/-{box}")


def generate(sc: GaussianScenario) -> GaussianData:
    rng = np.random.default_rng(sc.seed)
    n_classes = sc.n_seed_classes + len(sc.novel_onsets)
    centers = class_centers(n_classes, sc.dim, sc.min_separation, sc.box, rng)
    seed_labels = tuple(range(sc.n_seed_classes))
    novel_labels = tuple(range(sc.n_seed_classes, n_classes))
    onset = {y: 0 for y in seed_labels}
    onset.update(zip(novel_labels, sc.novel_onsets))

    labeled = []
    for i in range(sc.n_labeled):
        y = seed_labels[i % len(seed_labels)]
        labeled.append(Instance(i, rng.normal(centers[y], sc.sigma), y, -1))

    stream = []
    first = {}
    for t in range(sc.n_stream):
        chunk = t // sc.chunk_size
        active = [y for y in range(n_classes) if onset[y] <= chunk]
        y = int(rng.choice(active))
        if y in novel_labels and y not in first:
            first[y] = chunk
        stream.append(Instance(sc.n_labeled + t, rng.normal(centers[y], sc.sigma), y, t))
    return GaussianData(centers, labeled, stream, seed_labels, novel_labels, first)
