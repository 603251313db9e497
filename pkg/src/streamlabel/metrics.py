"""Labeling-quality metrics over a decision log and ground truth.

Only instances the system labeled count toward N; instances deferred to the
end of the stream are left out. A discovered label is matched to the true
class that holds the majority of the instances it was given.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Optional

from .errors import UndefinedMetricError


@dataclass(frozen=True)
class EvalTally:
    N: int = 0
    N_new: int = 0
    N_exist: int = 0
    TP: int = 0
    FP: int = 0
    FN: int = 0
    N_l: int = 0

    @property
    def mislabeled(self) -> int:
        return self.N - self.N_new - self.N_exist

    def as_dict(self) -> dict:
        return asdict(self)


def accuracy(t: EvalTally) -> float:
    if t.N <= 0:
        raise UndefinedMetricError("accuracy is undefined when nothing was labeled (N = 0)")
    return 100.0 * (t.N_new + t.N_exist) / t.N


def m_new(t: EvalTally) -> float:
    """New-label data mislabeled with an existing label, per 100 new-label assignments.

    Computed verbatim, so it can exceed 100 when few instances got new labels.
    """
    if t.N_l <= 0:
        raise UndefinedMetricError("M_new is undefined when no data got a new label (N_l = 0)")
    return 100.0 * t.FN / t.N_l


def f_new(t: EvalTally) -> float:
    denom = t.N - t.N_l
    if denom <= 0:
        raise UndefinedMetricError("F_new is undefined when N - N_l = 0")
    return 100.0 * t.FP / denom


def f_beta(t: EvalTally, beta: float = 2.0) -> float:
    b2 = beta * beta
    denom = (1 + b2) * t.TP + b2 * t.FN + t.FP
    if denom <= 0:
        raise UndefinedMetricError("F_beta is undefined when TP, FN and FP are all zero")
    return (1 + b2) * t.TP / denom


def discovered_mapping(assigned: Mapping[int, int], truth: Mapping[int, int],
                       discovered: Iterable[int]) -> dict:
    """Map each discovered label to the true class most often given it (smallest on ties)."""
    votes: dict[int, Counter] = {y: Counter() for y in discovered}
    for iid, y in assigned.items():
        if y in votes and iid in truth:
            votes[y][truth[iid]] += 1
    out = {}
    for y, c in votes.items():
        if c:
            out[y] = min(c, key=lambda t: (-c[t], t))
    return out


def tally(assigned: Mapping[int, int], truth: Mapping[int, int], seed_labels: Iterable[int],
          discovered: Iterable[int]) -> EvalTally:
    """Build the tally from final assignments ``{instance id: label}``.

    Instances without ground truth are skipped.
    """
    seed = set(seed_labels)
    discovered = list(discovered)
    disc = set(discovered)
    mapping = discovered_mapping(assigned, truth, discovered)
    N = N_new = N_exist = FP = FN = N_l = 0
    for iid, y in assigned.items():
        if iid not in truth:
            continue
        t = truth[iid]
        should_be_new = t not in seed
        got_new = y in disc
        N += 1
        N_l += got_new
        if should_be_new:
            if got_new and mapping.get(y) == t:
                N_new += 1
            elif not got_new:
                FN += 1
        else:
            if got_new:
                FP += 1
            elif y == t:
                N_exist += 1
    return EvalTally(N=N, N_new=N_new, N_exist=N_exist, TP=N_new, FP=FP, FN=FN, N_l=N_l)


def summarize(t: EvalTally, beta: float = 2.0) -> dict:
    """All metrics that are defined for ``t``; undefined ones map to None."""
    out: dict[str, Optional[float]] = {}
    for name, fn in (("accuracy", accuracy), ("m_new", m_new), ("f_new", f_new)):
        try:
            out[name] = fn(t)
        except UndefinedMetricError:
            out[name] = None
    try:
        out["f_beta"] = f_beta(t, beta)
    except UndefinedMetricError:
        out["f_beta"] = None
    out["m_new_over_100"] = out["m_new"] is not None and out["m_new"] > 100.0
    return out
