"""File formats: dataset CSV, decision log (JSON lines), label trajectory CSV, label space JSON."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import ASSIGNED, DEFERRED, Instance, LabelDecision, LabelSpace
from .errors import ConfigError, DataError


# ---- dataset CSV: id,f0..f{d-1},label ---------------------------------------

def read_dataset(path) -> list:
    """Rows as Instances in file order; an empty label field gives ``true_label=None``."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "id" or header[-1] != "label":
            raise DataError(f"{path}:1: header must be id,f0..f(d-1),label, got {','.join(header)}")
        d = len(header) - 2
        rows, seen = [], set()
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != d + 2:
                raise DataError(f"{path}:{lineno}: expected {d + 2} fields, got {len(rec)}")
            try:
                iid = int(rec[0])
                feats = [float(v) for v in rec[1:-1]]
                lab = rec[-1].strip()
                y = int(lab) if lab else None
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
            if not all(math.isfinite(v) for v in feats):
                raise DataError(f"{path}:{lineno}: non-finite feature")
            if iid in seen:
                raise DataError(f"{path}:{lineno}: duplicate id {iid}")
            seen.add(iid)
            rows.append(Instance(iid, np.asarray(feats), y, len(rows)))
    return rows


def write_dataset(rows: Sequence[Instance], path, with_labels: bool = True) -> None:
    if not rows:
        raise DataError("refusing to write an empty dataset")
    d = rows[0].dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *(f"f{i}" for i in range(d)), "label"])
        for x in rows:
            lab = "" if (x.true_label is None or not with_labels) else x.true_label
            w.writerow([x.id, *(repr(float(v)) for v in x.features), lab])


def read_truth(path) -> dict:
    """``{id: label}`` from a dataset-format file or a two-column ``id,label`` file."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    if header and [h.strip() for h in header] == ["id", "label"]:
        out = {}
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), start=1):
                if lineno == 1 or not rec:
                    continue
                try:
                    out[int(rec[0])] = int(rec[1])
                except (ValueError, IndexError) as e:
                    raise DataError(f"{path}:{lineno}: {e}") from e
        return out
    return {x.id: x.true_label for x in read_dataset(path) if x.true_label is not None}


def write_truth(rows: Sequence[Instance], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        for x in rows:
            w.writerow([x.id, x.true_label])


# ---- split protocol ----------------------------------------------------------

def split_dataset(rows: Sequence[Instance], known_fraction: float = 0.2,
                  ratio: float = 0.1, seed: int = 0) -> tuple:
    """Known labels, a labeled pool from known-label rows, and the shuffled stream.

    ``ceil(known_fraction * C)`` labels (at least one) become known. The labeled
    pool has ``round(total / (1 + 1/ratio))`` rows; everything else is streamed.
    Returns ``(known_labels, labeled, stream)``.
    """
    labs = sorted({x.true_label for x in rows if x.true_label is not None})
    if len(labs) < 2:
        raise ConfigError(f"split needs at least 2 distinct labels, found {len(labs)}")
    if any(x.true_label is None for x in rows):
        raise DataError("split protocol needs a label on every row")
    rng = np.random.default_rng(seed)
    n_known = max(1, math.ceil(known_fraction * len(labs) - 1e-9))
    known = sorted(int(v) for v in rng.choice(labs, size=n_known, replace=False))
    n_l = int(round(len(rows) / (1 + 1 / ratio)))
    pool = [i for i, x in enumerate(rows) if x.true_label in known]
    if n_l < 1 or n_l > len(pool) or n_l >= len(rows):
        raise ConfigError(
            f"cannot draw {n_l} labeled rows: {len(pool)} rows carry the {n_known} known labels "
            f"out of {len(rows)} total")
    chosen = set(int(i) for i in rng.choice(pool, size=n_l, replace=False))
    labeled = [rows[i] for i in sorted(chosen)]
    rest = [rows[i] for i in range(len(rows)) if i not in chosen]
    order = rng.permutation(len(rest))
    stream = [Instance(rest[j].id, rest[j].features, rest[j].true_label, t)
              for t, j in enumerate(order)]
    return known, labeled, stream


# ---- decision log ------------------------------------------------------------

def decision_record(d: LabelDecision) -> dict:
    return {"id": d.instance_id, "chunk": d.chunk, "outcome": d.outcome, "label": d.label,
            "score": round(float(d.score), 12), "retroactive": d.retroactive}


def write_decisions(decisions: Iterable[LabelDecision], path) -> None:
    with open(path, "w") as fh:
        for d in decisions:
            fh.write(json.dumps(decision_record(d), sort_keys=True) + "\n")


def read_decisions(path) -> list:
    out = []
    try:
        fh = open(path)
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                r = json.loads(line)
                if r["outcome"] not in (ASSIGNED, DEFERRED):
                    raise ValueError(f"unknown outcome {r['outcome']!r}")
                out.append(LabelDecision(int(r["id"]), r["outcome"], r["label"],
                                         float(r["score"]), (), int(r["chunk"]),
                                         bool(r["retroactive"])))
            except (ValueError, KeyError, TypeError) as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
    return out


# ---- label space and trajectory ---------------------------------------------

def write_labelspace(ls: LabelSpace, path) -> None:
    with open(path, "w") as fh:
        json.dump({"seed_labels": sorted(ls.seed_labels),
                   "discovered": [[y, c] for y, c in ls.discovered]}, fh, indent=1)
        fh.write("\n")


def read_labelspace(path) -> LabelSpace:
    try:
        with open(path) as fh:
            d = json.load(fh)
        return LabelSpace(frozenset(d["seed_labels"]), [(int(y), int(c)) for y, c in d["discovered"]])
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    except (ValueError, KeyError, TypeError) as e:
        raise DataError(f"{path}: malformed label space: {e}") from e


def write_trajectory(stats, path) -> None:
    """One row per chunk: the label count in force while that chunk was processed."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chunk", "n_l"])
        for s in stats:
            w.writerow([s.chunk, s.num_labels - len(s.founded)])


def read_trajectory(path) -> list:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    try:
        return [int(r[-1]) for r in rows[1:] if r]
    except ValueError as e:
        raise DataError(f"{path}: {e}") from e


def write_json(obj, path: Optional[Path]) -> str:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
