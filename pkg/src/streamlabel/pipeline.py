"""End-to-end orchestration shared by the CLI and the experiment scripts."""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .adaptation import EngineState, final_assignments, run_stream
from .config import RunConfig
from .core import Instance
from .errors import ConfigError, DataError
from .io import (
    write_decisions,
    write_json,
    write_labelspace,
    write_trajectory,
)
from .metrics import summarize, tally
from .sim.scenario import Scenario, default_scenario
from .sim.scheduler import get_strategy, simulate_all

SWEEP_AXES = ("num_hf", "tau", "chunk_size", "k_per_hf")


@dataclass
class LabelRun:
    state: EngineState
    truth: dict
    summary: dict


def hide_labels(stream: Sequence[Instance]) -> list:
    return [Instance(x.id, x.features, None, x.arrival_index) for x in stream]


def label_run(labeled: Sequence[Instance], stream: Sequence[Instance], cfg: RunConfig,
              truth: Optional[dict] = None) -> LabelRun:
    """Run the engine; ``truth`` defaults to the stream's own labels."""
    if not labeled:
        raise DataError("the labeled set is empty")
    missing = [x.id for x in labeled if x.true_label is None]
    if missing:
        raise DataError(f"labeled rows without a label: ids {missing[:5]}")
    if truth is None:
        truth = {x.id: x.true_label for x in stream if x.true_label is not None}
    state = run_stream(labeled, hide_labels(stream), cfg.engine(), cfg.chunk_size)
    fin = final_assignments(state.decisions)
    assigned = {i: d.label for i, d in fin.items() if d.assigned}
    ls = state.label_space
    summary = {
        "n_stream": len(stream),
        "n_labeled": len(labeled),
        "chunks": state.chunk_counter,
        "assigned": len(assigned),
        "deferred": sum(1 for d in fin.values() if not d.assigned),
        "seed_labels": sorted(ls.seed_labels),
        "discovered": [[y, c] for y, c in ls.discovered],
        "prototypes": state.total_prototypes,
    }
    t = tally(assigned, truth, ls.seed_labels, ls.discovered_labels)
    summary["tally"] = t.as_dict()
    summary["metrics"] = summarize(t) if t.N else None
    return LabelRun(state, truth, summary)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, cfg: RunConfig, inputs: dict, extra: Optional[dict] = None) -> dict:
    m = {"command": command, "version": __version__, "config": cfg.as_dict(), "seed": cfg.seed,
         "inputs": {k: {"path": str(v), "sha256": file_digest(v)} for k, v in inputs.items()
                    if v is not None}}
    if extra:
        m.update(extra)
    return m


def write_label_outputs(run: LabelRun, out: Path, man: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_decisions(run.state.decisions, out / "decisions.jsonl")
    write_trajectory(run.state.stats, out / "nl_trajectory.csv")
    write_labelspace(run.state.label_space, out / "labelspace.json")
    write_json(run.summary, out / "summary.json")
    write_json(man, out / "manifest.json")


def simulate_reports(scenario: Scenario, strategies=None) -> dict:
    names = [get_strategy(s).name for s in strategies] if strategies else None
    return simulate_all(scenario.workload(), scenario.hardware, names, scenario.grid_step,
                        scenario.num_hf)


def modeled_time(trajectory: Sequence[int], num_hf: int, strategy: str = "ST.6") -> float:
    """Simulated makespan of a labeling run with ``num_hf`` heuristic functions."""
    sc = default_scenario(n_l=[max(1, int(n)) for n in trajectory] or [1]).with_hf(num_hf)
    from .sim.scheduler import simulate
    return simulate(sc.workload(), strategy, sc.hardware, sc.grid_step, num_hf).total_time


def sweep(labeled, stream, base: RunConfig, axis: str, values: Sequence, truth=None) -> list:
    """One row per axis value: metrics, measured wall time and modeled (simulated) time."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    rows = []
    for v in values:
        cfg = base.with_overrides(**{axis: v})
        t0 = time.perf_counter()
        run = label_run(labeled, stream, cfg, truth)
        wall = time.perf_counter() - t0
        m = run.summary["metrics"] or {}
        traj = [s.num_labels - len(s.founded) for s in run.state.stats]
        rows.append({
            axis: v,
            "accuracy": m.get("accuracy"),
            "f_beta": m.get("f_beta"),
            "assigned": run.summary["assigned"],
            "deferred": run.summary["deferred"],
            "discovered": len(run.summary["discovered"]),
            "wall_time_s": wall,
            "modeled_time_s": modeled_time(traj, cfg.num_hf),
        })
    return rows
