"""Event-driven simulation of labeling steps on a fast/slow CPU + GPU system.

Kernels of one step are independent; the step ends at a barrier when the last
one finishes. A placed kernel holds every unit it was given for its whole
predicted duration.

Strategy ladder:
    ST.1  one fast core, FIFO, single thread
    ST.2  all CPU cores, FIFO, equal split over CPU classes with all idle threads
    ST.3  ST.2 plus the GPU (equal split over idle classes)
    ST.4  ST.3 splits with placement policies and longest-first round-robin order
    ST.5  FIFO with grid-optimal kernel division (all idle threads per used class)
    ST.6  policies + ordering + concurrency control + optimal division
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import ContractError
from .models import (
    PARALLEL,
    SERIAL,
    Division,
    KernelSpec,
    optimal_division,
    serial_time,
    threaded_time,
)

FAST, SLOW, GPU = "fast", "slow", "gpu"


@dataclass(frozen=True)
class HardwareModel:
    n_fast: int = 4
    n_slow: int = 4
    gpu: bool = True
    power_active: dict = field(default_factory=lambda: {FAST: 2.0, SLOW: 0.8, GPU: 2.5})
    power_idle: dict = field(default_factory=lambda: {FAST: 0.2, SLOW: 0.08, GPU: 0.25})

    def __post_init__(self):
        if self.n_fast < 1 or self.n_slow < 0:
            raise ContractError("need at least one fast core and a non-negative slow core count")
        for d in (self.power_active, self.power_idle):
            if any(v < 0 for v in d.values()):
                raise ContractError("powers must be non-negative")

    def units(self) -> list:
        out = [(FAST, i) for i in range(self.n_fast)] + [(SLOW, i) for i in range(self.n_slow)]
        if self.gpu:
            out.append((GPU, 0))
        return out

    def __hash__(self):
        return hash((self.n_fast, self.n_slow, self.gpu))


@dataclass(frozen=True)
class Strategy:
    name: str
    units: str  # "one-fast" | "cpu" | "all"
    ordered: bool  # longest-first round-robin ordering + placement policies
    division: str  # "serial" | "naive" | "weights" | "full"


STRATEGIES = {
    "ST.1": Strategy("ST.1", "one-fast", False, "serial"),
    "ST.2": Strategy("ST.2", "cpu", False, "naive"),
    "ST.3": Strategy("ST.3", "all", False, "naive"),
    "ST.4": Strategy("ST.4", "all", True, "naive"),
    "ST.5": Strategy("ST.5", "all", False, "weights"),
    "ST.6": Strategy("ST.6", "all", True, "full"),
}


def get_strategy(name) -> Strategy:
    if isinstance(name, Strategy):
        return name
    key = str(name).upper()
    if not key.startswith("ST."):
        key = "ST." + key.lstrip("ST")
    if key not in STRATEGIES:
        raise ContractError(f"unknown strategy {name!r}; expected one of {sorted(STRATEGIES)}")
    return STRATEGIES[key]


@dataclass(frozen=True)
class KernelInstance:
    spec: KernelSpec
    seq: int = 0  # position in the step's emission (FIFO) order

    @property
    def hf_id(self) -> Optional[int]:
        return self.spec.hf_id

    @property
    def name(self) -> str:
        return self.spec.name


@dataclass(frozen=True)
class StepWorkload:
    kernels: tuple
    n_l: int

    def __post_init__(self):
        if self.n_l < 1:
            raise ContractError("n_l must be >= 1")
        object.__setattr__(self, "kernels", tuple(
            k if isinstance(k, KernelInstance) else KernelInstance(k, i)
            for i, k in enumerate(self.kernels)))


@dataclass(frozen=True)
class Placement:
    kernel: KernelInstance
    units: tuple  # ((class, index), ...)
    division: Optional[Division]
    duration: float


@dataclass
class HardwareState:
    idle: dict  # class -> sorted list of idle unit indices

    @classmethod
    def for_strategy(cls, hw: HardwareModel, strategy: Strategy) -> "HardwareState":
        idle = {FAST: list(range(hw.n_fast)), SLOW: list(range(hw.n_slow)),
                GPU: [0] if hw.gpu else []}
        if strategy.units == "one-fast":
            idle = {FAST: [0], SLOW: [], GPU: []}
        elif strategy.units == "cpu":
            idle[GPU] = []
        return cls(idle)

    def count(self, c: str) -> int:
        return len(self.idle[c])

    def take(self, c: str, n: int) -> list:
        got, self.idle[c] = self.idle[c][:n], self.idle[c][n:]
        return [(c, i) for i in got]

    def release(self, units) -> None:
        for c, i in units:
            self.idle[c].append(i)
            self.idle[c].sort()


def predicted_time(k: KernelInstance, n_l: int) -> float:
    return serial_time(k.spec, n_l)


def policy_order(kernels: Sequence[KernelInstance], n_l: int, cursor: int,
                 num_hf: int) -> list:
    """Round-robin over HF ids (starting at ``cursor``), longest kernels first.

    Each HF's kernels (and the HF-less kernels as one more group) are ranked
    by descending predicted time; the merged list takes every group's rank-0
    kernel before any rank-1 kernel, longest first within a rank.
    """
    groups: dict = {}
    for k in kernels:
        groups.setdefault(k.hf_id, []).append(k)
    keyed = []
    for hf, ks in groups.items():
        ks = sorted(ks, key=lambda k: (-predicted_time(k, n_l), k.name, k.seq))
        rr = -1 if hf is None else (hf - cursor) % max(num_hf, 1)
        for rank, k in enumerate(ks):
            keyed.append(((rank, -predicted_time(k, n_l), rr, k.name, k.seq), k))
    return [k for _, k in sorted(keyed, key=lambda t: t[0])]


def _naive_division(state: HardwareState, classes) -> Optional[Division]:
    avail = [c for c in classes if state.count(c) > 0]
    if not avail:
        return None
    w = 1.0 / len(avail)
    nf = state.count(FAST) if FAST in avail else 0
    ns = state.count(SLOW) if SLOW in avail else 0
    return Division(nf, ns, w if FAST in avail else 0.0, w if SLOW in avail else 0.0,
                    w if GPU in avail else 0.0)


def _take_division(state: HardwareState, d: Division) -> tuple:
    units = state.take(FAST, d.n_t_fast) + state.take(SLOW, d.n_t_slow)
    if d.w_acc > 0:
        units += state.take(GPU, 1)
    return tuple(units)


def _serial_placement(k: KernelInstance, state: HardwareState) -> Optional[Placement]:
    for c, t in ((FAST, k.spec.t_ser), (SLOW, k.spec.t_ser_slow)):
        if state.count(c):
            return Placement(k, tuple(state.take(c, 1)), None, t)
    return None


def _plan(k: KernelInstance, strategy: Strategy, state: HardwareState, n_l: int,
          grid_step: float) -> Optional[Placement]:
    spec = k.spec
    if strategy.division == "serial":
        if not state.count(FAST):
            return None
        t = spec.t_ser if spec.kind == SERIAL else serial_time(spec, n_l)
        return Placement(k, tuple(state.take(FAST, 1)), None, t)
    if spec.kind == SERIAL:
        return _serial_placement(k, state)

    small = strategy.ordered and not spec.time_consuming
    if small:
        # small parallel kernels stay on one CPU class: fast first, slow when fast is full
        for c in (FAST, SLOW):
            n = state.count(c)
            if not n:
                continue
            if strategy.division == "full":
                d = optimal_division(spec, n_l, n if c == FAST else 0, n if c == SLOW else 0,
                                     False, grid_step)
            else:
                d = Division(n if c == FAST else 0, n if c == SLOW else 0,
                             1.0 if c == FAST else 0.0, 1.0 if c == SLOW else 0.0, 0.0)
            return Placement(k, _take_division(state, d), d, threaded_time(spec, d, n_l))
        return None

    if strategy.division == "naive":
        d = _naive_division(state, (FAST, SLOW, GPU))
    else:
        nf, ns, g = state.count(FAST), state.count(SLOW), state.count(GPU) > 0
        if nf + ns == 0 and not g:
            return None
        d = optimal_division(spec, n_l, nf, ns, g, grid_step,
                             fixed_threads=strategy.division == "weights")
    if d is None:
        return None
    return Placement(k, _take_division(state, d), d, threaded_time(spec, d, n_l))


def place(ready: Sequence[KernelInstance], strategy, state: HardwareState, n_l: int,
          grid_step: float = 0.05) -> list:
    """Placements for the kernels that can start now, in dispatch order.

    FIFO strategies stop at the first kernel that cannot be placed; ordered
    strategies skip it and keep filling idle units. ``state`` is updated.
    """
    strategy = get_strategy(strategy)
    out = []
    for k in ready:
        pl = _plan(k, strategy, state, n_l, grid_step)
        if pl is None:
            if not strategy.ordered:
                break
            continue
        out.append(pl)
    return out


@dataclass
class SimReport:
    strategy: str
    step_makespans: list
    total_time: float
    busy: dict  # "fast0" -> seconds
    idle: dict
    energy: float = 0.0
    speedup_vs_st1: float = 1.0
    energy_vs_st1: float = 1.0
    placements: list = field(default_factory=list)  # (step, kernel, units, start, end)

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "total_time": self.total_time,
            "speedup_vs_st1": self.speedup_vs_st1,
            "energy": self.energy,
            "energy_vs_st1": self.energy_vs_st1,
            "busy": self.busy,
            "idle": self.idle,
            "step_makespans": self.step_makespans,
        }


def unit_name(u) -> str:
    return f"{u[0]}{u[1]}"


def energy(report: SimReport, hw: HardwareModel) -> float:
    """Active power while busy plus idle power for the rest of the run, over all units."""
    total = 0.0
    for u in hw.units():
        name = unit_name(u)
        total += hw.power_active.get(u[0], 0.0) * report.busy.get(name, 0.0)
        total += hw.power_idle.get(u[0], 0.0) * report.idle.get(name, report.total_time)
    return total


def _simulate(workload: Sequence[StepWorkload], strategy: Strategy, hw: HardwareModel,
              grid_step: float, num_hf: int, keep_placements: bool) -> SimReport:
    busy = {unit_name(u): 0.0 for u in hw.units()}
    t = 0.0
    makespans = []
    log = []
    for si, step in enumerate(workload):
        start = t
        state = HardwareState.for_strategy(hw, strategy)
        if strategy.ordered:
            ready = policy_order(step.kernels, step.n_l, si % max(num_hf, 1), num_hf)
        else:
            ready = list(step.kernels)
        running: list = []
        seq = 0
        while ready or running:
            for pl in place(ready, strategy, state, step.n_l, grid_step):
                ready.remove(pl.kernel)
                heapq.heappush(running, (t + pl.duration, seq, pl))
                seq += 1
                for u in pl.units:
                    busy[unit_name(u)] += pl.duration
                if keep_placements:
                    log.append((si, pl.kernel.name, pl.kernel.hf_id,
                                tuple(unit_name(u) for u in pl.units), t, t + pl.duration))
            if not running:
                raise ContractError(f"step {si}: no unit can run {ready[0].name!r}")
            end, _, pl = heapq.heappop(running)
            t = end
            state.release(pl.units)
            while running and running[0][0] <= t:
                _, _, other = heapq.heappop(running)
                state.release(other.units)
        makespans.append(t - start)
    total = t
    idle = {name: total - b for name, b in busy.items()}
    rep = SimReport(strategy.name, makespans, total, busy, idle, placements=log)
    rep.energy = energy(rep, hw)
    return rep


def simulate(workload: Sequence[StepWorkload], strategy, hw: HardwareModel = HardwareModel(),
             grid_step: float = 0.05, num_hf: int = 6, baseline: Optional[SimReport] = None,
             keep_placements: bool = False) -> SimReport:
    """Simulate ``workload`` under ``strategy``; speedup and energy are relative to ST.1."""
    strategy = get_strategy(strategy)
    rep = _simulate(workload, strategy, hw, grid_step, num_hf, keep_placements)
    if baseline is None:
        baseline = rep if strategy.name == "ST.1" else _simulate(
            workload, STRATEGIES["ST.1"], hw, grid_step, num_hf, False)
    rep.speedup_vs_st1 = baseline.total_time / rep.total_time if rep.total_time > 0 else 1.0
    rep.energy_vs_st1 = rep.energy / baseline.energy if baseline.energy > 0 else 1.0
    return rep


def simulate_all(workload, hw: HardwareModel = HardwareModel(), strategies=None,
                 grid_step: float = 0.05, num_hf: int = 6) -> dict:
    names = [get_strategy(s).name for s in (strategies or STRATEGIES)]
    base = _simulate(workload, STRATEGIES["ST.1"], hw, grid_step, num_hf, False)
    base.energy_vs_st1 = 1.0
    return {n: simulate(workload, n, hw, grid_step, num_hf, baseline=base) for n in names}


def validate_kernel(spec: KernelSpec) -> None:
    if spec.kind == PARALLEL and spec.t_acc <= 0:
        raise ContractError(f"kernel {spec.name!r} needs a positive GPU time")
