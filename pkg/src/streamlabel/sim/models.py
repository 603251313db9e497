"""Analytical kernel-time models: thread speedup, concurrency control and kernel division.

All times are for one chunk. ``n_l`` is the number of existing labels; the
label-sensitive fraction ``p`` of a kernel scales linearly with it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..errors import ContractError

PARALLEL = "parallel"
SERIAL = "serial"


@dataclass(frozen=True)
class KernelSpec:
    name: str
    kind: str = PARALLEL
    time_consuming: bool = True
    hf_id: Optional[int] = None
    t_ser: float = 1.0  # fast CPU, one thread, one chunk, one label
    t_ser_slow: float = 2.0
    t_exe_acc: float = 0.2
    t_datacpy_acc: float = 0.0
    t_tm: float = 0.0
    p: float = 0.95

    def __post_init__(self):
        if self.kind not in (PARALLEL, SERIAL):
            raise ContractError(f"kernel kind must be parallel or serial, got {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ContractError(f"P must lie in [0, 1], got {self.p}")
        if self.kind == SERIAL and self.p != 0.0:
            raise ContractError("serial kernels have P = 0")
        if self.t_ser <= 0 or self.t_ser_slow <= 0:
            raise ContractError("serial reference times must be positive")
        if min(self.t_exe_acc, self.t_datacpy_acc, self.t_tm) < 0:
            raise ContractError("accelerator and thread-management times must be non-negative")

    @property
    def t_ser_fast(self) -> float:
        return self.t_ser

    @property
    def t_acc(self) -> float:
        return self.t_exe_acc + self.t_datacpy_acc


@dataclass(frozen=True)
class Division:
    n_t_fast: int
    n_t_slow: int
    w_fast: float
    w_slow: float
    w_acc: float

    def astuple(self) -> tuple:
        return (self.n_t_fast, self.n_t_slow, self.w_fast, self.w_slow, self.w_acc)

    @property
    def threads(self) -> int:
        return self.n_t_fast + self.n_t_slow

    @property
    def uses_gpu(self) -> bool:
        return self.w_acc > 0


def _check_counts(n_t: int, n_l: int) -> None:
    if n_t < 1 or n_l < 1:
        raise ContractError(f"thread and label counts must be >= 1, got n_t={n_t}, n_l={n_l}")


def serial_time(k: KernelSpec, n_l: int) -> float:
    """Single-thread time with ``n_l`` labels (the speedup numerator)."""
    return k.t_ser * (1 - k.p) + k.t_ser * k.p * n_l


def parallel_time(k: KernelSpec, n_t: int, n_l: int) -> float:
    _check_counts(n_t, n_l)
    return k.t_ser * (1 - k.p) + k.t_ser / n_t * k.p * n_l


def division_time(k: KernelSpec, n_t_fast: int, n_t_slow: int, w_fast: float, w_slow: float,
                  w_acc: float, n_l: int) -> float:
    if n_l < 1:
        raise ContractError(f"n_l must be >= 1, got {n_l}")
    ws = (w_fast, w_slow, w_acc)
    if min(ws) < 0 or abs(sum(ws) - 1.0) > 1e-9:
        raise ContractError(f"weights must be non-negative and sum to 1, got {ws}")
    for w, n, name in ((w_fast, n_t_fast, "fast"), (w_slow, n_t_slow, "slow")):
        if n < 0 or (w > 0 and n < 1):
            raise ContractError(f"{name} CPU has weight {w} but {n} threads")
    per_label = k.t_acc * w_acc
    if w_fast > 0:
        per_label += k.t_ser_fast * w_fast / n_t_fast
    if w_slow > 0:
        per_label += k.t_ser_slow * w_slow / n_t_slow
    return k.t_ser * (1 - k.p) + k.p * n_l * per_label


def speedup(k: KernelSpec, n_t: int, n_l: int, division: Optional[Division] = None) -> float:
    """Serial time over threaded time (thread management included).

    With a ``division`` the parallel time comes from ``division_time`` and the
    thread count is the CPU threads of that division.
    """
    if division is None:
        t_per = parallel_time(k, n_t, n_l)
    else:
        n_t = division.threads
        t_per = division_time(k, *division.astuple(), n_l)
    return serial_time(k, n_l) / (k.t_tm * n_t + t_per)


def threaded_time(k: KernelSpec, division: Division, n_l: int) -> float:
    """Wall time of a kernel under ``division``: the speedup denominator."""
    return k.t_tm * division.threads + division_time(k, *division.astuple(), n_l)


def optimal_threads(k: KernelSpec, n_l: int, max_threads: int) -> int:
    if max_threads < 1:
        raise ContractError("max_threads must be >= 1")
    best, best_s = 1, -np.inf
    for n in range(1, max_threads + 1):
        s = speedup(k, n, n_l)
        if s > best_s:
            best, best_s = n, s
    return best


@lru_cache(maxsize=64)
def weight_grid(grid_step: float) -> np.ndarray:
    """All (w_fast, w_slow, w_acc) on multiples of ``grid_step`` summing to one."""
    m = int(round(1.0 / grid_step))
    if m < 1 or abs(m * grid_step - 1.0) > 1e-9:
        raise ContractError(f"grid_step must divide 1, got {grid_step}")
    rows = [(i, j, m - i - j) for i in range(m + 1) for j in range(m + 1 - i)]
    return np.array(rows, dtype=float) / m


def optimal_division(k: KernelSpec, n_l: int, n_fast: int, n_slow: int, gpu: bool,
                     grid_step: float = 0.05, fixed_threads: bool = False) -> Division:
    """Grid search for the division with the largest speedup (smallest threaded time).

    Threads range over 1..available for each CPU class with positive weight and
    are 0 for a class with zero weight. With ``fixed_threads`` only the weights
    are searched and every used class runs all available threads. Ties go to
    the lexicographically smallest (n_fast, n_slow, w_fast, w_slow, w_acc).
    """
    if n_fast + n_slow < 1 and not gpu:
        raise ContractError("no processing unit available")
    return _optimal_division(k, n_l, n_fast, n_slow, gpu, grid_step, fixed_threads)


@lru_cache(maxsize=200_000)
def _optimal_division(k, n_l, n_fast, n_slow, gpu, grid_step, fixed_threads) -> Division:
    W = weight_grid(grid_step)
    ok = np.ones(len(W), dtype=bool)
    if n_fast == 0:
        ok &= W[:, 0] == 0
    if n_slow == 0:
        ok &= W[:, 1] == 0
    if not gpu:
        ok &= W[:, 2] == 0
    W = W[ok]
    fast_opts = [n_fast] if fixed_threads else range(1, n_fast + 1)
    slow_opts = [n_slow] if fixed_threads else range(1, n_slow + 1)
    base = k.t_ser * (1 - k.p)
    best_key, best = None, None
    for nf in [0, *fast_opts] if n_fast else [0]:
        for ns in [0, *slow_opts] if n_slow else [0]:
            m = np.ones(len(W), dtype=bool)
            m &= (W[:, 0] > 0) == (nf > 0)
            m &= (W[:, 1] > 0) == (ns > 0)
            if not np.any(m):
                continue
            Wm = W[m]
            per_label = k.t_acc * Wm[:, 2]
            if nf:
                per_label = per_label + k.t_ser_fast * Wm[:, 0] / nf
            if ns:
                per_label = per_label + k.t_ser_slow * Wm[:, 1] / ns
            t = k.t_tm * (nf + ns) + base + k.p * n_l * per_label
            i = int(np.argmin(t))  # grid rows are already in lexicographic order
            key = (float(t[i]), nf, ns, *Wm[i])
            if best_key is None or key < best_key:
                best_key = key
                best = Division(nf, ns, float(Wm[i, 0]), float(Wm[i, 1]), float(Wm[i, 2]))
    return best
