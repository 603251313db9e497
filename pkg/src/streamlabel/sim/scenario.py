"""Kernel mixes and label trajectories for the runtime simulator.

The default mix spreads the serial reference time of a labeling run over the
kernel categories by fixed shares. Per-instance times are calibrated once, for
six heuristic functions and the default trajectory, so a larger ensemble costs
more in proportion to its multiplicity.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from ..errors import ConfigError, ContractError
from .models import PARALLEL, SERIAL, KernelSpec
from .scheduler import FAST, GPU, SLOW, HardwareModel, StepWorkload


@dataclass(frozen=True)
class KernelTemplate:
    """A kernel category. ``per_hf`` kernels are emitted once per heuristic function."""
    spec: KernelSpec
    per_hf: bool = False
    once: bool = False  # only in the first step
    copies: int = 1


# Share of total serial time per category (sums to 100).
DEFAULT_SHARES = {
    "sample_processing": 38.0,
    "detect_change": 18.0,
    "test_ensemble": 17.9,
    "label_single": 17.7,
    "warmup": 6.4,
    "others": 2.0,
}

REFERENCE_HF = 6
REFERENCE_TOTAL = 100.0  # seconds of ST.1 time for the reference run


def linear_trajectory(steps: int, start: int = 1, end: int = 10) -> list:
    if steps < 1 or start < 1 or end < start:
        raise ConfigError("trajectory needs steps >= 1 and 1 <= start <= end")
    if steps == 1:
        return [start]
    return [int(round(start + (end - start) * s / (steps - 1))) for s in range(steps)]


def _label_sum(p: float, n_ls: Sequence[int]) -> float:
    return sum((1 - p) + p * n for n in n_ls)


def default_templates(n_ls: Sequence[int], num_hf: int = REFERENCE_HF,
                      total: float = REFERENCE_TOTAL, shares: Optional[dict] = None) -> list:
    """Kernel mix calibrated so one-fast-core time over ``n_ls`` matches ``shares`` of ``total``.

    GPU cost of a time-consuming kernel sits near the all-cores CPU time; for
    small kernels transfer overhead makes the GPU a poor choice and thread
    management is relatively expensive.
    """
    shares = dict(DEFAULT_SHARES if shares is None else shares)
    n_ls = list(n_ls)

    def big(name, share, mult, gpu_ratio):
        p = 0.95
        t = share / 100 * total / (mult * _label_sum(p, n_ls))
        return KernelSpec(name, PARALLEL, True, None, t, 2.0 * t,
                          t * gpu_ratio * 0.85, t * gpu_ratio * 0.15, 0.002 * t, p)

    tpl = [
        KernelTemplate(big("sample_processing", shares["sample_processing"], REFERENCE_HF, 0.16),
                       per_hf=True),
        KernelTemplate(big("detect_change", shares["detect_change"], 1, 0.19)),
        KernelTemplate(big("test_ensemble", shares["test_ensemble"], REFERENCE_HF, 0.14),
                       per_hf=True),
        KernelTemplate(big("label_single", shares["label_single"], REFERENCE_HF, 0.18),
                       per_hf=True),
    ]
    w = shares["warmup"] / 100 * total
    tpl.append(KernelTemplate(KernelSpec("warmup", SERIAL, True, None, w, 2.0 * w,
                                         0.0, 0.0, 0.0, 0.0), once=True))
    # 20 small kernels: half parallel, half serial
    p_small = 0.6
    t_small_par = shares["others"] / 100 * total / 20 / _label_sum(p_small, n_ls)
    t_small_ser = shares["others"] / 100 * total / 20 / len(n_ls)
    tpl.append(KernelTemplate(KernelSpec("small_parallel", PARALLEL, False, None, t_small_par,
                                         2.0 * t_small_par, 0.5 * t_small_par, t_small_par,
                                         0.05 * t_small_par, p_small), copies=10))
    tpl.append(KernelTemplate(KernelSpec("small_serial", SERIAL, False, None, t_small_ser,
                                         2.0 * t_small_ser, 0.0, 0.0, 0.0, 0.0), copies=10))
    return tpl


@dataclass(frozen=True)
class Scenario:
    templates: tuple
    n_l: tuple
    num_hf: int = REFERENCE_HF
    hardware: HardwareModel = field(default_factory=HardwareModel)
    grid_step: float = 0.05

    def __post_init__(self):
        if self.num_hf < 1:
            raise ConfigError("num_hf must be >= 1")
        if not self.n_l or min(self.n_l) < 1:
            raise ConfigError("label trajectory must be non-empty with n_l >= 1")
        object.__setattr__(self, "templates", tuple(self.templates))
        object.__setattr__(self, "n_l", tuple(int(n) for n in self.n_l))

    def with_hf(self, num_hf: int) -> "Scenario":
        return replace(self, num_hf=num_hf)

    def workload(self) -> list:
        steps = []
        for s, n_l in enumerate(self.n_l):
            ks = []
            for t in self.templates:
                if t.once and s > 0:
                    continue
                if t.per_hf:
                    ks.extend(replace(t.spec, hf_id=h) for h in range(self.num_hf))
                else:
                    for c in range(t.copies):
                        ks.append(t.spec if t.copies == 1 else
                                  replace(t.spec, name=f"{t.spec.name}_{c}"))
            steps.append(StepWorkload(tuple(ks), n_l))
        return steps


def default_scenario(steps: int = 100, num_hf: int = REFERENCE_HF,
                     n_l: Optional[Sequence[int]] = None) -> Scenario:
    traj = list(n_l) if n_l is not None else linear_trajectory(steps)
    # calibrate against the reference trajectory so per-instance cost does not depend on steps
    return Scenario(tuple(default_templates(traj)), tuple(traj), num_hf)


# ---- INI round trip ---------------------------------------------------------

_SPEC_FIELDS = ("kind", "time_consuming", "t_ser", "t_ser_slow", "t_exe_acc",
                "t_datacpy_acc", "t_tm", "p")


def save_scenario(sc: Scenario, path) -> None:
    cp = configparser.ConfigParser()
    hw = sc.hardware
    cp["scenario"] = {"num_hf": str(sc.num_hf), "grid_step": repr(sc.grid_step),
                      "n_l": ",".join(str(n) for n in sc.n_l)}
    cp["hardware"] = {"n_fast": str(hw.n_fast), "n_slow": str(hw.n_slow), "gpu": str(hw.gpu).lower()}
    for c in (FAST, SLOW, GPU):
        cp["hardware"][f"power_active_{c}"] = repr(hw.power_active.get(c, 0.0))
        cp["hardware"][f"power_idle_{c}"] = repr(hw.power_idle.get(c, 0.0))
    for t in sc.templates:
        sec = {f: (repr(getattr(t.spec, f)) if isinstance(getattr(t.spec, f), float)
                   else str(getattr(t.spec, f)).lower()) for f in _SPEC_FIELDS}
        sec.update(per_hf=str(t.per_hf).lower(), once=str(t.once).lower(), copies=str(t.copies))
        cp[f"kernel:{t.spec.name}"] = sec
    with open(path, "w") as fh:
        cp.write(fh)


def _read_trajectory(value: str, base: Path) -> list:
    value = value.strip()
    if value.startswith("@"):
        # CSV file with a header and n_l in the last column
        rows = Path(base, value[1:]).read_text().strip().splitlines()[1:]
        return [int(float(r.split(",")[-1])) for r in rows if r.strip()]
    return [int(v) for v in value.replace("\n", ",").split(",") if v.strip()]


def load_scenario(path) -> Scenario:
    """Read a scenario INI file; raises ConfigError on anything malformed."""
    path = Path(path)
    cp = configparser.ConfigParser()
    try:
        if not cp.read(path):
            raise ConfigError(f"cannot read scenario file {path}")
        s = cp["scenario"] if cp.has_section("scenario") else {}
        if "n_l" in s:
            traj = _read_trajectory(s["n_l"], path.parent)
        else:
            traj = linear_trajectory(int(s.get("steps", 100)), int(s.get("n_l_start", 1)),
                                     int(s.get("n_l_end", 10)))
        num_hf = int(s.get("num_hf", REFERENCE_HF))
        grid_step = float(s.get("grid_step", 0.05))
        hw = HardwareModel()
        if cp.has_section("hardware"):
            h = cp["hardware"]
            pa, pi = dict(hw.power_active), dict(hw.power_idle)
            for c in (FAST, SLOW, GPU):
                pa[c] = h.getfloat(f"power_active_{c}", pa[c])
                pi[c] = h.getfloat(f"power_idle_{c}", pi[c])
            hw = HardwareModel(h.getint("n_fast", hw.n_fast), h.getint("n_slow", hw.n_slow),
                               h.getboolean("gpu", hw.gpu), pa, pi)
        kernels = [sec for sec in cp.sections() if sec.startswith("kernel:")]
        if kernels:
            tpl = []
            for sec in kernels:
                k = cp[sec]
                spec = KernelSpec(sec.split(":", 1)[1], k.get("kind", PARALLEL),
                                  k.getboolean("time_consuming", True), None,
                                  k.getfloat("t_ser"), k.getfloat("t_ser_slow"),
                                  k.getfloat("t_exe_acc", 0.0), k.getfloat("t_datacpy_acc", 0.0),
                                  k.getfloat("t_tm", 0.0), k.getfloat("p", 0.0))
                tpl.append(KernelTemplate(spec, k.getboolean("per_hf", False),
                                          k.getboolean("once", False), k.getint("copies", 1)))
        else:
            tpl = default_templates(traj)
        return Scenario(tuple(tpl), tuple(traj), num_hf, hw, grid_step)
    except ConfigError:
        raise
    except (configparser.Error, KeyError, TypeError, ValueError, ContractError) as e:
        raise ConfigError(f"bad scenario file {path}: {e}") from e
