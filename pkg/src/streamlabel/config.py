"""Run configuration: one flat set of keys, read from an INI file and/or CLI flags.

File layout (every key optional, unknown keys rejected)::

    [ensemble]
    num_hf = 6
    k_per_hf = 40
    tau = 0.7
    lam = 1.0
    slack = 0.10
    bootstrap = true
    max_iters = 100

    [adaptation]
    q = 5
    min_cohort =            ; empty -> 2q
    check_period = 1
    max_prototypes =        ; empty -> 2 * num_hf * k_per_hf
    new_label_k = 1
    ttl_chunks = 5

    [run]
    chunk_size = 20
    known_label_fraction = 0.20
    dl_du_ratio = 0.1
    seed = 0
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .adaptation import AdaptationConfig, EngineConfig
from .ensemble import EnsembleConfig
from .errors import ConfigError


@dataclass(frozen=True)
class RunConfig:
    num_hf: int = 6
    k_per_hf: int = 40
    tau: float = 0.7
    lam: float = 1.0
    slack: float = 0.10
    bootstrap: bool = True
    max_iters: int = 100
    q: int = 5
    min_cohort: Optional[int] = None
    check_period: int = 1
    max_prototypes: Optional[int] = None
    new_label_k: int = 1
    ttl_chunks: int = 5
    chunk_size: int = 20
    known_label_fraction: float = 0.20
    dl_du_ratio: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ConfigError("chunk_size must be positive")
        if not 0 < self.known_label_fraction <= 1:
            raise ConfigError("known_label_fraction must lie in (0, 1]")
        if self.dl_du_ratio <= 0:
            raise ConfigError("dl_du_ratio must be positive")
        self.engine()  # validates the remaining keys

    def engine(self) -> EngineConfig:
        ens = EnsembleConfig(num_hf=self.num_hf, k_per_hf=self.k_per_hf, tau=self.tau,
                             lam=self.lam, slack=self.slack, seed=self.seed,
                             bootstrap=self.bootstrap, max_iters=self.max_iters)
        ad = AdaptationConfig(q=self.q, min_cohort=self.min_cohort,
                              check_period=self.check_period,
                              max_prototypes=self.max_prototypes,
                              new_label_k=self.new_label_k, ttl_chunks=self.ttl_chunks)
        return EngineConfig(ens, ad)

    def as_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        unknown = set(kw) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return replace(self, **kw)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e


SECTIONS = {
    "ensemble": ("num_hf", "k_per_hf", "tau", "lam", "slack", "bootstrap", "max_iters"),
    "adaptation": ("q", "min_cohort", "check_period", "max_prototypes", "new_label_k", "ttl_chunks"),
    "run": ("chunk_size", "known_label_fraction", "dl_du_ratio", "seed"),
}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse(key: str, raw: str):
    raw = raw.strip()
    t = str(_TYPES[key])
    if raw == "" or raw.lower() == "none":
        if "Optional" in t:
            return None
        raise ConfigError(f"{key} needs a value")
    try:
        if "bool" in t:
            v = raw.lower()
            if v not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return v in ("true", "1", "yes")
        if "int" in t:
            return int(raw)
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e


def load_config(path) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    values = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        for key, raw in cp[sec].items():
            if key not in SECTIONS[sec]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{sec}]")
            values[key] = _parse(key, raw)
    try:
        return RunConfig(**values)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def save_config(cfg: RunConfig, path) -> None:
    cp = configparser.ConfigParser()
    d = cfg.as_dict()
    for sec, keys in SECTIONS.items():
        cp[sec] = {k: "" if d[k] is None else str(d[k]).lower() if isinstance(d[k], bool)
                   else str(d[k]) for k in keys}
    with open(path, "w") as fh:
        cp.write(fh)
