"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .core import LabelSpace
from .errors import ConfigError, ContractError, DataError
from .io import (
    read_dataset,
    read_decisions,
    read_labelspace,
    read_trajectory,
    read_truth,
    split_dataset,
    write_dataset,
    write_json,
    write_truth,
)
from .adaptation import final_assignments
from .metrics import summarize, tally
from .pipeline import SWEEP_AXES, label_run, manifest, simulate_reports, sweep, write_label_outputs
from .sim.scenario import default_scenario, load_scenario
from .sim.scheduler import STRATEGIES
from .synthetic import GaussianScenario, generate

EXIT_CONFIG = 2
EXIT_DATA = 3

_CONFIG_FLAGS = [
    ("num_hf", int), ("k_per_hf", int), ("tau", float), ("lam", float), ("slack", float),
    ("max_iters", int), ("q", int), ("min_cohort", int), ("check_period", int),
    ("max_prototypes", int), ("new_label_k", int), ("ttl_chunks", int), ("chunk_size", int),
    ("known_label_fraction", float), ("dl_du_ratio", float), ("seed", int),
]


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI config file; flags override it")
    g = p.add_argument_group("config keys")
    for name, typ in _CONFIG_FLAGS:
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    g.add_argument("--no-bootstrap", dest="bootstrap", action="store_const", const=False,
                   default=None)


def _run_config(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    over = {name: getattr(args, name) for name, _ in _CONFIG_FLAGS}
    over["bootstrap"] = args.bootstrap
    return base.with_overrides(**over)


def _load_inputs(args, cfg: RunConfig):
    if args.data:
        if args.labeled or args.stream:
            raise UsageError("use either --data or --labeled/--stream")
        rows = read_dataset(args.data)
        _, labeled, stream = split_dataset(rows, cfg.known_label_fraction, cfg.dl_du_ratio, cfg.seed)
        truth = {x.id: x.true_label for x in stream}
        return labeled, stream, truth
    if not (args.labeled and args.stream):
        raise UsageError("need --data, or both --labeled and --stream")
    labeled = read_dataset(args.labeled)
    stream = read_dataset(args.stream)
    truth = read_truth(args.truth) if args.truth else None
    return labeled, stream, truth


def cmd_label(args) -> int:
    cfg = _run_config(args)
    labeled, stream, truth = _load_inputs(args, cfg)
    run = label_run(labeled, stream, cfg, truth)
    man = manifest("label", cfg, {"data": args.data, "labeled": args.labeled,
                                  "stream": args.stream, "truth": args.truth})
    write_label_outputs(run, args.out, man)
    print(write_json(run.summary, None), end="")
    return 0


def _strategies(text):
    if not text:
        return list(STRATEGIES)
    names = []
    for s in text.split(","):
        key = s.strip().upper()
        if not key.startswith("ST."):
            key = "ST." + key.removeprefix("ST")
        if key not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r}; expected one of {', '.join(STRATEGIES)}")
        names.append(key)
    return names


def cmd_simulate(args) -> int:
    names = _strategies(args.strategies)
    sc = load_scenario(args.scenario) if args.scenario else default_scenario(args.steps)
    if args.trajectory:
        traj = read_trajectory(args.trajectory)
        if not traj:
            raise DataError(f"{args.trajectory}: empty trajectory")
        sc = default_scenario(n_l=traj) if not args.scenario else \
            type(sc)(sc.templates, tuple(traj), sc.num_hf, sc.hardware, sc.grid_step)
    if args.num_hf:
        sc = sc.with_hf(args.num_hf)
    reports = simulate_reports(sc, names)
    print(f"{'strategy':<9}{'time_s':>12}{'speedup':>10}{'energy_J':>12}{'energy/ST.1':>13}")
    for n, r in reports.items():
        print(f"{n:<9}{r.total_time:>12.4f}{r.speedup_vs_st1:>10.3f}{r.energy:>12.2f}"
              f"{r.energy_vs_st1:>13.3f}")
    if args.out:
        write_json({n: r.as_dict() for n, r in reports.items()}, args.out)
    return 0


def _parse_values(axis: str, text: str) -> list:
    typ = float if axis == "tau" else int
    try:
        return [typ(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"bad --values for {axis}: {e}") from e


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"unknown axis {args.axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    cfg = _run_config(args)
    if args.data or args.labeled:
        labeled, stream, truth = _load_inputs(args, cfg)
    else:
        data = generate(GaussianScenario(seed=args.synthetic_seed))
        labeled, stream, truth = data.labeled, data.stream, None
    rows = sweep(labeled, stream, cfg, args.axis, _parse_values(args.axis, args.values), truth)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_score(args) -> int:
    decisions = read_decisions(args.decisions)
    ls: LabelSpace = read_labelspace(args.labelspace)
    truth = read_truth(args.truth)
    fin = final_assignments(decisions)
    assigned = {i: d.label for i, d in fin.items() if d.assigned}
    t = tally(assigned, truth, ls.seed_labels, ls.discovered_labels)
    out = {"tally": t.as_dict(), "metrics": summarize(t) if t.N else None}
    text = write_json(out, args.out)
    print(text, end="")
    return 0


def cmd_gen_synthetic(args) -> int:
    onsets = () if args.stationary else tuple(int(v) for v in args.novel_onsets.split(",") if v)
    try:
        sc = GaussianScenario(seed=args.seed, novel_onsets=onsets, n_stream=args.n_stream,
                              n_labeled=args.n_labeled, chunk_size=args.chunk_size)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    data = generate(sc)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(data.labeled, out / "labeled.csv")
    write_dataset(data.stream, out / "stream.csv", with_labels=False)
    write_truth(data.stream, out / "truth.csv")
    write_json({"seed": args.seed, "novel_onsets": list(onsets),
                "first_arrival": {str(k): v for k, v in data.first_arrival.items()},
                "seed_labels": list(data.seed_labels), "novel_labels": list(data.novel_labels),
                "centers": data.centers.tolist()}, out / "scenario.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="streamlabel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    lab = sub.add_parser("label", help="label a stream and write the decision log")
    lab.add_argument("--data", type=Path, help="fully labeled CSV; split by the protocol")
    lab.add_argument("--labeled", type=Path)
    lab.add_argument("--stream", type=Path)
    lab.add_argument("--truth", type=Path, help="ground truth for scoring (id,label or dataset CSV)")
    lab.add_argument("--out", type=Path, required=True)
    _add_config_flags(lab)
    lab.set_defaults(func=cmd_label)

    sim = sub.add_parser("simulate", help="run the strategy ladder on a scenario")
    sim.add_argument("--scenario", type=Path, help="scenario INI; default mix when omitted")
    sim.add_argument("--strategies", help="comma list, e.g. ST.1,ST.6 (default: all)")
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--num-hf", type=int)
    sim.add_argument("--trajectory", type=Path, help="nl_trajectory.csv from a label run")
    sim.add_argument("--out", type=Path)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="accuracy and time across one config axis")
    sw.add_argument("--axis", required=True)
    sw.add_argument("--values", required=True, help="comma-separated axis values")
    sw.add_argument("--data", type=Path)
    sw.add_argument("--labeled", type=Path)
    sw.add_argument("--stream", type=Path)
    sw.add_argument("--truth", type=Path)
    sw.add_argument("--synthetic-seed", type=int, default=0)
    sw.add_argument("--out", type=Path)
    _add_config_flags(sw)
    sw.set_defaults(func=cmd_sweep)

    sc = sub.add_parser("score", help="metrics for an existing decision log")
    sc.add_argument("--decisions", type=Path, required=True)
    sc.add_argument("--labelspace", type=Path, required=True)
    sc.add_argument("--truth", type=Path, required=True)
    sc.add_argument("--out", type=Path)
    sc.set_defaults(func=cmd_score)

    gs = sub.add_parser("gen-synthetic", help="write a Gaussian stream with planted novel classes")
    gs.add_argument("--out", type=Path, required=True)
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--novel-onsets", default="10,25")
    gs.add_argument("--stationary", action="store_true")
    gs.add_argument("--n-stream", type=int, default=1000)
    gs.add_argument("--n-labeled", type=int, default=GaussianScenario.n_labeled)
    gs.add_argument("--chunk-size", type=int, default=20)
    gs.set_defaults(func=cmd_gen_synthetic)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ContractError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
