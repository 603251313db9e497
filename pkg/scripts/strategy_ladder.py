"""Simulate ST.1..ST.6 on the default scenario and print makespan, speedup and energy."""
import argparse
import json

from streamlabel.pipeline import simulate_reports
from streamlabel.sim.scenario import default_scenario, load_scenario


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="INI scenario file (default: built-in scenario)")
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--num-hf", type=int, default=6)
    ap.add_argument("--json", help="also write full reports here")
    args = ap.parse_args(argv)

    sc = load_scenario(args.scenario) if args.scenario else default_scenario(args.steps, args.num_hf)
    reports = simulate_reports(sc)
    print(f"{'strategy':8} {'time_s':>9} {'speedup':>8} {'energy_J':>9} {'energy/ST.1':>11}")
    for name, r in reports.items():
        print(f"{name:8} {r.total_time:9.2f} {r.speedup_vs_st1:8.2f} {r.energy:9.1f} "
              f"{r.energy_vs_st1:11.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({n: r.as_dict() for n, r in reports.items()}, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
