from .models import (Division, KernelSpec, division_time, optimal_division, optimal_threads,
                     parallel_time, serial_time, speedup)
from .scenario import Scenario, default_scenario, load_scenario, save_scenario
from .scheduler import STRATEGIES, HardwareModel, SimReport, simulate, simulate_all

__all__ = [
    "Division", "KernelSpec", "division_time", "optimal_division", "optimal_threads",
    "parallel_time", "serial_time", "speedup", "Scenario", "default_scenario",
    "load_scenario", "save_scenario", "STRATEGIES", "HardwareModel", "SimReport",
    "simulate", "simulate_all",
]
