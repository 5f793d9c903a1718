"""Resource allocation and Monte-Carlo simulation for federated learning
over a NOMA radio link with server-side synthetic-data augmentation.

Typical use::

    from nomafl import ScenarioConfig, sample_instance, run_scheme, SchemeId

    cfg = ScenarioConfig(seed=7, k_devices=15, drops=100,
                         schemes=("NomaAigc",), sweep_parameter="t_max_s",
                         sweep_values=(900.0,))
    report = run_scheme(sample_instance(cfg, drop_index=0), SchemeId.NomaAigc)

The ``nomafl`` console script exposes the same machinery as ``solve``,
``sweep``, ``plot`` and ``oracle`` subcommands.
"""
from .bcd import bcd_solve, infeasible_report
from .dgen import DgenSubproblem, dgen_oracle_grid, solve_dgen
from .downlink import DownlinkSolution, solve_downlink
from .errors import (
    EnergyInfeasibleError,
    InfeasibleError,
    InvalidInstanceError,
    RateOverflowError,
    ScheduleInfeasibleError,
    SynthesisInfeasibleError,
)
from .io import (
    instance_from_json,
    instance_to_json,
    load_instance,
    report_to_dict,
    save_instance,
    save_reports,
)
from .model import (
    Allocation,
    CanonicalInstance,
    ChannelState,
    DeviceProfile,
    SolveReport,
    SystemParams,
    Violation,
    canonicalize,
    check_feasible,
    dbm_to_watts,
    learning_error,
    watts_to_dbm,
)
from .plotting import emit_plot
from .sampling import ScenarioConfig, config_from_json, config_to_json, sample_instance
from .schedule import TimeAllocation, time_allocation
from .schemes import SCHEME_ORDER, SchemeId, check_report, run_scheme
from .sweep import ResultRow, SweepFormatError, read_rows_csv, run_sweep, write_rows_csv
from .uplink import UplinkSolution, solve_uplink, uplink_oracle_perm

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "CanonicalInstance",
    "ChannelState",
    "DeviceProfile",
    "DgenSubproblem",
    "DownlinkSolution",
    "EnergyInfeasibleError",
    "InfeasibleError",
    "InvalidInstanceError",
    "RateOverflowError",
    "ResultRow",
    "SCHEME_ORDER",
    "ScenarioConfig",
    "ScheduleInfeasibleError",
    "SchemeId",
    "SolveReport",
    "SweepFormatError",
    "SynthesisInfeasibleError",
    "SystemParams",
    "TimeAllocation",
    "UplinkSolution",
    "Violation",
    "bcd_solve",
    "canonicalize",
    "check_feasible",
    "check_report",
    "config_from_json",
    "config_to_json",
    "dbm_to_watts",
    "dgen_oracle_grid",
    "emit_plot",
    "infeasible_report",
    "instance_from_json",
    "instance_to_json",
    "learning_error",
    "load_instance",
    "read_rows_csv",
    "report_to_dict",
    "run_scheme",
    "run_sweep",
    "sample_instance",
    "save_instance",
    "save_reports",
    "solve_dgen",
    "solve_downlink",
    "solve_uplink",
    "time_allocation",
    "uplink_oracle_perm",
    "watts_to_dbm",
    "write_rows_csv",
]
