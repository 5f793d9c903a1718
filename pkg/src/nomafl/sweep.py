"""Monte-Carlo parameter sweeps and their CSV form.

One row per (sweep value, scheme): means over drops.  Infeasible or
failed solves contribute a learning error of exactly 1 with zero
iterations and zero energy; a sweep never aborts because one scheme on
one drop failed.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .bcd import infeasible_report
from .sampling import ScenarioConfig, sample_instance
from .schemes import SCHEME_ORDER, SchemeId, run_scheme

CSV_COLUMNS = ("sweep_param", "sweep_value", "scheme", "mean_error",
               "feasible_frac", "mean_iters", "mean_energy_j")


@dataclass(frozen=True)
class ResultRow:
    sweep_param: str
    sweep_value: float
    scheme: str
    mean_error: float
    feasible_frac: float
    mean_iters: float
    mean_energy_j: float


class SweepFormatError(ValueError):
    """Malformed sweep CSV; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _selected_schemes(config: ScenarioConfig) -> list[SchemeId]:
    wanted = set()
    for name in config.schemes:
        try:
            wanted.add(SchemeId(name))
        except ValueError:
            raise ValueError(f"unknown scheme {name!r}") from None
    return [s for s in SCHEME_ORDER if s in wanted]


def run_sweep(config: ScenarioConfig) -> list[ResultRow]:
    """All (sweep value, scheme) rows, sorted by value then scheme order."""
    schemes = _selected_schemes(config)
    rows: list[ResultRow] = []
    for value in sorted(config.sweep_values):
        err = {s: 0.0 for s in schemes}
        feas = {s: 0 for s in schemes}
        iters = {s: 0.0 for s in schemes}
        energy = {s: 0.0 for s in schemes}
        for drop in range(config.drops):
            inst = sample_instance(config, drop, sweep_value=value)
            for s in schemes:
                try:
                    rep = run_scheme(inst, s)
                except Exception:   # a failed solve must not abort the sweep
                    rep = infeasible_report(inst, scheme=s.value)
                err[s] += rep.learning_error
                feas[s] += 1 if rep.feasible else 0
                iters[s] += rep.iterations
                energy[s] += float(np.mean(rep.per_device_energy_j))
        n = config.drops
        for s in schemes:
            rows.append(ResultRow(
                sweep_param=config.sweep_parameter, sweep_value=float(value),
                scheme=s.value, mean_error=err[s] / n,
                feasible_frac=feas[s] / n, mean_iters=iters[s] / n,
                mean_energy_j=energy[s] / n))
    return rows


def _fmt(x: float) -> str:
    return format(x, ".12g")


def write_rows_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join((r.sweep_param, _fmt(r.sweep_value), r.scheme,
                               _fmt(r.mean_error), _fmt(r.feasible_frac),
                               _fmt(r.mean_iters), _fmt(r.mean_energy_j))) + "\n")


def read_rows_csv(path: str) -> list[ResultRow]:
    """Parse a sweep CSV; raises :class:`SweepFormatError` with the line
    number on any malformed content."""
    rows: list[ResultRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SweepFormatError(1, "missing header") from None
        if tuple(header) != CSV_COLUMNS:
            raise SweepFormatError(1, f"bad header {header!r}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CSV_COLUMNS):
                raise SweepFormatError(lineno,
                                       f"expected {len(CSV_COLUMNS)} fields, got {len(rec)}")
            try:
                rows.append(ResultRow(
                    sweep_param=rec[0], sweep_value=float(rec[1]), scheme=rec[2],
                    mean_error=float(rec[3]), feasible_frac=float(rec[4]),
                    mean_iters=float(rec[5]), mean_energy_j=float(rec[6])))
            except ValueError as exc:
                raise SweepFormatError(lineno, str(exc)) from None
    return rows
