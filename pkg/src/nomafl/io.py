"""Structured-text (JSON) instance and report files for the CLI."""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .errors import InvalidInstanceError
from .model import (
    CanonicalInstance,
    ChannelState,
    DeviceProfile,
    SolveReport,
    SystemParams,
    canonicalize,
)

SCHEMA_VERSION = 1


def instance_to_json(inst: CanonicalInstance) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "params": dataclasses.asdict(inst.params),
        "devices": [dataclasses.asdict(p) for p in inst.profiles],
        "h": list(map(float, inst.h)),
        "g": list(map(float, inst.g)),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def instance_from_json(text: str) -> CanonicalInstance:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInstanceError(
            f"unsupported instance schema_version {version!r} (want {SCHEMA_VERSION})")
    try:
        params = SystemParams(**doc["params"])
        profiles = [DeviceProfile(**d) for d in doc["devices"]]
        channel = ChannelState(h=np.asarray(doc["h"], dtype=float),
                               g=np.asarray(doc["g"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"malformed instance file: {exc}") from None
    return canonicalize(params, profiles, channel)


def save_instance(inst: CanonicalInstance, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(instance_to_json(inst))


def load_instance(path: str) -> CanonicalInstance:
    with open(path) as fh:
        return instance_from_json(fh.read())


def report_to_dict(report: SolveReport) -> dict:
    a = report.allocation
    return {
        "scheme": report.scheme,
        "feasible": report.feasible,
        "learning_error": report.learning_error,
        "iterations": report.iterations,
        "objective_trace": list(report.objective_trace),
        "per_device_energy_j": list(map(float, report.per_device_energy_j)),
        "notes": list(report.notes),
        "allocation": {
            "d_gen": list(map(float, a.d_gen)),
            "t_down_s": a.t_down_s, "t_br_s": a.t_br_s,
            "t_loc_s": a.t_loc_s, "t_up_s": a.t_up_s,
            "p_down_w": list(map(float, a.p_down_w)),
            "q_up_w": list(map(float, a.q_up_w)),
            "sic_order": list(map(int, a.sic_order)),
            "freq_hz": list(map(float, a.freq_hz)),
        },
    }


def save_reports(reports: list[SolveReport], path: str) -> None:
    doc = {"schema_version": SCHEMA_VERSION,
           "reports": [report_to_dict(r) for r in reports]}
    with open(path, "w") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
