"""JSON and CSV export.

Complex arrays are stored as interleaved ``[re0, im0, re1, im1, ...]`` lists.
Python's float repr round-trips doubles exactly, so ``from_dict(to_dict(obj))``
reproduces values bit for bit.
"""
from __future__ import annotations

import csv
import json
from math import pi
from pathlib import Path

import numpy as np

from .core import GridFunction, MeasurementOperator, PositionGrid, ProtocolResult, Pulse, QuantumState

__all__ = [
    "interleave",
    "deinterleave",
    "to_dict",
    "from_dict",
    "dump_json",
    "load_json",
    "write_csv",
]


def interleave(values) -> list:
    v = np.asarray(values, dtype=complex).ravel()
    out = np.empty(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out.tolist()


def deinterleave(items) -> np.ndarray:
    a = np.asarray(items, dtype=float)
    if a.size % 2:
        raise ValueError("interleaved array has odd length")
    return a[0::2] + 1j * a[1::2]


def _grid_function(fn: GridFunction) -> dict:
    return {"type": "GridFunction", "grid": fn.grid.to_dict(), "values": interleave(fn.values)}


def _pulse(p: Pulse) -> dict:
    return {
        "type": "Pulse",
        "time": {"t_start": p.t_start, "dt": p.dt, "n_samples": int(p.samples.size)},
        "chi": p.chi,
        "samples": interleave(p.samples),
        "area": p.area,
        "area_error": abs(p.area - pi / 2),
    }


def _operator(op: MeasurementOperator) -> dict:
    return {
        "type": "MeasurementOperator",
        "grid": op.grid.to_dict(),
        "upsilon_e": interleave(op.upsilon_e.values),
        "upsilon_g": interleave(op.upsilon_g.values),
    }


def _plain(obj):
    """Make stage summaries JSON-friendly (drops attached states)."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items() if k not in ("state", "basis")}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _result(r: ProtocolResult, full: bool = True) -> dict:
    d = {
        "type": "ProtocolResult",
        "fidelity": r.fidelity,
        "joint_probability": r.joint_probability,
        "step_probabilities": list(r.step_probabilities),
        "stages": _plain(r.stage_summaries),
        "warnings": list(r.warnings),
        "pulse_durations": [p.duration for p in r.pulses],
    }
    if full:
        d["final_state"] = {"n_max": r.final_state.n_max,
                            "rho_fock": interleave(r.final_state.rho_fock)}
        d["realized_operators"] = [_operator(op) for op in r.realized_operators]
        d["pulses"] = [_pulse(p) for p in r.pulses]
    return d


def to_dict(obj, full: bool = True) -> dict:
    if isinstance(obj, GridFunction):
        return _grid_function(obj)
    if isinstance(obj, Pulse):
        return _pulse(obj)
    if isinstance(obj, MeasurementOperator):
        return _operator(obj)
    if isinstance(obj, ProtocolResult):
        return _result(obj, full)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(d: dict):
    kind = d.get("type")
    if kind == "GridFunction":
        return GridFunction(PositionGrid.from_dict(d["grid"]), deinterleave(d["values"]))
    if kind == "Pulse":
        t = d["time"]
        samples = deinterleave(d["samples"])
        if samples.size != t["n_samples"]:
            raise ValueError("sample count does not match time metadata")
        return Pulse(t["t_start"], t["dt"], samples, d.get("chi", 1.0))
    if kind == "MeasurementOperator":
        grid = PositionGrid.from_dict(d["grid"])
        return MeasurementOperator(GridFunction(grid, deinterleave(d["upsilon_e"])),
                                   GridFunction(grid, deinterleave(d["upsilon_g"])))
    if kind == "ProtocolResult":
        if "final_state" not in d:
            raise ValueError("summary-only result cannot be restored")
        n = d["final_state"]["n_max"] + 1
        rho = deinterleave(d["final_state"]["rho_fock"]).reshape(n, n)
        return ProtocolResult(
            QuantumState(rho),
            d["step_probabilities"],
            d["fidelity"],
            [from_dict(o) for o in d.get("realized_operators", [])],
            d.get("stages", []),
            d.get("warnings", []),
            [from_dict(p) for p in d.get("pulses", [])],
        )
    raise ValueError(f"unknown object type {kind!r}")


def dump_json(obj, path, full: bool = True):
    data = obj if isinstance(obj, dict) else to_dict(obj, full)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    return path


def load_json(path):
    return from_dict(json.loads(Path(path).read_text()))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
