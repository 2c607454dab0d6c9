"""Command-line interface.

Every command writes plain data files (JSON/CSV) into ``--out`` and finishes
with ``manifest.json`` listing them. Exit status is 0 on success, 2 for bad
arguments and 1 when the library rejects the request or a built-in check
fails.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict
from math import pi
from pathlib import Path

import numpy as np

from . import __version__
from .core import DEFAULT_GRID, PositionGrid, QuantumState, SystemParams
from .dynamics import analytic_tophat, realize_operator, tophat_pulse
from .io import dump_json, load_json, to_dict, write_csv
from .oracles import run_all
from .protocol import (
    DEFAULT_SWEEP,
    ProtocolConfig,
    _basis,
    coherence_budget,
    fock_fidelity_curve,
    run_protocol,
    sweep_squeezing,
    synthesis_grid_for,
)
from .states import momentum_marginal, position_marginal, wigner
from .synthesis import PulseSynthesizer, SynthesisWarning, operator_fidelity, optimize_chi
from .targets import TargetSpec, parse_target, render_target

__all__ = ["main", "build_parser"]

FIGURES = [f"fig2{c}" for c in "abcdef"] + [f"fig3{c}" for c in "abcdef"]
FIG2_TARGETS = {"fig2a": "fock:0", "fig2b": "cat:d=2,phi=1.5707963267948966",
                "fig2c": "plane:k=2,lo=-3,hi=3", "fig2d": "fock:3"}
FIG3_STAGE = {"fig3a": 0, "fig3b": 1, "fig3c": -2, "fig3d": -1}
TOPHAT_TOL = 1e-9


class CheckFailed(RuntimeError):
    """A built-in consistency check did not pass."""


# argument types -------------------------------------------------------------

def _target(text):
    try:
        return parse_target(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _chi(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"chi must be 'auto' or a number, got {text!r}") from None
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("chi must be positive")
    return value


def _grid(text):
    try:
        xmax, n = text.split(",")
        return PositionGrid.symmetric(float(xmax), int(n))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--grid expects XMAX,N ({exc})") from None


def _floats(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive(kind):
    def conv(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _nonneg(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


# run context ----------------------------------------------------------------

class Run:
    """Output directory bookkeeping; the manifest is written last."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.notes: list[str] = []

    def path(self, name):
        self.outputs.append(name)
        return self.out / name

    def json(self, name, data):
        dump_json(data, self.path(name))

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)

    def text(self, name, text):
        self.path(name).write_text(text)

    def warn(self, message):
        self.notes.append(str(message))
        print(f"warning: {message}", file=sys.stderr)

    def manifest(self):
        snapshot = {k: _plain(v) for k, v in sorted(vars(self.args).items())
                    if k not in ("func", "out")}
        missing = [o for o in self.outputs if not (self.out / o).exists()]
        if missing:
            raise CheckFailed(f"outputs missing: {missing}")
        dump_json({
            "command": self.command,
            "config_snapshot": snapshot,
            "outputs": list(self.outputs),
            "warnings": list(self.notes),
            "versions": _versions(),
        }, self.out / "manifest.json")


def _plain(v):
    if isinstance(v, (TargetSpec, PositionGrid)):
        return str(v) if isinstance(v, TargetSpec) else v.to_dict()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _versions():
    import numba
    import scipy
    return f"mechstate {__version__}; numpy {np.__version__}; scipy {scipy.__version__}; numba {numba.__version__}"


def _params(args) -> SystemParams:
    nbar = getattr(args, "nbar", None)
    return SystemParams.from_lab_units(args.lambda0_mhz, args.omegam_mhz, args.t2_us, args.q,
                                       5.0 if nbar is None else nbar)


def _synth_grid(args, spec):
    base = args.grid or DEFAULT_GRID
    return synthesis_grid_for(spec, base)


def _protocol_config(args, target, squeeze, steps):
    return ProtocolConfig(nbar=args.nbar, squeeze_s=squeeze, steps=steps, target=target,
                          params=_params(args), synthesis_grid=args.grid or DEFAULT_GRID,
                          n_max=args.nmax)


def _aligned(target, realized):
    """Realized values normalized and rotated onto the target's global phase."""
    r = realized.normalized().values
    overlap = np.sum(target.values * r.conj())
    return r * np.exp(1j * np.angle(overlap))


# plot scripts (matplotlib, read the CSV next to them) -----------------------

_PLOT_HEAD = """import csv
import matplotlib.pyplot as plt
import numpy as np


def load(name):
    with open(name) as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return {h: data[:, i] for i, h in enumerate(head)}

"""

_PLOTS = {
    "curves": """d = load("curves.csv")
x = d.pop("x")
for name, y in d.items():
    plt.plot(x, y, "--" if name.startswith("realized") or name.startswith("numeric") else "-", label=name)
plt.xlabel("x")
plt.legend()
plt.savefig("{name}.png", dpi=150)
""",
    "wigner": """d = load("wigner.csv")
xs, ps = np.unique(d["x"]), np.unique(d["p"])
W = d["W"].reshape(xs.size, ps.size)
plt.pcolormesh(xs, ps, W.T, cmap="RdBu_r", shading="auto")
plt.xlabel("x")
plt.ylabel("p")
plt.colorbar(label="W")
plt.savefig("{name}.png", dpi=150)
""",
    "sweep": """d = load("curves.csv")
fig, ax = plt.subplots()
ax2 = ax.twinx()
for mode, color in (("two_step", "C0"), ("three_step", "gray")):
    ax.plot(d["s"], d["fidelity_" + mode], "--", color=color)
    ax2.plot(d["s"], d["probability_" + mode], "-", color=color)
ax.set_xlabel("s")
ax.set_ylabel("fidelity")
ax2.set_ylabel("probability")
fig.savefig("{name}.png", dpi=150)
""",
    "fock": """d = load("curve.csv")
plt.plot(d["n"], d["fidelity"], "o-")
plt.xlabel("n")
plt.ylabel("operator fidelity")
plt.savefig("{name}.png", dpi=150)
""",
}


def _plot_script(run, kind, name):
    run.text("plot.py", _PLOT_HEAD + _PLOTS[kind].replace("{name}", name))


# synthesis -------------------------------------------------------------------

def _fit_pulse(run, spec, chi, grid):
    target = render_target(spec, grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SynthesisWarning)
        est = PulseSynthesizer(chi=chi).fit(target)
    for w in caught:
        if issubclass(w.category, SynthesisWarning):
            run.warn(w.message)
    return target, est


def cmd_synthesize(args) -> int:
    run = Run(args, "synthesize")
    grid = _synth_grid(args, args.target)
    target, est = _fit_pulse(run, args.target, args.chi, grid)
    run.json("pulse.json", to_dict(est.pulse_))
    data = to_dict(est.operator_)
    data["target"] = str(args.target)
    data["chi"] = est.chi_
    data["fidelity"] = est.fidelity_
    run.json("realized_upsilon.json", data)
    run.text("fidelity.txt", f"{est.fidelity_!r}\n")
    run.manifest()
    print(f"{args.target}  chi={est.chi_:.6g}  fidelity={est.fidelity_:.6f}")
    return 0


def cmd_realize(args) -> int:
    run = Run(args, "realize")
    pulse = load_json(args.pulse)
    grid = args.grid or DEFAULT_GRID
    op = realize_operator(pulse, grid, args.lambda0)
    data = to_dict(op)
    if args.target is not None:
        fid = operator_fidelity(render_target(args.target, grid), op.upsilon_e)
        data["target"] = str(args.target)
        data["fidelity"] = fid
    run.json("realized_upsilon.json", data)
    if args.target is not None:
        run.text("fidelity.txt", f"{fid!r}\n")
    run.manifest()
    return 0


# protocol --------------------------------------------------------------------

def _wigner_rows(stage, basis, n=121):
    spread = max(stage["var_x"], stage["var_p"])
    extent = float(min(basis.grid.x_max, max(5.0, 5.0 * np.sqrt(spread))))
    wm = wigner(stage["state"], basis, PositionGrid.symmetric(extent, n), extent, n)
    rows = [(x, p, wm.values[i, j]) for i, x in enumerate(wm.x_axis)
            for j, p in enumerate(wm.p_axis)]
    return wm, rows


def _marginal_rows(result, target, basis):
    grid = basis.grid
    ideal = QuantumState.pure(basis.to_fock(render_target(target, grid).values))
    cols = [position_marginal(result.final_state, basis).values.real,
            momentum_marginal(result.final_state, basis).values.real,
            position_marginal(ideal, basis).values.real,
            momentum_marginal(ideal, basis).values.real]
    return [(q, *vals) for q, *vals in zip(grid.x, *cols)]


def _stage_json(stage):
    return {k: v for k, v in stage.items() if k not in ("state", "basis")}


def _note_warnings(run, result):
    for msg in result.warnings:
        if msg not in run.notes:
            run.warn(msg)


def cmd_protocol(args) -> int:
    run = Run(args, "protocol")
    steps = args.steps or 2
    out = {}
    if args.squeeze is not None or args.sweep is None:
        s = 8.0 if args.squeeze is None else args.squeeze
        cfg = _protocol_config(args, args.target, s, steps)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SynthesisWarning)
            result = run_protocol(cfg, keep_states=True)
        _note_warnings(run, result)
        basis = result.stage_summaries[0]["basis"]
        out = to_dict(result, full=False)
        out["config"] = {"nbar": cfg.nbar, "squeeze_s": cfg.squeeze_s, "steps": cfg.steps,
                         "target": str(cfg.target), "n_max": basis.n_max}
        run.json("result.json", out)
        for k, idx in enumerate((0, 1, -2, -1), start=1):
            _, rows = _wigner_rows(result.stage_summaries[idx], basis)
            run.csv(f"wigner_stage{k}.csv", ("x", "p", "W"), rows)
        run.csv("marginals.csv", ("q", "position", "momentum", "ideal_position", "ideal_momentum"),
                _marginal_rows(result, cfg.target, basis))
        print(f"fidelity={result.fidelity:.6f}  joint_probability={result.joint_probability:.6g}")
    if args.sweep is not None:
        modes = ("two_step", "three_step") if args.steps is None else (
            {2: "two_step", 3: "three_step"}[args.steps],)
        cfg = _protocol_config(args, args.target, args.sweep[0], steps)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SynthesisWarning)
            rows = sweep_squeezing(cfg, args.sweep, modes)
        for r in rows:
            if r.error:
                run.warn(f"s={r.s:g} {r.mode}: {r.error}")
        run.csv("sweep.csv", ("s", "mode", "fidelity", "probability"),
                [(r.s, r.mode, r.fidelity, r.probability) for r in rows])
        if not out:
            run.json("result.json", {"type": "Sweep", "rows": [asdict(r) for r in rows]})
    run.manifest()
    return 0


# figures ---------------------------------------------------------------------

def _fig2_target(run, args):
    spec = args.target or parse_target(FIG2_TARGETS[args.name])
    grid = _synth_grid(args, spec)
    target, est = _fit_pulse(run, spec, "auto", grid)
    r = _aligned(target, est.operator_.upsilon_e)
    t = target.values
    run.csv("curves.csv", ("x", "target_re", "target_im", "realized_re", "realized_im"),
            zip(grid.x, t.real, t.imag, r.real, r.imag))
    run.json("summary.json", {"target": str(spec), "chi": est.chi_, "fidelity": est.fidelity_,
                              "pulse_duration": est.pulse_.duration,
                              "pulse_area": est.pulse_.area})
    _plot_script(run, "curves", args.name)


def _fig2e(run, args):
    grid = args.grid or DEFAULT_GRID
    alpha0 = 1.0
    numeric = realize_operator(tophat_pulse(alpha0), grid).upsilon_e.values
    exact = analytic_tophat(grid.x, alpha0)
    err = float(np.max(np.abs(numeric - exact)))
    run.csv("curves.csv", ("x", "numeric_abs", "analytic_abs", "numeric_im", "analytic_im"),
            zip(grid.x, np.abs(numeric), np.abs(exact), numeric.imag, exact.imag))
    run.json("summary.json", {"alpha0": alpha0, "max_abs_error": err,
                              "max_magnitude_error": float(np.max(np.abs(np.abs(numeric) - np.abs(exact)))),
                              "tolerance": TOPHAT_TOL, "passed": err <= TOPHAT_TOL})
    _plot_script(run, "curves", args.name)
    if err > TOPHAT_TOL:
        raise CheckFailed(f"top-hat numeric vs analytic error {err:.3g} > {TOPHAT_TOL}")


def _fig2f(run, args):
    spec = args.target or TargetSpec("two_lobed")
    grid = _synth_grid(args, spec)
    target = render_target(spec, grid)
    header, cols, fids = ["x", "target"], [grid.x, target.values.real], {}
    for chi in args.chis:
        _, est = _fit_pulse(run, spec, chi, grid)
        r = _aligned(target, est.operator_.upsilon_e)
        header.append(f"realized_chi={chi:g}")
        cols.append(r.real)
        fids[f"{chi:g}"] = est.fidelity_
    run.csv("curves.csv", header, zip(*cols))
    run.json("summary.json", {"target": str(spec), "fidelity_by_chi": fids})
    _plot_script(run, "curves", args.name)


def _fig3_stage(run, args):
    spec = args.target or TargetSpec.fock(3)
    cfg = _protocol_config(args, spec, args.squeeze, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SynthesisWarning)
        result = run_protocol(cfg, keep_states=True)
    _note_warnings(run, result)
    basis = result.stage_summaries[0]["basis"]
    stage = result.stage_summaries[FIG3_STAGE[args.name]]
    wm, rows = _wigner_rows(stage, basis)
    run.csv("wigner.csv", ("x", "p", "W"), rows)
    summary = {"stage": _stage_json(stage), "wigner_min": float(wm.values.min()),
               "wigner_max": float(wm.values.max()), "wigner_total": wm.total(),
               "fidelity": result.fidelity, "joint_probability": result.joint_probability}
    if args.name == "fig3d":
        run.csv("marginals.csv", ("q", "position", "momentum", "ideal_position", "ideal_momentum"),
                _marginal_rows(result, spec, basis))
    run.json("summary.json", summary)
    _plot_script(run, "wigner", args.name)


def _fig3e(run, args):
    spec = args.target or TargetSpec.fock(3)
    s_values = args.sweep or list(DEFAULT_SWEEP)
    cfg = _protocol_config(args, spec, s_values[0], 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SynthesisWarning)
        rows = sweep_squeezing(cfg, s_values)
    for r in rows:
        if r.error:
            run.warn(f"s={r.s:g} {r.mode}: {r.error}")
    run.csv("sweep.csv", ("s", "mode", "fidelity", "probability"),
            [(r.s, r.mode, r.fidelity, r.probability) for r in rows])
    by = {(r.s, r.mode): r for r in rows}
    curves = ["fidelity_two_step", "probability_two_step",
              "fidelity_three_step", "probability_three_step"]
    wide = [(s, by[s, "two_step"].fidelity, by[s, "two_step"].probability,
             by[s, "three_step"].fidelity, by[s, "three_step"].probability)
            for s in [float(v) for v in s_values]]
    run.csv("curves.csv", ["s"] + curves, wide)
    run.json("summary.json", {"target": str(spec), "nbar": args.nbar, "curves": curves})
    _plot_script(run, "sweep", args.name)


def _fig3f(run, args):
    rows = fock_fidelity_curve(range(args.n_fock + 1), grid=args.grid or DEFAULT_GRID)
    run.csv("curve.csv", ("n", "fidelity", "chi", "duration"),
            [(r["n"], r["fidelity"], r["chi"], r["duration"]) for r in rows])
    run.json("summary.json", {"rows": rows})
    _plot_script(run, "fock", args.name)


def cmd_figure(args) -> int:
    run = Run(args, f"figure {args.name}")
    if args.name in FIG2_TARGETS:
        _fig2_target(run, args)
    elif args.name == "fig2e":
        _fig2e(run, args)
    elif args.name == "fig2f":
        _fig2f(run, args)
    elif args.name in FIG3_STAGE:
        _fig3_stage(run, args)
    elif args.name == "fig3e":
        _fig3e(run, args)
    else:
        _fig3f(run, args)
    run.manifest()
    return 0


# budget / selfcheck ----------------------------------------------------------

def cmd_budget(args) -> int:
    run = Run(args, "budget")
    params = _params(args)
    n_rot = args.steps - 1
    if args.durations_ns is not None:
        pulses = [d * 1e-9 for d in args.durations_ns]
        labels = [f"pulse{i + 1}" for i in range(len(pulses))]
    else:
        gauss = TargetSpec.gaussian(args.squeeze)
        pulses, labels = [], []
        for spec in [gauss] * (args.steps - 1) + [args.target]:
            grid = _synth_grid(args, spec)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", SynthesisWarning)
                opt = optimize_chi(render_target(spec, grid))
            for w in caught:
                run.warn(w.message)
            pulses.append(opt.pulse)
            labels.append(str(spec))
    report = coherence_budget(params, pulses, n_rotations=n_rot, strong_factor=args.strong_factor)
    report["pulse_labels"] = labels
    report["unitary_limit_quoted_s"] = 200e-9
    run.json("budget.json", report)
    run.manifest()
    flag = "ok" if report["unitary_ok"] else "exceeds limit"
    print(f"protocol {report['protocol_total_s'] * 1e9:.1f} ns ({flag}, limit "
          f"{report['unitary_limit_s'] * 1e9:.0f} ns)")
    return 0


def cmd_selfcheck(args) -> int:
    run = Run(args, "selfcheck")
    reports = run_all(seed=args.seed, n_cases=args.cases)
    run.json("oracles.json", {"reports": [r.to_dict() for r in reports]})
    run.manifest()
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  max_error={r.max_error:.3g}  "
              f"tolerance={r.tolerance:g}")
    if not all(r.passed for r in reports):
        raise CheckFailed("one or more oracle checks failed")
    return 0


# parser ----------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--grid", type=_grid, default=None, help="synthesis grid XMAX,N (default 8,1024)")
    g.add_argument("--nmax", type=_positive(int), default=None, help="Fock cutoff (default: automatic)")
    g.add_argument("--out", default="mechstate-out", help="output directory")
    g.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    g.add_argument("--threads", type=_positive(int), default=None, help="BLAS thread limit")
    u = p.add_argument_group("physical units (coherence budget only)")
    u.add_argument("--lambda0-mhz", type=_positive(float), default=8.5)
    u.add_argument("--omegam-mhz", type=_positive(float), default=125.0)
    u.add_argument("--t2-us", type=_positive(float), default=2.0)
    u.add_argument("--q", type=_positive(float), default=1e5)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mechstate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mechstate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", parents=[common], help="fit a drive pulse to a target")
    p.add_argument("--target", type=_target, required=True)
    p.add_argument("--chi", type=_chi, default="auto")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("realize", parents=[common], help="realized operator of a saved pulse")
    p.add_argument("--pulse", required=True, help="pulse.json written by synthesize")
    p.add_argument("--target", type=_target, default=None)
    p.add_argument("--lambda0", type=_positive(float), default=1.0)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("protocol", parents=[common], help="conditional state preparation")
    p.add_argument("--nbar", type=_nonneg, default=5.0)
    p.add_argument("--squeeze", type=_positive(float), default=None)
    p.add_argument("--sweep", type=_floats, default=None, help="s1,s2,... (ascending)")
    p.add_argument("--target", type=_target, default=TargetSpec.fock(3))
    p.add_argument("--steps", type=int, choices=(2, 3), default=None)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("figure", parents=[common], help="data behind a figure panel")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--target", type=_target, default=None)
    p.add_argument("--nbar", type=_nonneg, default=5.0)
    p.add_argument("--squeeze", type=_positive(float), default=8.0)
    p.add_argument("--sweep", type=_floats, default=None)
    p.add_argument("--chis", type=_floats, default=[1.0, 2.0, 3.0], help="chi values for fig2f")
    p.add_argument("--n-fock", type=int, default=5, help="largest n for fig3f")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("budget", parents=[common], help="pulse durations vs coherence times")
    p.add_argument("--nbar", type=_nonneg, default=5.0)
    p.add_argument("--squeeze", type=_positive(float), default=8.0)
    p.add_argument("--target", type=_target, default=TargetSpec.fock(3))
    p.add_argument("--steps", type=int, choices=(2, 3), default=2)
    p.add_argument("--durations-ns", type=_floats, default=None,
                   help="check these pulse durations instead of synthesizing")
    p.add_argument("--strong-factor", type=_positive(float), default=10.0)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("selfcheck", parents=[common], help="run the validation oracles")
    p.add_argument("--cases", type=_positive(int), default=100)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=args.threads):
                return args.func(args)
        return args.func(args)
    except (ValueError, TypeError, ArithmeticError, OSError, CheckFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
