"""Command-line front end.

Subcommands: ``tomography``, ``scan``, ``errorbudget`` and ``dump-sequence``.
All files start with a provenance header (version, config digest, seed).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .frames import TWO_PI
from .noiselab import (
    error_budget,
    fit_gate_fidelity,
    gate_target,
    rabi_experiment,
    ramsey_experiment,
    residual_stark_check,
    simulate_tomography,
    stark_scan,
)
from .noiselab.fitting import ExperimentResult
from .sequencer.compile import GATE_NAMES, gate_program, measurement_program, prep_sequence
from .sequencer.execute import ExecutionContext
from .tomography import analyze, chi_to_text, projection_noise_errorbars
from .tomography.measurements import MEASUREMENT_TABLE

TRANSITION_ALIASES = {"carrier": "carrier", "bsb": "blue_sideband", "blue_sideband": "blue_sideband"}
SCAN_DEFAULTS = {
    "rabi": "0:400e-6:5e-6",
    "ramsey": "0:1.5e-3:1e-4",
    "stark": "1.05:1.95:0.1",
    "residual_stark": "0:4e-4:2e-5",
}


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included when on the grid) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        a, b, s = (float(x) for x in parts)
        if s <= 0 or b < a:
            raise ValueError(f"empty range {text!r}")
        n = int(np.floor((b - a) / s + 1e-9)) + 1
        return a + s * np.arange(n)
    return np.array([float(x) for x in text.split(",") if x.strip()])


def _header(cfg: RunConfig, command: str) -> str:
    return (f"iontrap {__version__}\nconfig_sha256 = {cfg.digest}\nseed = {cfg.seed}\n"
            f"command = {command}")


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _context(cfg: RunConfig, mode: str | None = None) -> ExecutionContext:
    ctx = ExecutionContext(cfg.params, mode or cfg.mode)
    return ctx.calibrated() if ctx.mode == "physical" else ctx


def _noise(cfg: RunConfig):
    nm = cfg.noise
    return None if nm.is_null and nm.heating_rate == 0 else nm


def cmd_tomography(cfg: RunConfig, gate: str, command: str, bootstrap: int = 20) -> list[str]:
    """Run 16 x 15 process tomography for one gate (or the identity/cnot/cnotx2 series)."""
    gates = ("identity", "cnot", "cnotx2") if gate == "series" else (gate,)
    header = _header(cfg, command)
    ctx = _context(cfg)
    rows, written, fps = [], [], []
    for g in gates:
        ds = simulate_tomography(g, ctx, _noise(cfg), cfg.n_trajectories, cfg.seed, cfg.shots, cfg.workers)
        target = gate_target(g)
        res = analyze(ds, target)
        bars = projection_noise_errorbars(ds, target, bootstrap, cfg.seed) if cfg.shots else \
            {"f_process_std": 0.0, "f_mean_std": 0.0}
        summary = {"f_process": res.f_process, "f_process_std": bars["f_process_std"], "f_mean": res.f_mean,
                   "f_mean_std": bars["f_mean_std"], "f_haar": res.f_haar}
        base = os.path.join(cfg.out_dir, f"tomography_{g}")
        _write(base + "_dataset.csv", ds.to_text(header))
        _write(base + "_chi.txt", chi_to_text(res.chi, summary, header))
        written += [base + "_dataset.csv", base + "_chi.txt"]
        rows.append((g, summary))
        fps.append(res.f_process)
    lines = [f"# {h}" for h in header.splitlines()]
    lines.append("gate,f_process,f_process_std,f_mean,f_mean_std,f_haar")
    for g, s in rows:
        lines.append(f"{g},{s['f_process']:.6f},{s['f_process_std']:.6f},{s['f_mean']:.6f},"
                     f"{s['f_mean_std']:.6f},{s['f_haar']:.6f}")
    if gate == "series":
        f_i, f_g = fit_gate_fidelity(fps)
        lines.append(f"# fit F_n = F_i F_g^n: F_i = {f_i:.6f}, F_g = {f_g:.6f}")
    path = os.path.join(cfg.out_dir, "tomography_summary.csv")
    _write(path, "\n".join(lines) + "\n")
    return written + [path]


def cmd_scan(cfg: RunConfig, experiment: str, values: np.ndarray, transition: str, command: str,
             nbar: float = 0.0, calibrated: bool = True) -> list[str]:
    """Run one calibration scan and write its CSV."""
    header = _header(cfg, command)
    noise = _noise(cfg)
    n = cfg.n_trajectories
    if experiment == "rabi":
        res = rabi_experiment(values, transition, _context(cfg), noise, nbar, n, cfg.seed, cfg.shots)
    elif experiment == "ramsey":
        res = ramsey_experiment(values, transition, _context(cfg), noise, n, cfg.seed)
    elif experiment == "stark":
        res = stark_scan(values, context=cfg.params, noise=noise, n_trajectories=n, seed=cfg.seed, shots=cfg.shots)
        res = ExperimentResult(res.name, res.x, res.y / TWO_PI, res.stderr / TWO_PI,
                               {"b_hz": res.params["b"] / TWO_PI, "A_hz": res.params["A"] / TWO_PI,
                                "n_fit": res.params["n_fit"]}, {"b_hz": res.errors["b"] / TWO_PI},
                               res.residuals / TWO_PI, ("detuning_over_omega_sec", "abs_shift_hz", "stderr_hz"))
    elif experiment == "residual_stark":
        ctx = ExecutionContext(cfg.params, "physical")
        res = residual_stark_check(values, ctx.calibrated() if calibrated else ctx, noise, n, cfg.seed)
        res.params["offset_hz"] = res.params["offset"] / TWO_PI
        res.errors["offset_hz"] = res.errors["offset"] / TWO_PI
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    path = os.path.join(cfg.out_dir, f"scan_{experiment}.csv")
    _write(path, res.to_csv(header))
    return [path]


def cmd_errorbudget(cfg: RunConfig, command: str) -> list[str]:
    """Write the per-source CNOT error budget as CSV and as a text table."""
    header = _header(cfg, command)
    budget = error_budget(n_trajectories=cfg.n_trajectories, params=cfg.params, model=cfg.noise, seed=cfg.seed,
                          workers=cfg.workers)
    csv_path = os.path.join(cfg.out_dir, "errorbudget.csv")
    txt_path = os.path.join(cfg.out_dir, "errorbudget.txt")
    _write(csv_path, budget.to_csv(header))
    _write(txt_path, "".join(f"# {h}\n" for h in header.splitlines()) + budget.to_table())
    return [csv_path, txt_path]


def cmd_dump_sequence(cfg: RunConfig, gate: str | None, prep: int | None, meas: int | None) -> str:
    """Text dump of prep + gate + measurement (any part optional)."""
    p = cfg.params
    prog = None
    parts = []
    if prep is not None:
        parts.append(prep_sequence(prep, p))
    if gate is not None:
        parts.append(gate_program(gate, p))
    if meas is not None:
        if not 1 <= meas <= len(MEASUREMENT_TABLE):
            raise ValueError(f"measurement index must be in 1..{len(MEASUREMENT_TABLE)}")
        spec = MEASUREMENT_TABLE[meas - 1]
        parts.append(measurement_program(spec.u_ops, spec.v_ops, p))
    if not parts:
        raise ValueError("nothing to dump: give --gate, --prep and/or --meas")
    for part in parts:
        prog = part if prog is None else prog + part
    return prog.dump()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (dotted keys, Hz)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    shots = common.add_mutually_exclusive_group()
    shots.add_argument("--shots", type=int, help="shots per cell (binomial sampling)")
    shots.add_argument("--exact", action="store_true", help="exact probabilities")
    common.add_argument("--mode", choices=("idealized", "physical"))
    common.add_argument("--trajectories", type=int, help="Monte-Carlo trajectories per cell")
    common.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")

    parser = argparse.ArgumentParser(prog="iontrap", description="Single-ion atom-motion CNOT simulator")
    parser.add_argument("--version", action="version", version=f"iontrap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tomography", parents=[common], help="16 x 15 process tomography")
    t.add_argument("--gate", choices=GATE_NAMES + ("series",), default="cnot")
    t.add_argument("--bootstrap", type=int, default=20, help="projection-noise resamples (shot mode)")

    s = sub.add_parser("scan", parents=[common], help="calibration scans")
    s.add_argument("experiment", choices=tuple(SCAN_DEFAULTS))
    s.add_argument("--detunings", help="stark: detunings in units of omega_sec, start:stop:step")
    s.add_argument("--delays", help="ramsey/residual_stark: delays in s")
    s.add_argument("--durations", help="rabi: pulse lengths in s")
    s.add_argument("--transition", choices=tuple(TRANSITION_ALIASES), default=None)
    s.add_argument("--nbar", type=float, default=0.0, help="rabi: initial thermal occupation")
    s.add_argument("--uncalibrated", action="store_true",
                   help="residual_stark: use the bare shift model without the calibration trim")

    sub.add_parser("errorbudget", parents=[common], help="CNOT error budget")

    d = sub.add_parser("dump-sequence", parents=[common], help="print a compiled pulse program")
    d.add_argument("--gate", choices=GATE_NAMES)
    d.add_argument("--prep", type=int)
    d.add_argument("--meas", type=int)
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig.from_mapping()
    over = {}
    if args.seed is not None:
        over["execution.seed"] = args.seed
    if args.out is not None:
        over["output.directory"] = args.out
    if args.shots is not None:
        over["execution.shots"] = args.shots
    if args.exact:
        over["execution.shots"] = "exact"
    if args.mode is not None:
        over["execution.mode"] = args.mode
    if args.trajectories is not None:
        over["execution.n_trajectories"] = args.trajectories
    if args.workers is not None:
        over["execution.workers"] = args.workers
    d = dict(cfg.values)
    d.update({k: str(v) for k, v in over.items()})
    return RunConfig.from_mapping(d)


def _command_string(argv) -> str:
    # Output paths and worker counts do not change results, so they stay out of the header.
    skip = {"--out", "--workers"}
    out, drop = [], False
    for a in argv:
        if drop:
            drop = False
            continue
        key = a.split("=", 1)[0]
        if key in skip:
            drop = "=" not in a
            continue
        out.append(a)
    return " ".join(out)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    command = _command_string(argv)
    try:
        cfg = _config(args)
        if args.command == "tomography":
            paths = cmd_tomography(cfg, args.gate, command, args.bootstrap)
        elif args.command == "scan":
            exp = args.experiment
            spec = {"stark": args.detunings, "rabi": args.durations}.get(exp, args.delays)
            values = parse_range(spec or SCAN_DEFAULTS[exp])
            default_tr = "bsb" if exp == "rabi" else "carrier"
            transition = TRANSITION_ALIASES[args.transition or default_tr]
            paths = cmd_scan(cfg, exp, values, transition, command, args.nbar, not args.uncalibrated)
        elif args.command == "errorbudget":
            paths = cmd_errorbudget(cfg, command)
        else:
            sys.stdout.write(cmd_dump_sequence(cfg, args.gate, args.prep, args.meas))
            return 0
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"iontrap: error: {msg}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
