"""Thermometry, the heating-rate bound and the CNOT error budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import qlinalg as ql
from ..frames import TrapLaserParams
from ..sequencer.execute import ExecutionContext
from ..tomography.dataset import analyze
from .experiments import thermal_state
from .noise import NoiseModel
from .qpt import gate_target, simulate_tomography

SOURCES = ("off_resonant", "laser_freq", "laser_intensity")
RED_GENERATOR = ql.kron(ql.SPLUS, ql.A)
BLUE_GENERATOR = ql.kron(ql.SPLUS, ql.ADAG)


def thermometry(red_prob: float, blue_prob: float) -> float:
    """Mean phonon number from the red/blue sideband shelving ratio, r / (1 - r).

    Raises:
        ValueError: For probabilities outside [0, 1], blue <= 0 or r >= 1.
    """
    for v in (red_prob, blue_prob):
        if not 0.0 <= v <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
    if blue_prob <= 0:
        raise ValueError("blue-sideband probability must be positive")
    r = red_prob / blue_prob
    if r >= 1.0:
        raise ValueError(f"sideband ratio {r:.3f} >= 1 is unphysical for a thermal state")
    return r / (1.0 - r)


def nbar_to_ratio(nbar: float) -> float:
    """Sideband ratio n / (n + 1) of a thermal state (inverse of the thermometry map)."""
    return nbar / (nbar + 1.0)


def sideband_pi_probabilities(nbar: float, params: TrapLaserParams | None = None) -> tuple[float, float]:
    """Exact shelving probabilities after red and blue sideband pi pulses on a thermal state.

    The pi pulse is timed for the n = 0 -> 1 blue (n = 1 -> 0 red) transition;
    the state is truncated to n <= 2.
    """
    params = params or TrapLaserParams.reference()
    rho = thermal_state(nbar, "S")
    out = []
    for g in (RED_GENERATOR, BLUE_GENERATOR):
        h = 0.5 * params.sideband_rabi * (g + g.conj().T)
        u = ql.expm_hermitian(h, np.pi / params.sideband_rabi)
        out.append(float(np.real(np.trace(ql.P_D @ u @ rho @ u.conj().T))))
    return out[0], out[1]


def heating_budget(t_gate: float, p_gate: float) -> float:
    """Largest tolerable heating rate (quanta/s) for error ``p_gate`` in a gate of length ``t_gate``.

    One quantum gained during the gate is taken to cause an error, so the
    bound is p_gate / t_gate.
    """
    if t_gate <= 0 or p_gate <= 0:
        raise ValueError("gate time and target error must be positive")
    return p_gate / t_gate


@dataclass(frozen=True)
class ErrorBudget:
    """Process-fidelity deficits of the CNOT per noise source.

    Attributes:
        deficits: {source: 1 - F_p} with the source acting alone.
        total: 1 - F_p with all requested sources together.
        product_total: 1 - prod(1 - deficit).
        fidelities: {label: F_p} of every simulated configuration.
    """

    deficits: dict
    total: float
    product_total: float
    fidelities: dict

    def rows(self) -> list[tuple[str, float]]:
        return [(k, v) for k, v in self.deficits.items()] + [("total", self.total)]

    def to_csv(self, header: str = "") -> str:
        lines = [f"# {h}" for h in header.splitlines()] if header else []
        lines.append("source,infidelity,process_fidelity")
        for k, v in self.rows():
            lines.append(f"{k},{v:.6f},{1 - v:.6f}")
        lines.append(f"# product_rule_total = {self.product_total:.6f}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        lines = [f"{'source':<18}{'infidelity':>12}"]
        lines += [f"{k:<18}{100 * v:>11.2f}%" for k, v in self.rows()]
        lines.append(f"{'product rule':<18}{100 * self.product_total:>11.2f}%")
        return "\n".join(lines) + "\n"


def _source_noise(model: NoiseModel, sources) -> NoiseModel | None:
    nm = NoiseModel(
        laser_linewidth_equiv=model.laser_linewidth_equiv if "laser_freq" in sources else 0.0,
        intensity_fast_pp=model.intensity_fast_pp if "laser_intensity" in sources else 0.0,
        intensity_slow_pp=model.intensity_slow_pp if "laser_intensity" in sources else 0.0,
    )
    return None if nm.is_null else nm


def simulated_fidelity(gate: str, params: TrapLaserParams, sources, model: NoiseModel, n_trajectories: int,
                       seed: int, workers: int = 1) -> float:
    """F_p of a gate from exact-probability tomography with the given noise sources switched on."""
    mode = "physical" if "off_resonant" in sources else "idealized"
    ctx = ExecutionContext(params, mode)
    if mode == "physical":
        ctx = ctx.calibrated()
    noise = _source_noise(model, sources)
    ds = simulate_tomography(gate, ctx, noise, n_trajectories, seed, workers=workers)
    return analyze(ds, gate_target(gate)).f_process


def error_budget(sources=SOURCES, n_trajectories: int = 100, params: TrapLaserParams | None = None,
                 model: NoiseModel | None = None, seed: int = 0, gate: str = "cnot",
                 workers: int = 1) -> ErrorBudget:
    """Full process tomography of the gate with each source alone and all together.

    The off-resonant contribution is the deficit of the noiseless physical
    pulses relative to idealized rotations; the others run on idealized pulses.
    """
    if n_trajectories < 50:
        raise ValueError("error budget needs at least 50 trajectories")
    unknown = set(sources) - set(SOURCES)
    if unknown:
        raise ValueError(f"unknown noise sources {sorted(unknown)}")
    params = params or TrapLaserParams.reference()
    model = model or NoiseModel.reference()
    fids = {}
    deficits = {}
    for src in sources:
        f = simulated_fidelity(gate, params, (src,), model, n_trajectories, seed, workers)
        fids[src] = f
        deficits[src] = 1.0 - f
    f_all = simulated_fidelity(gate, params, tuple(sources), model, n_trajectories, seed, workers) \
        if sources else simulated_fidelity(gate, params, (), model, n_trajectories, seed, workers)
    fids["all"] = f_all
    product = 1.0 - float(np.prod([1.0 - d for d in deficits.values()]))
    return ErrorBudget(deficits=deficits, total=1.0 - f_all, product_total=product, fidelities=fids)
