"""End-to-end pipelines driven by a :class:`RunConfig`."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ConfigError, RunConfig, StateSpec
from .errors import ConvergenceError, DomainError, FactorizationError, NearPoleError
from .report import (
    ReportRow,
    emit_profile_csv,
    emit_report_csv,
    format_complex,
)
from .scattering import System, onshell_real_axis, optical_residual
from .spectrum import DensityProfile, RadialWaveFunction, radial_wavefunction_system
from .structure import CompositenessReport, analyze_system
from .unstable import decay_channel_compositeness

log = logging.getLogger(__name__)

SOLVER_ERRORS = (ConvergenceError, NearPoleError, FactorizationError, DomainError, np.linalg.LinAlgError)

# mesh-doubling tolerances per observable kind
MESH_TOL = {"energy": 1e-3, "compositeness": 1e-4}


class PipelineError(RuntimeError):
    """A solver stage failed; ``stage`` names it and ``cause`` keeps the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name: str):
    try:
        yield
    except SOLVER_ERRORS as exc:
        raise PipelineError(name, exc) from exc


@dataclass
class StateResult:
    spec: StateSpec
    v1: float
    row: ReportRow
    report: CompositenessReport
    ls_wf: RadialWaveFunction
    ls_profile: DensityProfile
    schr_wf: Optional[RadialWaveFunction] = None
    schr_profile: Optional[DensityProfile] = None

    @property
    def schr_deviation(self) -> float:
        """Largest ``|P_LS - P_Schr|`` relative to the peak of ``|P_Schr|``."""
        if self.schr_profile is None:
            return float("nan")
        ref = np.max(np.abs(self.schr_profile.P))
        return float(np.max(np.abs(self.ls_profile.P - self.schr_profile.P)) / ref)


@dataclass
class MeshCheckRow:
    label: str
    observable: str
    coarse: float
    fine: float
    tolerance: float

    @property
    def delta(self) -> float:
        return abs(self.fine - self.coarse)

    @property
    def ok(self) -> bool:
        return self.delta <= self.tolerance


@dataclass
class RunResult:
    config: RunConfig
    states: list
    extras: dict = field(default_factory=dict)
    extra_rows: list = field(default_factory=list)
    mesh_check: list = field(default_factory=list)

    @property
    def rows(self) -> list:
        return [s.row for s in self.states] + list(self.extra_rows)


class Workspace:
    """Channels, meshes and shape caches shared by every solve of one configuration."""

    def __init__(self, cfg: RunConfig, factor: int = 1):
        self.cfg = cfg
        self.factor = factor
        with stage("setup"):
            self.channels = cfg.build_channels(factor)
            self.mesh = cfg.build_mesh(factor=factor)
        self._systems: dict = {}

    def system(self, L: int, v1: float = 0.0, E0=None) -> System:
        base = self._systems.get(L)
        if base is None:
            with stage("partial-wave projection"):
                base = System(self.cfg.build_model(v1=0.0, E0=0.0) if self.cfg.model != "yukawa"
                              else self.cfg.build_model(), self.channels, L, self.mesh)
                base.shape  # noqa: B018 -- fill the cache once
            self._systems[L] = base
        if self.cfg.model == "yukawa" or (v1 == 0 and E0 is None):
            return base
        return base.with_model(self.cfg.build_model(v1=v1, E0=E0))


def solve_state(ws: Workspace, spec: StateSpec, v1: float = 0.0, E_pin=None,
                guess=None, oracle: bool = True) -> StateResult:
    system = ws.system(spec.L, v1, E_pin)
    guess = spec.guess if guess is None else guess
    try:
        report, wf, prof = analyze_system(system, guess)
    except SOLVER_ERRORS as exc:
        raise PipelineError(f"{spec.label}: pole/residue", exc) from exc
    schr_wf = schr_prof = None
    if oracle:
        with stage(f"{spec.label}: schrodinger"):
            schr_wf, schr_prof = radial_wavefunction_system(system, report.E_pole)
    row = ReportRow.from_report(spec.label, spec.L, v1, report)
    return StateResult(spec, v1, row, report, wf, prof, schr_wf, schr_prof)


def _pinned_v1(cfg: RunConfig):
    if cfg.model == "yukawa":
        return 0.0, False
    return cfg.param("v1"), cfg.param("E0") == "pole"


def _solve_all(cfg: RunConfig, ws: Workspace, oracle: bool = True) -> list:
    v1, pole_pinned = _pinned_v1(cfg)
    out = []
    for spec in cfg.states:
        if v1 != 0 and pole_pinned:
            base = solve_state(ws, spec, 0.0, oracle=False)
            out.append(solve_state(ws, spec, v1, E_pin=base.report.E_pole,
                                   guess=base.report.E_pole, oracle=oracle))
        elif v1 != 0:
            out.append(solve_state(ws, spec, v1, E_pin=cfg.param("E0"), oracle=oracle))
        else:
            out.append(solve_state(ws, spec, 0.0, oracle=oracle))
    return out


def _unstable_extras(cfg: RunConfig, ws: Workspace, states: list) -> tuple[dict, list]:
    if cfg.bare is None:
        return {}, []
    dc = ws.channels[0]
    with stage("physical mass"):
        m_phys = dc.physical_mass
    with stage("decay-channel compositeness"):
        X_d, rep = decay_channel_compositeness(cfg.bare, dc.loop_mesh, m_phys)
    extras = {"m_phys": m_phys, "X_d": X_d}
    for s in states:
        extras[f"{s.spec.label}:X+X_d"] = complex(s.report.X.sum() + X_d)
    row = ReportRow.from_report("A:decay", 0, 0.0, rep)
    return extras, [row]


def run_config(cfg: RunConfig, mesh_check: bool = False, oracle: bool = True) -> RunResult:
    if not cfg.states:
        raise ConfigError("configuration lists no states under [spectrum]")
    ws = Workspace(cfg)
    states = _solve_all(cfg, ws, oracle)
    extras, extra_rows = _unstable_extras(cfg, ws, states)
    result = RunResult(cfg, states, extras, extra_rows)
    if mesh_check:
        fine_ws = Workspace(cfg, factor=2)
        fine_states = _solve_all(cfg, fine_ws, oracle=False)
        fine_extras, _ = _unstable_extras(cfg, fine_ws, fine_states)
        result.mesh_check = compare_runs(states, fine_states, extras, fine_extras)
    return result


def compare_runs(coarse: list, fine: list, ex_c: dict, ex_f: dict) -> list:
    rows = []
    e_tol, x_tol = MESH_TOL["energy"], MESH_TOL["compositeness"]
    for c, f in zip(coarse, fine):
        lab = c.spec.label
        rows.append(MeshCheckRow(lab, "E_pole_re", c.report.E_pole.real, f.report.E_pole.real, e_tol))
        rows.append(MeshCheckRow(lab, "E_pole_im", c.report.E_pole.imag, f.report.E_pole.imag, e_tol))
        for j, (xc, xf) in enumerate(zip(c.report.X, f.report.X), start=1):
            rows.append(MeshCheckRow(lab, f"X_ch{j}_re", xc.real, xf.real, x_tol))
            rows.append(MeshCheckRow(lab, f"X_ch{j}_im", xc.imag, xf.imag, x_tol))
        rows.append(MeshCheckRow(lab, "XdVdE_re", c.report.X_dVdE.real, f.report.X_dVdE.real, x_tol))
        rows.append(MeshCheckRow(lab, "XdVdE_im", c.report.X_dVdE.imag, f.report.X_dVdE.imag, x_tol))
    for key in sorted(ex_c):
        tol = e_tol if key == "m_phys" else x_tol
        a, b = complex(ex_c[key]), complex(ex_f[key])
        rows.append(MeshCheckRow("extras", f"{key}_re", a.real, b.real, tol))
        rows.append(MeshCheckRow("extras", f"{key}_im", a.imag, b.imag, tol))
    return rows


def scan_v1(cfg: RunConfig, values, workers: Optional[int] = None) -> tuple[list, list]:
    """One report row per state and ``v1`` with ``E0`` pinned to the ``v1 = 0`` pole.

    Returns ``(rows, failures)``; a failing point is recorded and skipped.
    """
    if cfg.model == "yukawa":
        raise ConfigError("the yukawa model has no v1 parameter")
    values = [float(v) for v in values]
    ws = Workspace(cfg)
    bases = [solve_state(ws, spec, 0.0, oracle=False) for spec in cfg.states]
    tasks = [(b, v) for b in bases for v in values]

    def one(task):
        base, v = task
        if v == 0:
            return base.row, None
        try:
            res = solve_state(ws, base.spec, v, E_pin=base.report.E_pole,
                              guess=base.report.E_pole, oracle=False)
            return res.row, None
        except PipelineError as exc:
            return None, (base.spec.label, v, str(exc))

    with ThreadPoolExecutor(max_workers=workers or cfg.workers) as pool:
        results = list(pool.map(one, tasks))
    rows = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]
    return rows, failures


@dataclass
class OpticalRow:
    E: float
    residual: float
    phases_deg: tuple


def check_optical(cfg: RunConfig, energies, L: int = 0) -> list:
    if cfg.bare is not None:
        raise ConfigError("the optical check needs stable channels")
    if not energies:
        raise ConfigError("no energies given for the optical check")
    mesh = cfg.build_mesh(theta=0.0)
    model = cfg.build_model(v1=0.0, E0=0.0) if cfg.model != "yukawa" else cfg.build_model()
    rows = []
    for E in energies:
        with stage(f"on-shell T at E={E}"):
            res = onshell_real_axis(model, cfg.channels, L, float(E), mesh)
        rows.append(OpticalRow(float(E), optical_residual(res), tuple(np.degrees(res.phase_shifts()))))
    return rows


def write_run(result: RunResult, out_dir) -> list:
    out = Path(out_dir)
    written = [emit_report_csv(result.rows, out / "report.csv")]
    n_ch = len(result.config.channels)
    for s in result.states:
        written.append(emit_profile_csv(s.ls_profile, out / f"profile_{s.spec.label}_ls.csv", n_ch))
        if s.schr_profile is not None:
            written.append(emit_profile_csv(s.schr_profile, out / f"profile_{s.spec.label}_schr.csv", n_ch))
    if result.mesh_check:
        path = out / "mesh_check.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "observable", "n", "2n", "delta", "tolerance", "ok"])
            for r in result.mesh_check:
                w.writerow([r.label, r.observable, "%.17g" % r.coarse, "%.17g" % r.fine,
                            "%.3g" % r.delta, "%.3g" % r.tolerance, int(r.ok)])
        written.append(path)
    return written


def write_optical(rows: list, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = max((len(r.phases_deg) for r in rows), default=0)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["E_MeV", "optical_residual"] + [f"eigenphase{j}_deg" for j in range(1, n + 1)])
        for r in rows:
            w.writerow(["%.17g" % r.E, "%.3e" % r.residual] + ["%.17g" % p for p in r.phases_deg])
    return path


def summarize(result: RunResult) -> str:
    lines = []
    for s in result.states:
        r = s.report
        xs = ", ".join(format_complex(x) for x in r.X)
        xt = ", ".join(f"{x:.2f}" for x in r.X_tilde)
        lines.append(
            f"{s.spec.label:>6}  L={s.spec.L}  E_pole = {format_complex(r.E_pole, 1)} MeV  "
            f"B_E = {r.binding_energy:.1f}  Gamma = {r.width:.1f}  X = [{xs}]  "
            f"Z = {format_complex(r.Z)}  U = {r.U:.2f}  X~ = [{xt}]  "
            f"X_dV/dE = {format_complex(r.X_dVdE)}  |P_LS - P_Schr|/max = {s.schr_deviation:.1e}"
        )
    for k, v in result.extras.items():
        lines.append(f"{k} = {format_complex(complex(v), 2)}")
    for m in result.mesh_check:
        if not m.ok:
            lines.append(f"mesh check: {m.label} {m.observable} delta {m.delta:.2e} > {m.tolerance:.0e}")
    if result.mesh_check and all(m.ok for m in result.mesh_check):
        lines.append(f"mesh check: all {len(result.mesh_check)} observables stable under n -> 2n")
    return "\n".join(lines)
