"""Acceptance criteria as executable checks.

Each ``criterion_<k>()`` returns a :class:`CriterionResult` whose checks carry
the measured value, the target and the tolerance. ``run_all`` evaluates every
criterion and ``format_result`` renders one pass/fail line per criterion.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .config import preset_config
from .kinematics import Channel
from .numerics import muller, rational_mapped_mesh
from .potential import CoupledGaussian, DoubleGaussian, EnergyLaw, WoodsSaxon
from .runner import check_optical, run_config, scan_v1
from .scattering import System, second_born
from .spectrum import solve_eigenenergy
from .structure import analyze_system, missing_and_tilde

A_TARGETS = {"0s": 23.2, "0p": 13.1, "0d": 2.6, "1s": 2.1}
A_V1_GRID = np.linspace(-1.0, 0.5, 7)
C_V1_GRID = np.linspace(-1.0, 0.0, 7)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, value, target, tol: float, fmt: str = ".4g"):
        """Record ``|value - target| <= tol`` (componentwise for complex numbers)."""
        value, target = complex(value), complex(target)
        ok = abs(value.real - target.real) <= tol and abs(value.imag - target.imag) <= tol
        self.checks.append(Check(name, ok, f"{_c(value, fmt)} vs {_c(target, fmt)} (tol {tol:g})"))

    def bound(self, name: str, value: float, limit: float):
        """Record ``value <= limit``."""
        self.checks.append(Check(name, bool(value <= limit), f"{value:.3g} <= {limit:g}"))

    def flag(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(Check(name, bool(ok), detail))


def _c(z: complex, fmt: str) -> str:
    if z.imag == 0:
        return format(z.real, fmt)
    return f"{format(z.real, fmt)}{'-' if z.imag < 0 else '+'}{format(abs(z.imag), fmt)}i"


@lru_cache(maxsize=None)
def preset_run(name: str, mesh_check: bool = False):
    return run_config(preset_config(name), mesh_check=mesh_check)


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "Model A bound-state spectrum")
    run = preset_run("model-a")
    for s in run.states:
        res.add(f"B_E({s.spec.label})", s.report.binding_energy, A_TARGETS[s.spec.label], 0.1, ".2f")
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "Model A automatic normalization")
    for s in preset_run("model-a").states:
        res.add(f"X({s.spec.label})", s.report.X.sum(), 1.0, 1e-4, ".6f")
        res.bound(f"|P_LS - P_Schr|/peak ({s.spec.label})", s.schr_deviation, 1e-4)
    return res


@lru_cache(maxsize=None)
def _scan(name: str, grid: tuple):
    rows, failures = scan_v1(preset_config(name), list(grid))
    return rows, failures


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "Model A sum rule under energy dependence")
    rows, failures = _scan("model-a", tuple(A_V1_GRID))
    res.flag("all scan points solved", not failures, str(failures) if failures else "")
    for label in A_TARGETS:
        sel = sorted((r for r in rows if r.label == label), key=lambda r: r.v1)
        worst = max(abs(sum(r.X) - r.X_dVdE) for r in sel)
        res.bound(f"max|sum X - X_dV/dE| ({label})", worst, 1e-4)
        reX = np.array([sum(r.X).real for r in sel])
        res.flag(f"Re X strictly increasing in v1 ({label})", len(sel) == len(A_V1_GRID)
                 and bool(np.all(np.diff(reX) > 0)), " ".join(f"{x:.3f}" for x in reX))
    return res


def _model_b_state(theta_deg: float):
    cfg = preset_config("model-b").with_overrides(theta_deg=theta_deg)
    return run_config(cfg, oracle=False).states[0]


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "Model B resonance")
    poles = {}
    for deg in (10.0, 20.0, 30.0):
        s = _model_b_state(deg)
        poles[deg] = s.report.E_pole
        res.add(f"X(theta={deg:g})", s.report.X.sum(), 1.0, 1e-3, ".5f")
    res.add("E_pole(theta=20)", poles[20.0], 1884.0 - 0.1j, 0.2, ".2f")
    spread = max(abs(a - b) for a in poles.values() for b in poles.values())
    res.bound("E_pole spread over theta", spread, 1e-2)
    return res


def criterion_5() -> CriterionResult:
    res = CriterionResult(5, "Model C pole and compositeness table")
    cfg0 = preset_config("model-c")
    cfg0 = replace(cfg0, params={**cfg0.params, "x": 0.0}, states=[replace(cfg0.states[0], guess=1431.0)])
    s0 = run_config(cfg0, oracle=False).states[0]
    res.add("B_E(x=0)", s0.report.binding_energy, 3.5, 0.1, ".2f")
    r = preset_run("model-c").states[0].report
    res.add("E_pole(x=0.5)", r.E_pole, 1412.0 - 7.3j, 0.3, ".2f")
    res.add("B_E(x=0.5)", r.binding_energy, 22.6, 0.3, ".2f")
    res.add("Gamma(x=0.5)", r.width, 14.7, 0.5, ".2f")
    res.add("X1", r.X[0], 0.99 - 0.08j, 0.02, ".3f")
    res.add("X2", r.X[1], 0.01 + 0.08j, 0.02, ".3f")
    res.add("X1+X2", r.X.sum(), 1.0, 0.02, ".3f")
    res.add("U", r.U, 0.07, 0.02, ".3f")
    res.add("X~1", r.X_tilde[0], 0.93, 0.02, ".3f")
    res.add("X~2", r.X_tilde[1], 0.07, 0.02, ".3f")
    return res


def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "Model C energy dependence")
    rows, failures = _scan("model-c", tuple(C_V1_GRID))
    res.flag("all scan points solved", not failures, str(failures) if failures else "")
    rows = sorted(rows, key=lambda r: r.v1)
    sums = np.array([sum(r.X) for r in rows])
    res.flag("Re(X1+X2) decreases as v1 decreases", bool(np.all(np.diff(sums.real) > 0)),
             " ".join(f"{x:.3f}" for x in sums.real))
    d = np.array([sum(r.X) - r.X_dVdE for r in rows])
    res.bound("max|Re(sum X - X_dV/dE)|", float(np.max(np.abs(d.real))), 1e-4)
    res.bound("max|Im(sum X - X_dV/dE)|", float(np.max(np.abs(d.imag))), 1e-4)
    return res


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "Model D unstable constituent")
    run = preset_run("model-d")
    r = run.states[0].report
    res.add("m_phys", run.extras["m_phys"], 422.7 - 52.0j, 0.5, ".2f")
    res.add("X_d", run.extras["X_d"], 0.10 + 0.29j, 0.02, ".3f")
    res.add("AB pole", r.E_pole, 1363.8 - 32.2j, 0.5, ".2f")
    res.add("X", r.X.sum(), 0.90 - 0.21j, 0.02, ".3f")
    res.add("X + X_d", r.X.sum() + run.extras["X_d"], 1.00 + 0.08j, 0.03, ".3f")
    return res


def _t_pole(system: System, guess: complex) -> complex:
    """Zero of ``1 / T_kk(E)``, an amplitude-side pole finder independent of the determinant."""
    k = None

    def inv_t(E):
        nonlocal k
        kern = system.kernel(E)
        T = np.linalg.solve(np.eye(kern.dim) - kern.matrix, kern.V)
        if k is None:
            k = int(np.argmax(np.abs(np.diag(T))))
        return 1.0 / T[k, k]

    E, _ = muller(inv_t, guess, h=0.05, tol=1e-10)
    return complex(E)


def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "Property suite")
    # unitarity on the real axis
    for name in ("model-a", "model-c"):
        cfg = preset_config(name)
        worst = max(r.residual for r in check_optical(cfg, cfg.optical_energies))
        res.bound(f"optical residual ({name})", worst, 1e-8)
    # amplitude symmetry
    for name, E in (("model-a", 40150.0 + 0.5j), ("model-c", 1420.0 - 3.0j)):
        cfg = preset_config(name)
        system = System(cfg.build_model(v1=0.0, E0=0.0), cfg.channels, 0, cfg.build_mesh())
        T = system.solve(E).matrix
        res.bound(f"T symmetry ({name})", float(np.linalg.norm(T - T.T) / np.linalg.norm(T)), 1e-10)
    # rank-one residues and determinant roots against amplitude poles
    for name in ("model-a", "model-b", "model-c", "model-d"):
        run = preset_run(name)
        worst = max(s.report.provenance["factorization_residual"] for s in run.states)
        res.bound(f"residue rank-1 residual ({name})", worst, 1e-6)
    for name in ("model-a", "model-b", "model-c"):
        cfg = preset_config(name)
        s = preset_run(name).states[0]
        system = System(cfg.build_model(v1=0.0, E0=0.0), cfg.channels, s.spec.L, cfg.build_mesh())
        res.bound(f"det root vs T pole ({name})", abs(_t_pole(system, s.report.E_pole + 0.01) - s.report.E_pole), 1e-6)
    # weak coupling: T approaches the second Born approximation at third order
    ch = Channel(1115.7, 35 * 1115.7)
    mesh = rational_mapped_mesh(100, 300, 6000)
    ratios = []
    for v0 in (-1e-2, -1e-3):
        system = System(WoodsSaxon(EnergyLaw(v0)), [ch], 0, mesh)
        E = ch.threshold - 5.0
        T = system.solve(E).matrix
        V = system.potential(E)
        ratios.append(np.linalg.norm(T - second_born(system, E)) / np.linalg.norm(T - V))
    res.flag("second Born: |T - B2| / |T - V| scales with the coupling",
             ratios[0] < 1e-2 and 5.0 < ratios[0] / ratios[1] < 20.0,
             f"{ratios[0]:.2e}, {ratios[1]:.2e}")
    # mesh doubling of every reported observable
    for name in ("model-a", "model-b", "model-c", "model-d"):
        rows = preset_run(name, mesh_check=True).mesh_check
        bad = [f"{r.label}:{r.observable}" for r in rows if not r.ok]
        worst = max(r.delta / r.tolerance for r in rows)
        res.flag(f"mesh doubling ({name})", not bad, f"worst delta/tol {worst:.2e}" + (f"; {bad}" if bad else ""))
    # X-tilde sum rule on random inputs
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        X = rng.normal(size=n) + 1j * rng.normal(size=n)
        _, Xt, Zt, _ = missing_and_tilde(X)
        worst = max(worst, abs(Xt.sum() + Zt - 1.0))
    res.bound("sum X~ + Z~ - 1 (random inputs)", worst, 1e-12)
    return res


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8)


def format_result(r: CriterionResult, verbose: bool = False) -> str:
    head = f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.number}: {r.title}"
    failed = [c for c in r.checks if not c.passed]
    if failed:
        head += " -- " + "; ".join(f"{c.name}: {c.detail}" for c in failed)
    if verbose:
        head += "".join(f"\n    {'ok ' if c.passed else 'BAD'} {c.name}: {c.detail}" for c in r.checks)
    return head


def run_all() -> list:
    return [f() for f in CRITERIA]
