"""Run configuration: INI parsing, validation and the shipped presets.

A configuration file has one section per concern::

    [potential]     model name and its parameters
    [kinematics]    channels as ``m, M, mode``
    [numerics]      mesh kind, size, scale, cutoff and scaling angle
    [spectrum]      states as ``label = L, E_guess``
    [unstable]      optional bare-particle dressing of channel 1
    [cli]           scan and output options

Energies and masses are in MeV, lengths in fm and angles in degrees.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .kinematics import Channel
from .numerics import MomentumMesh, rational_mapped_mesh, tangent_mapped_mesh
from .potential import (
    CoupledGaussian,
    DoubleGaussian,
    EnergyLaw,
    Interaction,
    WoodsSaxon,
    YukawaFormFactor,
)
from .unstable import BareCoupling, DressedChannel


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


# parameter name -> default; "E0" may be the string "pole"
MODEL_SCHEMA = {
    "woods-saxon": {"v0": -35.0, "v1": 0.0, "E0": "pole", "R": 3.6, "a": 0.5},
    "double-gaussian": {"v0": -50.0, "v1": 0.0, "E0": "pole", "b1": 2.5, "b2": 5.0},
    "coupled-gaussian": {"v0": -650.0, "v1": 0.0, "E0": "pole", "b": 0.5, "x": 0.5},
    "yukawa": {"beta": -2.0, "mu": 450.0, "cutoff": 1000.0},
}
N_CHANNELS = {"woods-saxon": 1, "double-gaussian": 1, "coupled-gaussian": 2, "yukawa": 1}
ENERGY_DEPENDENT = {"woods-saxon", "double-gaussian", "coupled-gaussian"}


@dataclass(frozen=True)
class StateSpec:
    label: str
    L: int
    guess: complex


@dataclass
class RunConfig:
    name: str
    model: str
    params: dict
    channels: list
    states: list
    mesh_kind: str = "rational"
    mesh_n: int = 200
    mesh_scale: float = 300.0
    mesh_qmax: float = 6000.0
    theta_deg: float = 0.0
    bare: Optional[BareCoupling] = None
    loop_n: int = 200
    loop_scale: float = 600.0
    q_independent: bool = False
    scan_param: str = "v1"
    scan_values: list = field(default_factory=list)
    optical_energies: list = field(default_factory=list)
    workers: int = 2

    @property
    def theta(self) -> float:
        return float(np.radians(self.theta_deg))

    def validate(self) -> "RunConfig":
        if self.model not in MODEL_SCHEMA:
            raise ConfigError(f"unknown model {self.model!r}; choose from {sorted(MODEL_SCHEMA)}")
        unknown = set(self.params) - set(MODEL_SCHEMA[self.model])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.model}: {sorted(unknown)}")
        if len(self.channels) != N_CHANNELS[self.model]:
            raise ConfigError(f"{self.model} needs {N_CHANNELS[self.model]} channel(s), got {len(self.channels)}")
        if self.mesh_kind not in ("rational", "tangent"):
            raise ConfigError(f"mesh kind must be 'rational' or 'tangent', got {self.mesh_kind!r}")
        if self.mesh_n < 8 or self.mesh_scale <= 0:
            raise ConfigError("mesh needs n >= 8 and a positive scale")
        if self.mesh_kind == "tangent" and self.model != "yukawa":
            raise ConfigError(f"{self.model} is a local potential and needs a finite q_max (kind = rational)")
        if self.mesh_kind == "rational" and not self.mesh_qmax > self.mesh_scale:
            raise ConfigError("mesh q_max must exceed the mesh scale")
        if not 0.0 <= self.theta_deg < 45.0:
            raise ConfigError("theta must lie in [0, 45) degrees")
        if self.model == "woods-saxon":
            limit = np.degrees(np.arctan(np.pi * self.param("a") / self.param("R")))
            if self.theta_deg >= limit:
                raise ConfigError(f"Woods-Saxon needs theta < {limit:.2f} deg (nearest pole of the profile)")
        for s in self.states:
            if not 0 <= s.L <= 12:
                raise ConfigError(f"state {s.label}: L={s.L} outside 0..12")
        if self.bare is not None:
            if self.channels[0].mode != "SR" or self.channels[0].m != self.bare.m_bare:
                raise ConfigError("dressed channel 1 must be SR with m equal to m_bare")
            if self.theta_deg == 0 and self.bare.decay_open:
                raise ConfigError("an open decay channel needs a nonzero scaling angle")
        if self.scan_param != "v1":
            raise ConfigError(f"only v1 scans are supported, got {self.scan_param!r}")
        if self.scan_values and self.model not in ENERGY_DEPENDENT:
            raise ConfigError(f"{self.model} has no v1 parameter")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        return self

    def param(self, key):
        return self.params.get(key, MODEL_SCHEMA[self.model][key])

    def with_overrides(self, theta_deg=None, mesh_n=None, mesh_scale=None) -> "RunConfig":
        cfg = self
        if theta_deg is not None:
            cfg = replace(cfg, theta_deg=float(theta_deg))
        if mesh_n is not None:
            cfg = replace(cfg, mesh_n=int(mesh_n))
        if mesh_scale is not None:
            cfg = replace(cfg, mesh_scale=float(mesh_scale))
        return cfg.validate()

    # builders

    def build_model(self, v1: Optional[float] = None, E0=None) -> Interaction:
        p = self.param
        if self.model == "yukawa":
            cutoff = p("cutoff")
            return YukawaFormFactor(p("beta"), p("mu"), None if cutoff in (0, None) else cutoff)
        v1 = p("v1") if v1 is None else v1
        if E0 is None:
            E0 = p("E0")
            if E0 == "pole":
                if v1 != 0:
                    raise ConfigError("E0 = pole needs the pole position; solve at v1 = 0 first")
                E0 = 0.0
        law = EnergyLaw(p("v0"), v1, E0)
        if self.model == "woods-saxon":
            return WoodsSaxon(law, p("R"), p("a"))
        if self.model == "double-gaussian":
            return DoubleGaussian(law, p("b1"), p("b2"))
        return CoupledGaussian(law, p("b"), p("x"))

    def build_mesh(self, theta: Optional[float] = None, factor: int = 1) -> MomentumMesh:
        theta = self.theta if theta is None else theta
        n = self.mesh_n * factor
        if self.mesh_kind == "tangent":
            return tangent_mapped_mesh(n, self.mesh_scale, theta)
        return rational_mapped_mesh(n, self.mesh_scale, self.mesh_qmax, theta)

    def build_loop_mesh(self, factor: int = 1) -> MomentumMesh:
        return tangent_mapped_mesh(self.loop_n * factor, self.loop_scale, self.theta)

    def build_channels(self, factor: int = 1) -> list:
        if self.bare is None:
            return list(self.channels)
        dressed = DressedChannel(self.channels[0], self.bare, self.build_loop_mesh(factor),
                                 q_independent=self.q_independent, label=self.channels[0].label)
        return [dressed] + list(self.channels[1:])


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex energy {text!r}") from exc


def parse_config(text: str, name: str = "config") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep parameter case (R, E0)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for sec in ("potential", "kinematics", "numerics"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing section [{sec}]")
    try:
        pot = dict(cp["potential"])
        model = pot.pop("model", None)
        if model is None:
            raise ConfigError("[potential] needs a 'model' key")
        params = {}
        for k, v in pot.items():
            params[k] = "pole" if (k == "E0" and v.strip() == "pole") else float(v)

        channels = []
        for label, spec in cp["kinematics"].items():
            parts = [s.strip() for s in spec.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"channel {label}: expected 'm, M, mode'")
            channels.append(Channel(float(parts[0]), float(parts[1]), parts[2], label=label))

        num = cp["numerics"]
        states = []
        if cp.has_section("spectrum"):
            for label, spec in cp["spectrum"].items():
                L, guess = [s.strip() for s in spec.split(",", 1)]
                states.append(StateSpec(label, int(L), _complex(guess)))

        bare = None
        q_indep = False
        loop_n, loop_scale = 200, 600.0
        if cp.has_section("unstable"):
            u = cp["unstable"]
            bare = BareCoupling(u.getfloat("alpha"), u.getfloat("lambda"), u.getfloat("m_bare"), u.getfloat("m_d"))
            q_indep = u.getboolean("q_independent", False)
            loop_n = u.getint("loop_n", 200)
            loop_scale = u.getfloat("loop_scale", 600.0)

        cli = cp["cli"] if cp.has_section("cli") else {}
        cfg = RunConfig(
            name=name,
            model=model,
            params=params,
            channels=channels,
            states=states,
            mesh_kind=num.get("kind", "rational"),
            mesh_n=num.getint("n", 200),
            mesh_scale=num.getfloat("scale", 300.0),
            mesh_qmax=num.getfloat("q_max", 6000.0),
            theta_deg=num.getfloat("theta", 0.0),
            bare=bare,
            loop_n=loop_n,
            loop_scale=loop_scale,
            q_independent=q_indep,
            scan_param=cli.get("scan_param", "v1"),
            scan_values=_floats(cli.get("scan_values", "")),
            optical_energies=_floats(cli.get("optical_energies", "")),
            workers=int(cli.get("workers", 2)),
        )
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    return cfg.validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, name=path.stem)


PRESETS = {
    "model-a": """
[potential]
model = woods-saxon
v0 = -35.0
v1 = 0.0
E0 = pole
R = 3.6
a = 0.5

[kinematics]
ch1 = 1115.7, 39049.5, NR

[numerics]
kind = rational
n = 200
scale = 300
q_max = 6000
theta = 0

[spectrum]
0s = 0, 40142.0
0p = 1, 40152.1
0d = 2, 40162.6
1s = 0, 40163.1

[cli]
scan_values = -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5
optical_energies = 40165.7, 40170.2, 40185.2, 40265.2
""",
    "model-b": """
[potential]
model = double-gaussian
v0 = -50.0
v1 = 0.0
E0 = pole
b1 = 2.5
b2 = 5.0

[kinematics]
ch1 = 938.9, 938.9, NR

[numerics]
kind = rational
n = 200
scale = 150
q_max = 1500
theta = 20

[spectrum]
res = 0, 1884.0-0.1j

[cli]
scan_values = -1.0, -0.75, -0.5, -0.25, 0.0
""",
    "model-c": """
[potential]
model = coupled-gaussian
v0 = -650.0
v1 = 0.0
E0 = pole
b = 0.5
x = 0.5

[kinematics]
ch1 = 495.7, 938.9, SR
ch2 = 138.0, 1193.1, SR

[numerics]
kind = rational
n = 200
scale = 400
q_max = 6000
theta = 20

[spectrum]
res = 0, 1412.0-7.3j

[cli]
scan_values = -1.0, -0.75, -0.5, -0.25, 0.0
optical_energies = 1380, 1420, 1440, 1500
""",
    "model-d": """
[potential]
model = yukawa
beta = -2.0
mu = 450
cutoff = 1000

[kinematics]
ch1 = 600.0, 938.9, SR

[numerics]
kind = tangent
n = 200
scale = 500
theta = 20

[unstable]
alpha = 0.15
lambda = 600
m_bare = 600
m_d = 138.0
loop_n = 200
loop_scale = 600

[spectrum]
AB = 0, 1363.8-32.2j
""",
}


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return parse_config(PRESETS[name], name=name)
