"""Report rows and CSV serialization.

Complex numbers are split into ``_re``/``_im`` columns and floats are
written with ``%.17g`` so that parsing an emitted file restores every value
bit for bit.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .spectrum import DensityProfile


@dataclass
class ReportRow:
    label: str
    L: int
    theta_deg: float
    v1: float
    E_pole: complex
    B_E: float
    Gamma: float
    X: tuple
    Z: complex
    X_tilde: tuple
    Z_tilde: float
    U: float
    X_dVdE: complex

    @property
    def n_channels(self) -> int:
        return len(self.X)

    @classmethod
    def from_report(cls, label: str, L: int, v1: float, rep) -> "ReportRow":
        return cls(label, L, float(np.degrees(rep.theta)), float(v1), complex(rep.E_pole),
                   rep.binding_energy, rep.width, tuple(complex(x) for x in rep.X), complex(rep.Z),
                   tuple(float(x) for x in rep.X_tilde), rep.Z_tilde, rep.U, complex(rep.X_dVdE))


def report_columns(n_channels: int) -> list:
    cols = ["label", "L", "theta_deg", "v1", "E_pole_re", "E_pole_im", "B_E", "Gamma"]
    for j in range(1, n_channels + 1):
        cols += [f"X_ch{j}_re", f"X_ch{j}_im"]
    cols += ["Z_re", "Z_im"]
    cols += [f"Xtilde_ch{j}" for j in range(1, n_channels + 1)]
    cols += ["Ztilde", "U", "XdVdE_re", "XdVdE_im"]
    return cols


def _fmt(x: float) -> str:
    return "%.17g" % x


def _row_values(row: ReportRow, n_channels: int) -> list:
    vals = [row.label, str(row.L), _fmt(row.theta_deg), _fmt(row.v1),
            _fmt(row.E_pole.real), _fmt(row.E_pole.imag), _fmt(row.B_E), _fmt(row.Gamma)]
    for j in range(n_channels):
        if j < row.n_channels:
            vals += [_fmt(row.X[j].real), _fmt(row.X[j].imag)]
        else:
            vals += ["", ""]
    vals += [_fmt(row.Z.real), _fmt(row.Z.imag)]
    vals += [_fmt(row.X_tilde[j]) if j < row.n_channels else "" for j in range(n_channels)]
    vals += [_fmt(row.Z_tilde), _fmt(row.U), _fmt(row.X_dVdE.real), _fmt(row.X_dVdE.imag)]
    return vals


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_report_csv(rows: Sequence[ReportRow], path) -> Path:
    n = max((r.n_channels for r in rows), default=1)
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(report_columns(n))
        for r in rows:
            w.writerow(_row_values(r, n))
    return Path(path)


def parse_report_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        n = sum(1 for c in reader.fieldnames if c.startswith("Xtilde_ch"))
        rows = []
        for rec in reader:
            X = tuple(complex(float(rec[f"X_ch{j}_re"]), float(rec[f"X_ch{j}_im"]))
                      for j in range(1, n + 1) if rec[f"X_ch{j}_re"] != "")
            Xt = tuple(float(rec[f"Xtilde_ch{j}"]) for j in range(1, n + 1) if rec[f"Xtilde_ch{j}"] != "")
            rows.append(ReportRow(
                rec["label"], int(rec["L"]), float(rec["theta_deg"]), float(rec["v1"]),
                complex(float(rec["E_pole_re"]), float(rec["E_pole_im"])),
                float(rec["B_E"]), float(rec["Gamma"]), X,
                complex(float(rec["Z_re"]), float(rec["Z_im"])), Xt,
                float(rec["Ztilde"]), float(rec["U"]),
                complex(float(rec["XdVdE_re"]), float(rec["XdVdE_im"])),
            ))
    return rows


def profile_columns(n_channels: int) -> list:
    cols = ["q_MeV"]
    for j in range(1, n_channels + 1):
        cols += [f"reP_ch{j}", f"imP_ch{j}"]
    return cols


def emit_profile_csv(profile: DensityProfile, path, n_channels: int | None = None) -> Path:
    """Write ``q, Re P_j, Im P_j`` per mesh node; an empty profile gives a header-only file."""
    P = np.atleast_2d(profile.P) if profile is not None else np.zeros((n_channels or 1, 0))
    n_ch = P.shape[0] if n_channels is None else n_channels
    q = profile.q if profile is not None else np.zeros(0)
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(profile_columns(n_ch))
        for i in range(q.size):
            vals = [_fmt(q[i])]
            for j in range(n_ch):
                vals += [_fmt(P[j, i].real), _fmt(P[j, i].imag)]
            w.writerow(vals)
    return Path(path)


def parse_profile_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(q, P)`` with ``P`` of shape ``(n_channels, n)``."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [list(map(float, r)) for r in reader]
    n_ch = (len(header) - 1) // 2
    if not data:
        return np.zeros(0), np.zeros((n_ch, 0), dtype=complex)
    a = np.array(data)
    P = np.array([a[:, 1 + 2 * j] + 1j * a[:, 2 + 2 * j] for j in range(n_ch)])
    return a[:, 0], P


def format_complex(z: complex, digits: int = 2) -> str:
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real:.{digits}f} {sign} {abs(z.imag):.{digits}f}i"
