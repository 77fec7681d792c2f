"""Problem files, controller/certificate serialization and trajectory export.

Floats are written with 17 significant digits so every double round-trips
exactly; matrices are nested row lists.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, numerics
from .controller import HomogeneousController
from .dilation import Dilation
from .ellipsoid import EllipsoidCertificate, LinearPlant
from .errors import DimensionError, PreconditionError
from .pendulum import PendulumParams, build_pendulum
from .simulate import RandomAdmissible, Sinusoid, ZeroDisturbance


# -- JSON with fixed float formatting ----------------------------------------------
def _fmt(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return json.dumps(str(v))
        s = f"{v:.17g}"
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_fmt(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _fmt(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    return _fmt(obj, indent, 0) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}: invalid JSON ({exc})") from exc


def _mat(v, name):
    if v is None:
        raise PreconditionError(f"missing matrix {name!r}")
    return numerics.as_matrix(v, name)


# -- problem file -------------------------------------------------------------------
@dataclass
class SolverSettings:
    beta_min: float = 1e-3
    beta_max: float = 1e3
    budget: int = 40
    refine_steps: int = 25
    eps: float = 1e-6

    def search(self):
        return dict(beta_range=(self.beta_min, self.beta_max), budget=self.budget,
                    refine_steps=self.refine_steps)


@dataclass
class SimulationSettings:
    T: float = 30.0
    dt: float = 1e-3
    x0: Optional[list] = None
    disturbance: dict = field(default_factory=lambda: {"kind": "zero"})
    window: Optional[tuple] = None


@dataclass
class Problem:
    plant: LinearPlant
    mu: float = 0.0
    rho: Optional[float] = None
    u_bar: Optional[float] = None
    gain: Optional[np.ndarray] = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    verify_samples: int = 10_000
    verify_seed: int = 0
    source: dict = field(default_factory=dict)


def parse_problem(data):
    """Build a :class:`Problem` from a decoded problem file."""
    if "pendulum" in data:
        A, B = build_pendulum(PendulumParams(**(data["pendulum"] or {})))
    else:
        A, B = _mat(data.get("A"), "A"), _mat(data.get("B"), "B")
    plant = LinearPlant(A, B, _mat(data.get("D"), "D"), _mat(data.get("Q"), "Q"))
    solver = SolverSettings(**data.get("solver", {}))
    sim = dict(data.get("simulation", {}))
    if sim.get("x0") is not None and len(sim["x0"]) != plant.n:
        raise DimensionError(f"x0 has {len(sim['x0'])} entries, expected {plant.n}")
    simulation = SimulationSettings(**sim)
    gain = data.get("gain")
    ver = data.get("verify", {})
    return Problem(
        plant=plant,
        mu=float(data.get("mu", 0.0)),
        rho=data.get("rho"),
        u_bar=data.get("u_bar"),
        gain=None if gain is None else _mat(gain, "gain"),
        solver=solver,
        simulation=simulation,
        verify_samples=int(ver.get("samples", 10_000)),
        verify_seed=int(ver.get("seed", 0)),
        source=data,
    )


def load_problem(path):
    return parse_problem(read_json(path))


def make_disturbance(spec, plant):
    kind = spec.get("kind", "zero")
    if kind == "sinusoid":
        amp = np.asarray(spec["amplitude"], dtype=float)
        if amp.shape != (plant.p,):
            raise DimensionError(f"amplitude has shape {amp.shape}, expected ({plant.p},)")
        return Sinusoid(amp, float(spec.get("frequency", 1.0)))
    if kind in ("random", "seeded-random-admissible"):
        return RandomAdmissible(plant.Q, spec["seed"], n_terms=spec.get("n_terms", 5),
                                max_frequency=spec.get("max_frequency", 2.0), level=spec.get("level"))
    if kind == "zero":
        return ZeroDisturbance(plant.p)
    raise PreconditionError(f"unknown disturbance kind {kind!r}")


# -- controller and certificate -----------------------------------------------------
def controller_to_dict(c):
    return {"K0": c.K0, "K": c.K, "P": c.P, "Gd": c.d.Gd, "mu": c.mu, "norm_floor": c.norm_floor}


def controller_from_dict(data):
    Gd = _mat(data.get("Gd"), "Gd")
    mu = float(data.get("mu", 0.0))
    return HomogeneousController(
        _mat(data.get("K0"), "K0"), _mat(data.get("K"), "K"), _mat(data.get("P"), "P"),
        Dilation(Gd, mu=mu), mu, float(data.get("norm_floor", 1e-9)),
    )


def certificate_to_dict(cert, plant):
    return {
        "family": cert.family, "X": cert.X, "Y": cert.Y, "beta": cert.beta,
        "margins": dict(cert.margins), "trace": cert.trace,
        "A": plant.A, "A0": cert.A0, "B": cert.B, "D": cert.D, "Q": cert.Q, "K0": cert.K0,
        "Gd": cert.Gd, "mu": cert.mu, "u_bar": cert.u_bar, "rho": cert.rho,
    }


def certificate_from_dict(data):
    cert = EllipsoidCertificate(
        X=_mat(data["X"], "X"), Y=_mat(data["Y"], "Y"), beta=float(data["beta"]),
        family=data["family"], margins=dict(data.get("margins", {})),
        A0=_mat(data["A0"], "A0"), B=_mat(data["B"], "B"), D=_mat(data["D"], "D"),
        Q=_mat(data["Q"], "Q"), K0=_mat(data["K0"], "K0"), Gd=_mat(data["Gd"], "Gd"),
        mu=float(data.get("mu", 0.0)), u_bar=data.get("u_bar"), rho=data.get("rho"),
    )
    plant = LinearPlant(_mat(data["A"], "A"), cert.B, cert.D, cert.Q)
    return cert, plant


# -- trajectory / metrics ------------------------------------------------------------
def trajectory_header(n, m, p):
    cols = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, m + 1)]
    cols += [f"w{i}" for i in range(1, p + 1)] + ["homnorm"]
    return ",".join(cols)


def write_trajectory(path, tr):
    n, m, p = tr.x.shape[1], tr.u.shape[1], tr.w.shape[1]
    hn = tr.hom_norm if tr.hom_norm is not None else np.full(len(tr.t), np.nan)
    data = np.column_stack([tr.t, tr.x, tr.u, tr.w, hn])
    with open(path, "w", newline="\n") as fh:
        fh.write(trajectory_header(n, m, p) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_trajectory(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_keyvalue(path, items):
    lines = []
    for k, v in items.items():
        lines.append(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_keyvalue(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command, inputs, seeds, tolerances, outputs):
    return {
        "tool": "homellipsoid",
        "version": __version__,
        "numpy": np.__version__,
        "command": command,
        "inputs": {str(k): file_digest(v) for k, v in inputs.items()},
        "seeds": seeds,
        "tolerances": tolerances,
        "outputs": sorted(outputs),
    }
