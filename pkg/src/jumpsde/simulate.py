"""Single-path integration of the jump SDE.

Between jumps the drift dz/dt = f(z,t) is integrated with a fixed-step
explicit Runge-Kutta scheme on the uniform dt grid, with the grid split
exactly at each jump time (a partial step lands on t_k). At a jump the
pre-jump state (left limit) is recorded, the jump map of the chosen
interpretation is applied, and the post-jump state is recorded at the
same time stamp. The output grid is the union of the uniform grid and
the jump times.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import expr as ex
from .errors import (EvalDomainError, MissingReferenceError,
                     NonFiniteStateError, ParseError, SimulationError,
                     ValidationError)
from .jumps import (ConstantKind, LinearKind, closed_form_jump,
                    df_series_jump, ito_jump, marcus_jump)
from .noise import CompoundPoissonPath, c_value

__all__ = [
    "SdeModel",
    "Ito",
    "DiPaolaFalsone",
    "MarcusOde",
    "MarcusClosedForm",
    "SimConfig",
    "TrajPoint",
    "JumpRecord",
    "Trajectory",
    "drift_step",
    "simulate_path",
    "reference_path",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


# --- model and config -------------------------------------------------------


@dataclass(frozen=True)
class SdeModel:
    """Scalar model dz = f(z,t) dt + g(z,t) dC with optional exact solution
    `reference` written as a function of t and the cumulative noise c."""

    f: ex.Expr
    g: ex.Expr
    z0: float
    reference: ex.Expr | None = None

    def __post_init__(self):
        for name, e in (("f", self.f), ("g", self.g)):
            if ex.uses_var(e, "c"):
                raise ValidationError(f"{name} must not reference `c`")
        if self.reference is not None and ex.uses_var(self.reference, "x"):
            raise ValidationError("reference must be a function of t and c only")

    @classmethod
    def from_strings(cls, f: str, g: str, z0: float,
                     reference: str | None = None) -> "SdeModel":
        return cls(ex.parse(f), ex.parse(g), z0,
                   ex.parse(reference) if reference else None)


@dataclass(frozen=True)
class Ito:
    label: str = field(default="ito", init=False)

    def apply(self, g: ex.Expr, z: float, t: float, r: float) -> float:
        return ito_jump(g, z, t, r)


@dataclass(frozen=True)
class DiPaolaFalsone:
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValidationError("K must be >= 1")

    @property
    def label(self) -> str:
        return f"df{self.K}"

    def apply(self, g: ex.Expr, z: float, t: float, r: float) -> float:
        return df_series_jump(g, z, t, r, self.K)


@dataclass(frozen=True)
class MarcusOde:
    scheme: str = "rk2"
    h_max: float = 0.1

    def __post_init__(self):
        if self.scheme not in ("rk2", "rk4"):
            raise ValidationError(f"unknown RK scheme {self.scheme!r}")
        if not self.h_max > 0.0:
            raise ValidationError("h_max must be positive")

    @property
    def label(self) -> str:
        return f"marcus-{self.scheme}-h{self.h_max:g}"

    def apply(self, g: ex.Expr, z: float, t: float, r: float) -> float:
        return marcus_jump(g, z, t, r, self.scheme, self.h_max)


@dataclass(frozen=True)
class MarcusClosedForm:
    kind: LinearKind | ConstantKind

    @property
    def label(self) -> str:
        return "closed-linear" if isinstance(self.kind, LinearKind) else "closed-constant"

    def apply(self, g: ex.Expr, z: float, t: float, r: float) -> float:
        return closed_form_jump(self.kind, z, r)


Interpretation = Ito | DiPaolaFalsone | MarcusOde | MarcusClosedForm


@dataclass(frozen=True)
class SimConfig:
    dt: float
    T: float
    drift_scheme: str = "rk2"  # "rk2" | "rk4"
    interpretation: Interpretation = field(default_factory=Ito)

    def __post_init__(self):
        if not 0.0 < self.dt <= self.T:
            raise ValidationError("require 0 < dt <= T")
        if self.drift_scheme not in ("rk2", "rk4"):
            raise ValidationError(f"unknown RK scheme {self.drift_scheme!r}")


# --- trajectory ---------------------------------------------------------------

GRID = "grid"
PRE_JUMP = "pre-jump"
POST_JUMP = "post-jump"


@dataclass(frozen=True)
class TrajPoint:
    t: float
    z: float
    tag: str  # grid | pre-jump | post-jump


@dataclass(frozen=True)
class JumpRecord:
    index: int
    t: float
    r: float
    pre: float
    delta: float  # jump-map output; post-jump state is pre + delta


@dataclass(frozen=True)
class Trajectory:
    points: tuple[TrajPoint, ...]
    jumps: tuple[JumpRecord, ...] = ()

    def terminal(self) -> float:
        return self.points[-1].z

    def comparison_points(self) -> list[TrajPoint]:
        """Points against which a cadlag reference is compared: the grid
        plus post-jump records (pre-jump left limits are excluded)."""
        return [p for p in self.points if p.tag != PRE_JUMP]

    def value_at(self, t: float) -> float:
        """State at time t, cadlag (post-jump value at a jump time).
        `t` must not precede the first record."""
        best = None
        for p in self.points:
            if p.t <= t:
                best = p.z
            else:
                break
        if best is None:
            raise ValidationError(f"t={t!r} precedes the trajectory start")
        return best


# --- stepping -----------------------------------------------------------------


def drift_step(f: ex.Expr, z: float, t: float, dt: float,
               scheme: str = "rk2") -> float:
    """One explicit RK step for dz/dt = f(z,t): Heun (rk2) or classic rk4."""
    if scheme not in ("rk2", "rk4"):
        raise ValidationError(f"unknown RK scheme {scheme!r}")
    if not dt > 0.0:
        raise ValidationError("dt must be positive")
    fn = ex.compile_fn(f)
    return _rk_step(fn, z, t, dt, scheme == "rk4")


def _rk_step(fn, z: float, t: float, h: float, rk4: bool) -> float:
    k1 = fn(z, t)
    if not rk4:
        k2 = fn(z + h * k1, t + h)
        return z + h * (k1 + k2) / 2.0
    half = 0.5 * h
    k2 = fn(z + half * k1, t + half)
    k3 = fn(z + half * k2, t + half)
    k4 = fn(z + h * k3, t + h)
    return z + h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0


def _boundaries(T: float, dt: float, jump_times: tuple[float, ...]) -> list[tuple[float, int]]:
    """Sorted (time, jump_index) boundaries; jump_index is -1 for plain
    grid points. The uniform grid is built as i*dt (no running sums) and
    forced to land exactly on T."""
    m = max(1, math.ceil(T / dt - 1e-9))
    grid = [i * dt for i in range(1, m + 1)]
    grid[-1] = T
    jumps = {tk: k for k, tk in enumerate(jump_times)}
    merged = sorted(set(grid) | set(jump_times))
    return [(tb, jumps.get(tb, -1)) for tb in merged]


def simulate_path(model: SdeModel, path: CompoundPoissonPath,
                  config: SimConfig) -> Trajectory:
    """Integrate one path of the model along one noise realization."""
    if config.T != path.T:
        raise ValidationError("config.T must equal path.T")
    fn = ex.compile_fn(model.f)
    rk4 = config.drift_scheme == "rk4"
    interp = config.interpretation
    g = model.g

    points: list[TrajPoint] = [TrajPoint(0.0, model.z0, GRID)]
    jumps: list[JumpRecord] = []
    t, z = 0.0, model.z0
    for tb, jidx in _boundaries(config.T, config.dt, path.jump_times):
        h = tb - t
        if h > 0.0:
            try:
                z = _rk_step(fn, z, t, h, rk4)
            except EvalDomainError as err:
                raise SimulationError(f"drift step at t={t!r}: {err}") from err
            if not math.isfinite(z):
                raise NonFiniteStateError(f"state non-finite at t={tb!r}")
        t = tb
        if jidx >= 0:
            r = path.amplitudes[jidx]
            points.append(TrajPoint(t, z, PRE_JUMP))
            try:
                delta = interp.apply(g, z, t, r)
            except Exception as err:
                raise SimulationError(
                    f"jump map failed at jump {jidx} (t={t!r}, r={r!r}): {err}"
                ) from err
            jumps.append(JumpRecord(jidx, t, r, z, delta))
            z = z + delta
            points.append(TrajPoint(t, z, POST_JUMP))
            if not math.isfinite(z):
                raise NonFiniteStateError(f"state non-finite after jump {jidx}")
        else:
            points.append(TrajPoint(t, z, GRID))
    return Trajectory(tuple(points), tuple(jumps))


def reference_path(model: SdeModel, path: CompoundPoissonPath,
                   grid: list[float]) -> list[float]:
    """Exact solution values reference(t, C(t)) on `grid`, cadlag at jumps."""
    if model.reference is None:
        raise MissingReferenceError("model carries no reference solution")
    fn = ex.compile_fn(model.reference)
    return [fn(0.0, tg, c_value(path, tg)) for tg in grid]


# --- CSV round trip -------------------------------------------------------------


def write_trajectory_csv(traj: Trajectory, dest: Path | io.TextIOBase) -> None:
    """`t,z,tag` rows at 17 significant digits for bit-exact replay."""
    buf = io.StringIO()
    buf.write("t,z,tag\n")
    for p in traj.points:
        buf.write(f"{p.t:.17g},{p.z:.17g},{p.tag}\n")
    data = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(data)
    else:
        dest.write(data)


def read_trajectory_csv(src: Path | io.TextIOBase) -> Trajectory:
    """Inverse of write_trajectory_csv (audit records are not serialized)."""
    if isinstance(src, (str, Path)):
        text = Path(src).read_text()
    else:
        text = src.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t,z,tag":
        raise ParseError("trajectory CSV header must be `t,z,tag`")
    points = []
    for ln in lines[1:]:
        ts, zs, tag = ln.split(",")
        if tag not in (GRID, PRE_JUMP, POST_JUMP):
            raise ParseError(f"unknown trajectory tag {tag!r}")
        points.append(TrajPoint(float(ts), float(zs), tag))
    return Trajectory(tuple(points))
