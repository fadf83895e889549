"""State change at a single jump under each interpretation.

Given the diffusion function g, the pre-jump state z and a jump amplitude
r, the interpretations are:

  * Itô:        g(z,t) * r
  * series:     sum_{j=1..K} g_j(z,t) r^j / j!  with  g_1 = g,
                g_j = g * d/dx g_{j-1}
  * jump ODE:   y(r) where dy/dl = g(z + y(l), t), y(0) = 0, solved by
                fixed-step Runge-Kutta in the jump parameter l
  * closed form: exact flow for affine or constant g

The series coefficients are obtained through the Taylor recurrence of the
jump-ODE solution (a_k = g_k / k!, with (k+1) a_{k+1} = coefficient k of
g(z + y(l), t) as a series in l), which needs only jet arithmetic and is
O(K^2) instead of symbolically differentiating the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import expr as ex
from .errors import EvalDomainError, NonFiniteStateError, ValidationError
from .jets import jet_eval_coeffs

__all__ = [
    "LinearKind",
    "ConstantKind",
    "SeriesTruncation",
    "OdeSolve",
    "ClosedForm",
    "ito_jump",
    "df_coefficients",
    "df_series_jump",
    "marcus_jump",
    "closed_form_jump",
]


# --- jump scheme descriptors ----------------------------------------------


@dataclass(frozen=True)
class LinearKind:
    """g(x) = a*x + b with a != 0; jump flow (z + b/a)(e^{a r} - 1)."""

    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.a == 0.0:
            raise ValidationError("LinearKind requires a != 0 (use ConstantKind)")


@dataclass(frozen=True)
class ConstantKind:
    """g(x) = b; jump flow b*r."""

    b: float


@dataclass(frozen=True)
class SeriesTruncation:
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValidationError("series truncation requires K >= 1")


@dataclass(frozen=True)
class OdeSolve:
    scheme: str  # "rk2" | "rk4"
    h_max: float

    def __post_init__(self):
        if self.scheme not in ("rk2", "rk4"):
            raise ValidationError(f"unknown RK scheme {self.scheme!r}")
        if not self.h_max > 0.0:
            raise ValidationError("h_max must be positive")


@dataclass(frozen=True)
class ClosedForm:
    kind: LinearKind | ConstantKind


# --- jump maps --------------------------------------------------------------


def ito_jump(g: ex.Expr, z: float, t: float, r: float) -> float:
    """Uncorrected jump: g evaluated at the pre-jump state times r."""
    return ex.evaluate(g, z, t) * r


def _series_a(g: ex.Expr, z: float, t: float, K: int) -> list[float]:
    """Taylor coefficients a_1..a_K of the jump-ODE solution y(l); a_k =
    g_k(z,t)/k!. Triangularity of jet arithmetic makes the fixed-point
    loop exact after m sweeps for coefficient m."""
    a = [0.0] * (K + 1)  # y(l) as a series in l, a[0] = 0
    for m in range(K):
        xc = [z] + a[1:]  # series of z + y(l), truncated at order K
        w = jet_eval_coeffs(g, xc, t)
        a[m + 1] = w[m] / (m + 1)
    return a


def df_coefficients(g: ex.Expr, z: float, t: float, K: int) -> list[float]:
    """The correction functions [g_1(z,t), ..., g_K(z,t)] of the series
    recursion g_j = g * d/dx g_{j-1}, exact up to round-off."""
    if K < 1:
        raise ValidationError("K must be >= 1")
    a = _series_a(g, z, t, K)
    return [math.factorial(k) * a[k] for k in range(1, K + 1)]


def df_series_jump(g: ex.Expr, z: float, t: float, r: float, K: int) -> float:
    """K-term truncated series jump: sum_{j=1..K} g_j(z,t) r^j / j!.

    The j=1 term is computed as g(z,t)*r, so K=1 reproduces the Itô jump
    bit for bit.
    """
    if K < 1:
        raise ValidationError("K must be >= 1")
    if r == 0.0:
        return 0.0
    a = _series_a(g, z, t, K)
    total = a[1] * r
    rj = r
    for j in range(2, K + 1):
        rj *= r
        total += a[j] * rj
    return total


def marcus_jump(g: ex.Expr, z: float, t: float, r: float,
                scheme: str = "rk4", h_max: float = 0.1) -> float:
    """Jump as the flow of dy/dl = g(z + y, t) from y(0)=0 to l=r.

    Uses n = max(1, ceil(|r|/h_max)) equal substeps of Heun's method
    ("rk2") or the classic 4-stage scheme ("rk4"); negative r integrates
    with a signed step. When g does not depend on x the flow is g(z,t)*r
    exactly and is returned without stepping.
    """
    if scheme not in ("rk2", "rk4"):
        raise ValidationError(f"unknown RK scheme {scheme!r}")
    if not h_max > 0.0:
        raise ValidationError("h_max must be positive")
    if r == 0.0:
        return 0.0
    if not ex.uses_var(g, "x"):
        return ex.evaluate(g, z, t) * r
    fn = ex.compile_fn(g)
    n = max(1, math.ceil(abs(r) / h_max))
    h = r / n
    y = 0.0
    for i in range(n):
        try:
            k1 = fn(z + y, t)
            if scheme == "rk2":
                k2 = fn(z + y + h * k1, t)
                y += h * (k1 + k2) / 2.0
            else:
                k2 = fn(z + y + 0.5 * h * k1, t)
                k3 = fn(z + y + 0.5 * h * k2, t)
                k4 = fn(z + y + h * k3, t)
                y += h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0
        except EvalDomainError as err:
            raise EvalDomainError(
                f"{err} (jump-ODE substep {i} of {n})") from None
        if not math.isfinite(y):
            raise NonFiniteStateError(
                f"jump-ODE state non-finite at substep {i} of {n}")
    return y


def closed_form_jump(kind: LinearKind | ConstantKind, z: float, r: float) -> float:
    """Exact jump flow for affine g(x) = a x + b or constant g(x) = b."""
    if isinstance(kind, ConstantKind):
        return kind.b * r
    return (z + kind.b / kind.a) * math.expm1(kind.a * r)
