"""Truncated-Taylor (jet) arithmetic on expression ASTs.

A jet of order K at a base point carries coefficients c_0..c_K with
c_k = (1/k!) d^k h / dx^k. All derivative information used by the series
jump correction comes from propagating these coefficients through the
AST; no symbolic differentiation is performed.

Constant terms (c_0) are computed with exactly the same scalar operations
as `expr.evaluate`, so an order-0 jet matches plain evaluation bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import expr as ex
from .errors import EvalDomainError, JetOrderError, NonSmoothPointError

__all__ = ["Jet", "eval_jet", "jet_mul", "jet_eval_coeffs"]


@dataclass(frozen=True)
class Jet:
    """Order-K truncated Taylor coefficients of a function at base_point."""

    base_point: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise JetOrderError("a jet needs at least the constant term")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise EvalDomainError("non-finite jet coefficient")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value(self) -> float:
        return self.coeffs[0]

    def derivative(self, k: int) -> float:
        """k-th derivative at the base point (k! * c_k)."""
        return math.factorial(k) * self.coeffs[k]


# --- coefficient-list kernels ---------------------------------------------
# All kernels take/return plain lists of length K+1 and are triangular:
# output coefficient k depends only on input coefficients 0..k.


def _add(a: list[float], b: list[float]) -> list[float]:
    return [ai + bi for ai, bi in zip(a, b)]


def _sub(a: list[float], b: list[float]) -> list[float]:
    return [ai - bi for ai, bi in zip(a, b)]


def _neg(a: list[float]) -> list[float]:
    return [-ai for ai in a]


def _mul(a: list[float], b: list[float]) -> list[float]:
    n = len(a)
    out = [0.0] * n
    for k in range(n):
        s = a[0] * b[k] if k else a[0] * b[0]
        for i in range(1, k + 1):
            s += a[i] * b[k - i]
        out[k] = s
    return out


def _div(a: list[float], b: list[float]) -> list[float]:
    if b[0] == 0.0:
        raise EvalDomainError("division by zero")
    n = len(a)
    out = [0.0] * n
    out[0] = a[0] / b[0]
    for k in range(1, n):
        s = a[k]
        for j in range(k):
            s -= out[j] * b[k - j]
        out[k] = s / b[0]
    return out


def _ipow(a: list[float], n: int) -> list[float]:
    # binary exponentiation, same multiply structure as expr.ipow
    if n < 0:
        if a[0] == 0.0:
            raise EvalDomainError("zero raised to a negative power")
        one = [0.0] * len(a)
        one[0] = 1.0
        return _div(one, _ipow(a, -n))
    result: list[float] | None = None
    acc = a
    while n:
        if n & 1:
            result = acc if result is None else _mul(result, acc)
        acc = _mul(acc, acc)
        n >>= 1
    if result is None:
        result = [0.0] * len(a)
        result[0] = 1.0
    return result


def _exp(u: list[float]) -> list[float]:
    n = len(u)
    try:
        v0 = math.exp(u[0])
    except OverflowError:
        raise EvalDomainError("exp overflow") from None
    out = [0.0] * n
    out[0] = v0
    for k in range(1, n):
        s = 0.0
        for j in range(1, k + 1):
            s += j * u[j] * out[k - j]
        out[k] = s / k
    return out


def _ln(u: list[float]) -> list[float]:
    if u[0] <= 0.0:
        raise EvalDomainError("ln of a non-positive value")
    n = len(u)
    out = [0.0] * n
    out[0] = math.log(u[0])
    for k in range(1, n):
        s = 0.0
        for j in range(1, k):
            s += j * out[j] * u[k - j]
        out[k] = (u[k] - s / k) / u[0]
    return out


def _sincos(u: list[float]) -> tuple[list[float], list[float]]:
    n = len(u)
    s = [0.0] * n
    c = [0.0] * n
    s[0] = math.sin(u[0])
    c[0] = math.cos(u[0])
    for k in range(1, n):
        ss = 0.0
        cc = 0.0
        for j in range(1, k + 1):
            ss += j * u[j] * c[k - j]
            cc += j * u[j] * s[k - j]
        s[k] = ss / k
        c[k] = -cc / k
    return s, c


def _sqrt(u: list[float]) -> list[float]:
    if u[0] < 0.0:
        raise EvalDomainError("sqrt of a negative value")
    n = len(u)
    if u[0] == 0.0:
        # derivative of sqrt blows up at 0; only the plain value exists
        if n == 1:
            return [0.0]
        raise EvalDomainError("sqrt not differentiable at zero")
    out = [0.0] * n
    out[0] = math.sqrt(u[0])
    for k in range(1, n):
        s = u[k]
        for j in range(1, k):
            s -= out[j] * out[k - j]
        out[k] = s / (2.0 * out[0])
    return out


def jet_eval_coeffs(e: ex.Expr, xcoeffs: list[float], t: float) -> list[float]:
    """Propagate jet coefficients through the AST.

    `xcoeffs` is the jet of the x argument (arbitrary coefficients, which
    makes this double as truncated composition: feed in the jet of any
    inner function of the expansion variable).
    """
    n = len(xcoeffs)
    if isinstance(e, ex.Num):
        out = [0.0] * n
        out[0] = e.value
        return out
    if isinstance(e, ex.Var):
        if e.name == "x":
            return list(xcoeffs)
        if e.name == "t":
            out = [0.0] * n
            out[0] = t
            return out
        raise EvalDomainError("jets are not defined for `c`", ex.pretty(e))
    if isinstance(e, ex.Neg):
        return _neg(jet_eval_coeffs(e.arg, xcoeffs, t))
    if isinstance(e, ex.BinOp):
        a = jet_eval_coeffs(e.left, xcoeffs, t)
        if e.op == "^":
            m = ex._int_exponent(e.right)
            try:
                if m is not None:
                    return _ipow(a, m)
                b = jet_eval_coeffs(e.right, xcoeffs, t)
                return _exp(_mul(b, _ln(a)))
            except EvalDomainError as err:
                raise EvalDomainError(str(err), ex.pretty(e)) from None
        b = jet_eval_coeffs(e.right, xcoeffs, t)
        if e.op == "+":
            return _add(a, b)
        if e.op == "-":
            return _sub(a, b)
        if e.op == "*":
            return _mul(a, b)
        try:
            return _div(a, b)
        except EvalDomainError as err:
            raise EvalDomainError(str(err), ex.pretty(e)) from None
    if isinstance(e, ex.Call):
        u = jet_eval_coeffs(e.arg, xcoeffs, t)
        try:
            if e.func == "exp":
                return _exp(u)
            if e.func == "ln":
                return _ln(u)
            if e.func == "sin":
                return _sincos(u)[0]
            if e.func == "cos":
                return _sincos(u)[1]
            return _sqrt(u)
        except EvalDomainError as err:
            raise EvalDomainError(str(err), ex.pretty(e)) from None
    if isinstance(e, ex.Piecewise):
        x0 = xcoeffs[0]
        if n > 1:
            for lo, hi, _ in e.pieces:
                if x0 == lo and math.isfinite(lo) or x0 == hi and math.isfinite(hi):
                    raise NonSmoothPointError(
                        f"jet requested at piecewise breakpoint x={x0!r}")
        return jet_eval_coeffs(ex.select_piece(e.pieces, x0), xcoeffs, t)
    raise TypeError(f"not an Expr node: {e!r}")


def eval_jet(e: ex.Expr, x0: float, t: float, order: int) -> Jet:
    """Order-K jet of `e` in x at (x0, t).

    Coefficient k equals (1/k!) d^k e / dx^k. Raises NonSmoothPointError
    at piecewise breakpoints and EvalDomainError on arithmetic-domain
    violations, exactly as plain evaluation would.
    """
    if order < 0:
        raise JetOrderError("jet order must be non-negative")
    seed = [0.0] * (order + 1)
    seed[0] = x0
    if order >= 1:
        seed[1] = 1.0
    coeffs = jet_eval_coeffs(e, seed, t)
    return Jet(x0, tuple(coeffs))


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product of two jets at the same point and order."""
    if a.order != b.order:
        raise JetOrderError(f"jet order mismatch: {a.order} vs {b.order}")
    if a.base_point != b.base_point:
        raise JetOrderError("jet base-point mismatch")
    return Jet(a.base_point, tuple(_mul(list(a.coeffs), list(b.coeffs))))
