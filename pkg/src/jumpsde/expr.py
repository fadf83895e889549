"""Scalar expression DSL: parsing, evaluation, pretty-printing, compilation.

Grammar (infix, standard precedence, `^` binds tightest and is
right-associative):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?
    atom    := NUMBER | "x" | "t" | "c"
             | ("exp"|"ln"|"sin"|"cos"|"sqrt") "(" expr ")"
             | "(" expr ")"
             | "piecewise" "(" piece ("," piece)* ")"
    piece   := "(" bound "," bound ")" ":" expr
    bound   := ["-"] (NUMBER | "inf")

Piecewise guard intervals are half-open [lo, hi); they must be disjoint
and tile the whole real line (first lo = -inf, last hi = inf, adjacent
bounds equal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

from .errors import EvalDomainError, ParseError

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Piecewise",
    "parse",
    "evaluate",
    "pretty",
    "uses_var",
    "compile_fn",
    "ipow",
    "rpow",
]

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")
VARIABLES = ("x", "t", "c")


# --- AST -----------------------------------------------------------------


class Expr:
    """Base class for AST nodes. Instances are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str  # one of "x", "t", "c"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of "+ - * / ^"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # one of FUNCTIONS
    arg: Expr


@dataclass(frozen=True)
class Piecewise(Expr):
    # ((lo, hi, expr), ...) with half-open [lo, hi) guards tiling the reals
    pieces: tuple[tuple[float, float, Expr], ...]


def uses_var(e: Expr, name: str) -> bool:
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, Neg):
        return uses_var(e.arg, name)
    if isinstance(e, BinOp):
        return uses_var(e.left, name) or uses_var(e.right, name)
    if isinstance(e, Call):
        return uses_var(e.arg, name)
    if isinstance(e, Piecewise):
        return any(uses_var(sub, name) for _, _, sub in e.pieces)
    return False


def breakpoints(e: Expr) -> set[float]:
    """Interior piecewise boundaries anywhere in the tree."""
    out: set[float] = set()
    if isinstance(e, Piecewise):
        for lo, hi, sub in e.pieces:
            if math.isfinite(lo):
                out.add(lo)
            if math.isfinite(hi):
                out.add(hi)
            out |= breakpoints(sub)
    elif isinstance(e, Neg):
        out |= breakpoints(e.arg)
    elif isinstance(e, BinOp):
        out |= breakpoints(e.left)
        out |= breakpoints(e.right)
    elif isinstance(e, Call):
        out |= breakpoints(e.arg)
    return out


# --- Tokenizer -----------------------------------------------------------

_PUNCT = set("+-*/^(),:")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "punct", "end"
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number `{text}`", i) from None
            tokens.append(_Token("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# --- Parser --------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            return self.advance()
        got = tok.text or "end of input"
        raise ParseError(f"expected `{text}`, got `{got}`", tok.offset)

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing `{tok.text}`", tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "punct" and self.peek().text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().kind == "punct" and self.peek().text in "*/":
            op = self.advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text == "piecewise":
                return self.piecewise(tok.offset)
            raise ParseError(f"unknown identifier `{tok.text}`", tok.offset)
        if tok.kind == "punct" and tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        got = tok.text or "end of input"
        raise ParseError(f"expected expression, got `{got}`", tok.offset)

    def bound(self) -> float:
        sign = 1.0
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "-":
            self.advance()
            sign = -1.0
        tok = self.advance()
        if tok.kind == "num":
            return sign * float(tok.text)
        if tok.kind == "ident" and tok.text == "inf":
            return sign * math.inf
        got = tok.text or "end of input"
        raise ParseError(f"expected interval bound, got `{got}`", tok.offset)

    def piecewise(self, offset: int) -> Expr:
        self.expect("(")
        pieces: list[tuple[float, float, Expr]] = []
        while True:
            self.expect("(")
            lo = self.bound()
            self.expect(",")
            hi = self.bound()
            self.expect(")")
            self.expect(":")
            pieces.append((lo, hi, self.expr()))
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.advance()
                continue
            self.expect(")")
            break
        pieces.sort(key=lambda p: p[0])
        for lo, hi, _ in pieces:
            if not lo < hi:
                raise ParseError(
                    f"empty piecewise interval ({lo:g},{hi:g})", offset)
        if pieces[0][0] != -math.inf or pieces[-1][1] != math.inf:
            raise ParseError(
                "piecewise intervals must cover the reals "
                "(first bound -inf, last bound inf)", offset)
        for (_, hi, _), (lo, _, _) in zip(pieces, pieces[1:]):
            if hi != lo:
                raise ParseError(
                    f"piecewise intervals must tile: gap or overlap "
                    f"between {hi:g} and {lo:g}", offset)
        return Piecewise(tuple(pieces))


def parse(source: str) -> Expr:
    """Parse `source` into an AST, or raise ParseError with a byte offset."""
    if not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source).parse()


# --- Pretty-printing -----------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt_num(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def pretty(e: Expr, _parent_prec: int = 0, _right: bool = False) -> str:
    """Render `e` back to source text; parse(pretty(e)) reproduces the AST
    (for ASTs whose Num leaves are non-negative, as the parser emits)."""
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if e.value < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({pretty(e.arg)})"
    if isinstance(e, Neg):
        inner = pretty(e.arg, _PREC["neg"], True)
        s = f"-{inner}"
        return f"({s})" if _parent_prec > _PREC["neg"] or (_parent_prec == _PREC["neg"] and _right) else s
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        if e.op == "^":
            # right-associative; left operand must bind tighter
            left = pretty(e.left, prec + 1, False)
            right = pretty(e.right, prec, False)
        else:
            left = pretty(e.left, prec, False)
            right = pretty(e.right, prec + 1, True)
        s = f"{left}{e.op}{right}"
        needs = _parent_prec > prec or (_parent_prec == prec and _right)
        return f"({s})" if needs else s
    if isinstance(e, Piecewise):
        parts = []
        for lo, hi, sub in e.pieces:
            parts.append(f"({_fmt_num(lo)},{_fmt_num(hi)}):{pretty(sub)}")
        return "piecewise(" + ",".join(parts) + ")"
    raise TypeError(f"not an Expr node: {e!r}")


# --- Scalar evaluation ---------------------------------------------------


def ipow(base: float, n: int) -> float:
    """Integer power by binary exponentiation (exact repeated products).

    Jet exponentiation mirrors this multiplication structure so constant
    terms agree bit-for-bit with scalar evaluation.
    """
    if n < 0:
        if base == 0.0:
            raise EvalDomainError("zero raised to a negative power")
        return 1.0 / ipow(base, -n)
    result = 1.0
    acc = base
    while n:
        if n & 1:
            result = acc if result == 1.0 else result * acc
        acc = acc * acc
        n >>= 1
    return result


def rpow(base: float, exponent: float) -> float:
    """Real power a^b = exp(b ln a); requires a > 0."""
    if base <= 0.0:
        raise EvalDomainError("non-integer power of a non-positive base")
    return math.exp(exponent * math.log(base))


def _int_exponent(e: Expr) -> int | None:
    """Literal integer exponent, if the AST encodes one."""
    if isinstance(e, Num) and float(e.value).is_integer() and abs(e.value) <= 2**31:
        return int(e.value)
    if isinstance(e, Neg):
        inner = _int_exponent(e.arg)
        return None if inner is None else -inner
    return None


def select_piece(pieces: tuple[tuple[float, float, Expr], ...], x: float) -> Expr:
    for lo, hi, sub in pieces:
        if lo <= x < hi:
            return sub
    # hi == inf on the last piece, so only x == inf/nan can fall through
    raise EvalDomainError(f"no piecewise branch contains x={x!r}")


def evaluate(e: Expr, x: float = 0.0, t: float = 0.0, c: float | None = None) -> float:
    """Evaluate `e` at (x, t[, c]) with hard domain errors (no silent NaNs)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "x":
            return x
        if e.name == "t":
            return t
        if c is None:
            raise EvalDomainError("expression references `c` but no c supplied",
                                  pretty(e))
        return c
    if isinstance(e, Neg):
        return -evaluate(e.arg, x, t, c)
    if isinstance(e, BinOp):
        a = evaluate(e.left, x, t, c)
        if e.op == "^":
            n = _int_exponent(e.right)
            try:
                if n is not None:
                    return ipow(a, n)
                return rpow(a, evaluate(e.right, x, t, c))
            except EvalDomainError as err:
                raise EvalDomainError(str(err), pretty(e)) from None
        b = evaluate(e.right, x, t, c)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise EvalDomainError("division by zero", pretty(e))
        return a / b
    if isinstance(e, Call):
        u = evaluate(e.arg, x, t, c)
        if e.func == "exp":
            try:
                return math.exp(u)
            except OverflowError:
                raise EvalDomainError("exp overflow", pretty(e)) from None
        if e.func == "ln":
            if u <= 0.0:
                raise EvalDomainError("ln of a non-positive value", pretty(e))
            return math.log(u)
        if e.func == "sin":
            return math.sin(u)
        if e.func == "cos":
            return math.cos(u)
        if u < 0.0:
            raise EvalDomainError("sqrt of a negative value", pretty(e))
        return math.sqrt(u)
    if isinstance(e, Piecewise):
        return evaluate(select_piece(e.pieces, x), x, t, c)
    raise TypeError(f"not an Expr node: {e!r}")


# --- Compilation to a fast callable --------------------------------------


def _codegen(e: Expr, ctr: Iterator[int], aux: dict[str, object]) -> str:
    if isinstance(e, Num):
        return f"({e.value!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg, ctr, aux)})"
    if isinstance(e, BinOp):
        a = _codegen(e.left, ctr, aux)
        if e.op == "^":
            n = _int_exponent(e.right)
            if n is not None:
                return f"_ipow({a}, {n})"
            return f"_rpow({a}, {_codegen(e.right, ctr, aux)})"
        b = _codegen(e.right, ctr, aux)
        if e.op == "/":
            return f"_div({a}, {b})"
        return f"({a}{e.op}{b})"
    if isinstance(e, Call):
        fn = {"exp": "_exp", "ln": "_ln", "sin": "_sin",
              "cos": "_cos", "sqrt": "_sqrt"}[e.func]
        return f"{fn}({_codegen(e.arg, ctr, aux)})"
    if isinstance(e, Piecewise):
        name = f"_pw{next(ctr)}"
        aux[name] = e.pieces
        # branch selection at runtime mirrors select_piece
        parts = []
        for lo, hi, sub in e.pieces[:-1]:
            parts.append(f"{_codegen(sub, ctr, aux)} if x < {hi!r} else")
        parts.append(_codegen(e.pieces[-1][2], ctr, aux))
        return "(" + " ".join(parts) + ")"
    raise TypeError(f"not an Expr node: {e!r}")


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise EvalDomainError("division by zero")
    return a / b


def _ln(u: float) -> float:
    if u <= 0.0:
        raise EvalDomainError("ln of a non-positive value")
    return math.log(u)


def _sqrt(u: float) -> float:
    if u < 0.0:
        raise EvalDomainError("sqrt of a negative value")
    return math.sqrt(u)


def _exp(u: float) -> float:
    try:
        return math.exp(u)
    except OverflowError:
        raise EvalDomainError("exp overflow") from None


@lru_cache(maxsize=256)
def compile_fn(e: Expr) -> Callable[[float, float, float | None], float]:
    """Compile to a fast scalar callable fn(x, t, c=None).

    Same arithmetic and domain checks as `evaluate`; domain errors from
    the compiled form omit the offending-subexpression detail.
    """
    ctr = iter(range(10**6))
    aux: dict[str, object] = {}
    body = _codegen(e, ctr, aux)
    ns: dict[str, object] = {
        "_ipow": ipow, "_rpow": rpow, "_div": _div,
        "_exp": _exp, "_ln": _ln, "_sin": math.sin, "_cos": math.cos,
        "_sqrt": _sqrt,
    }
    ns.update(aux)
    code = f"def _fn(x, t, c=None):\n    return {body}\n"
    exec(code, ns)  # noqa: S102 - generated from a validated AST
    return ns["_fn"]  # type: ignore[return-value]
