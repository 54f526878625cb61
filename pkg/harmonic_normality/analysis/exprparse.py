"""
Analytic parts h and g as sympy expressions in z.

Grammar (whitespace insignificant):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' nonneg-integer)?
    base   := number | 'i' | 'z' | func '(' expr ')' | '(' expr ')' | '-' base
    func   := exp | sin | cos
    number := digits ('.' digits?)? | '.' digits

The recursive-descent parser builds sympy expressions directly. Derivatives
come from sympy.diff; evaluation goes through numpy functions generated by
sympy.lambdify, so one expression serves a whole sample grid.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
import structlog
import sympy as sp

from ..errors import (
    ExpressionSyntaxError,
    MalformedNumberError,
    OverflowGuardError,
    SingularityError,
    UnknownIdentifierError,
)

logger = structlog.get_logger(logger=__name__)

SINGULARITY_TOL = 1e-9
OVERFLOW_GUARD = 1e300
# Divisors up to this polynomial degree get their zeros located at build time.
MAX_DIVISOR_DEGREE = 4
Z = sp.Symbol('z')
FUNCTIONS = {'exp': sp.exp, 'sin': sp.sin, 'cos': sp.cos}
_NON_FINITE = (sp.zoo, sp.nan, sp.oo, -sp.oo)


def _as_array(zs) -> np.ndarray:
    return np.asarray(zs, dtype=np.complex128)


@lru_cache(maxsize=None)
def _numpy_function(expr: sp.Expr) -> Callable:
    return sp.lambdify(Z, expr, 'numpy')


@dataclass(frozen=True)
class ComplexExpr:
    """Parsed analytic function of z with the poles located at build time."""

    expr: sp.Expr
    singularities: Tuple[complex, ...] = field(default=())

    @property
    def numpy_function(self) -> Callable:
        return _numpy_function(self.expr)

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)


def _constant(value: complex) -> sp.Expr:
    value = complex(value)
    if value.imag == 0.0:
        return sp.Float(value.real)
    return sp.Float(value.real) + sp.Float(value.imag) * sp.I


def as_polynomial(e: ComplexExpr) -> Optional[np.ndarray]:
    """Coefficients lowest degree first, or None when e is not a polynomial in z."""
    return _coefficients(e.expr)


def _coefficients(expr: sp.Expr) -> Optional[np.ndarray]:
    if not expr.is_polynomial(Z):
        return None
    coeffs = sp.Poly(expr, Z).all_coeffs()
    return np.array([complex(sp.N(c)) for c in reversed(coeffs)], dtype=np.complex128)


def _polynomial_zeros(p: Optional[np.ndarray]) -> Optional[List[complex]]:
    """Zeros of a lowest-first coefficient array of degree 1..MAX_DIVISOR_DEGREE."""
    if p is None:
        return None
    nonzero = np.flatnonzero(p)
    degree = int(nonzero[-1]) if nonzero.size else 0
    if degree == 0 or degree > MAX_DIVISOR_DEGREE:
        return [] if degree == 0 else None
    if degree == 1:
        return [complex(-p[0] / p[1])]
    return [complex(r) for r in np.roots(p[degree::-1])]


def locate_singularities(expr: sp.Expr) -> Tuple[complex, ...]:
    """Zeros of every polynomial divisor of expr, in traversal order."""
    found: List[complex] = []
    for node in sp.preorder_traversal(expr):
        if not (isinstance(node, sp.Pow) and node.exp.is_Integer and node.exp < 0
                and node.base.has(Z)):
            continue
        zeros = _polynomial_zeros(_coefficients(node.base))
        if zeros is None:
            logger.debug("divisor zeros not located", divisor=str(node.base))
        else:
            found.extend(zeros)
    return _merge((), found)


def _merge(known: Iterable[complex], extra: Iterable[complex]) -> Tuple[complex, ...]:
    unique = [complex(s) for s in known]
    for s in extra:
        s = complex(s)
        if all(abs(s - u) > 1e-14 for u in unique):
            unique.append(s)
    return tuple(unique)


def build(expr: sp.Expr, extra_singularities: Iterable[complex] = ()) -> ComplexExpr:
    """Wrap an expression, locating its divisor zeros and merging declared extras."""
    return ComplexExpr(expr, _merge(locate_singularities(expr), extra_singularities))


class _Token:
    __slots__ = ('kind', 'text', 'position')

    def __init__(self, kind: str, text: str, position: int):
        self.kind = kind
        self.text = text
        self.position = position


_NUMBER = re.compile(r'\d+(\.\d*)?|\.\d+')
_NUMBER_RUN = re.compile(r'[0-9.]+([eE][+-]?[0-9.]*)?')
_IDENT = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(source):
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch.isdigit() or ch == '.':
            run = _NUMBER_RUN.match(source, pos)
            text = run.group(0)
            if not _NUMBER.fullmatch(text):
                raise MalformedNumberError(f"malformed number {text!r}", pos)
            tokens.append(_Token('number', text, pos))
            pos = run.end()
            continue
        if ch.isalpha() or ch == '_':
            match = _IDENT.match(source, pos)
            text = match.group(0)
            if text not in ('z', 'i') + tuple(FUNCTIONS):
                raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
            tokens.append(_Token('ident', text, pos))
            pos = match.end()
            continue
        if ch in '+-*/^()':
            tokens.append(_Token(ch, ch, pos))
            pos += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(_Token('end', '', len(source)))
    return tokens


def _finite(expr: sp.Expr, position: int) -> sp.Expr:
    if expr.has(*_NON_FINITE):
        raise ExpressionSyntaxError("constant subexpression is not finite", position)
    return expr


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, kind: str) -> _Token:
        token = self.current
        if token.kind != kind:
            found = token.text or 'end of input'
            raise ExpressionSyntaxError(f"expected {kind!r}, found {found!r}", token.position)
        return self._advance()

    def parse(self) -> sp.Expr:
        node = self.expr()
        if self.current.kind != 'end':
            raise ExpressionSyntaxError(
                f"unexpected {self.current.text!r}", self.current.position)
        return node

    def expr(self) -> sp.Expr:
        node = self.term()
        while self.current.kind in ('+', '-'):
            op = self._advance()
            right = self.term()
            node = _finite(node + right if op.kind == '+' else node - right, op.position)
        return node

    def term(self) -> sp.Expr:
        node = self.factor()
        while self.current.kind in ('*', '/'):
            op = self._advance()
            right = self.factor()
            node = _finite(node * right if op.kind == '*' else node / right, op.position)
        return node

    def factor(self) -> sp.Expr:
        node = self.base()
        if self.current.kind == '^':
            caret = self._advance()
            token = self.current
            if token.kind != 'number' or not token.text.isdigit():
                raise ExpressionSyntaxError(
                    "exponent must be a non-negative integer", token.position)
            self._advance()
            node = _finite(node ** sp.Integer(int(token.text)), caret.position)
        return node

    def base(self) -> sp.Expr:
        token = self.current
        if token.kind == 'number':
            self._advance()
            if token.text.isdigit():
                return sp.Integer(int(token.text))
            return sp.Float(token.text, 17)
        if token.kind == '-':
            self._advance()
            return -self.base()
        if token.kind == '(':
            self._advance()
            node = self.expr()
            self._expect(')')
            return node
        if token.kind == 'ident':
            self._advance()
            if token.text == 'z':
                return Z
            if token.text == 'i':
                return sp.I
            self._expect('(')
            arg = self.expr()
            self._expect(')')
            return _finite(FUNCTIONS[token.text](arg), token.position)
        found = token.text or 'end of input'
        raise ExpressionSyntaxError(f"unexpected {found!r}", token.position)


def parse(source: str, extra_singularities: Iterable[complex] = ()) -> ComplexExpr:
    """Parse expression text into a ComplexExpr."""
    return build(_Parser(source).parse(), extra_singularities)


def _real_text(x: float) -> str:
    text = np.format_float_positional(x, unique=True, trim='0')
    return f"({text})" if text.startswith('-') else text


def _number_text(value: sp.Expr) -> str:
    if value.is_Integer:
        n = int(value)
        return f"({n})" if n < 0 else str(n)
    c = complex(sp.N(value, 17))
    if c.imag == 0.0:
        return _real_text(c.real)
    imag = np.format_float_positional(abs(c.imag), unique=True, trim='0')
    if c.real == 0.0:
        return f"({'-' if c.imag < 0 else ''}{imag}*i)"
    real = np.format_float_positional(c.real, unique=True, trim='0')
    return f"({real}{'-' if c.imag < 0 else '+'}{imag}*i)"


def _text(expr: sp.Expr) -> str:
    if expr == Z:
        return 'z'
    if expr.is_number:
        return _number_text(expr)
    if isinstance(expr, (sp.Add, sp.Mul)):
        numeric = [a for a in expr.args if a.is_number]
        parts = [_text(a) for a in expr.args if not a.is_number]
        if numeric:
            combined = sp.Add(*numeric) if isinstance(expr, sp.Add) else sp.Mul(*numeric)
            parts.insert(0, _number_text(combined))
        joiner = '+' if isinstance(expr, sp.Add) else '*'
        return f"({joiner.join(parts)})"
    if isinstance(expr, sp.Pow) and expr.exp.is_Integer:
        n = int(expr.exp)
        if n >= 0:
            return f"({_text(expr.base)})^{n}"
        return f"(1/({_text(expr.base)})^{-n})"
    for name, fn in FUNCTIONS.items():
        if isinstance(expr, fn):
            return f"{name}({_text(expr.args[0])})"
    # sympy rewrites sin(i*w) and cos(i*w) into hyperbolic functions
    if isinstance(expr, (sp.sinh, sp.cosh)):
        arg = _text(expr.args[0])
        sign = '-' if isinstance(expr, sp.sinh) else '+'
        return f"((exp({arg}){sign}exp((-1)*{arg}))/2)"
    raise ExpressionSyntaxError(f"no textual form for {expr}", 0)


def format_expr(e: ComplexExpr) -> str:
    """Fully parenthesised text that parses back to the same function."""
    return _text(e.expr)


def differentiate(e: ComplexExpr, order: int = 1) -> ComplexExpr:
    """Symbolic derivative of the given order; poles are those of e."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return e
    return ComplexExpr(sp.diff(e.expr, Z, order), e.singularities)


def compose(outer: ComplexExpr, inner: ComplexExpr) -> ComplexExpr:
    """outer ∘ inner with declared poles pulled back when inner is polynomial."""
    pulled_back = list(inner.singularities)
    inner_poly = _coefficients(inner.expr)
    if inner_poly is not None:
        for s in outer.singularities:
            shifted = inner_poly.copy()
            shifted[0] -= s
            pulled_back.extend(_polynomial_zeros(shifted) or [])
    return build(outer.expr.subs(Z, inner.expr), pulled_back)


def affine(a: complex, b: complex) -> ComplexExpr:
    """The map z -> a + b*z."""
    return ComplexExpr(_constant(a) + _constant(b) * Z)


def is_constant(e: ComplexExpr) -> bool:
    return Z not in e.expr.free_symbols


def singular_mask(e: ComplexExpr, zs, tol: float = SINGULARITY_TOL) -> np.ndarray:
    """True where a point lies within tol of a declared singularity."""
    zs = _as_array(zs)
    mask = np.zeros(zs.shape, dtype=bool)
    for s in e.singularities:
        mask |= np.abs(zs - s) <= tol
    return mask


def evaluate_masked(e: ComplexExpr, zs,
                    overflow_guard: float = OVERFLOW_GUARD) -> Tuple[np.ndarray, np.ndarray]:
    """Values over an array plus a mask of non-finite or guard-exceeding entries.

    No singularity check: callers filter with singular_mask first.
    """
    zs = _as_array(zs)
    with np.errstate(all='ignore'):
        # constant expressions come back as scalars
        values = np.broadcast_to(
            np.asarray(e.numpy_function(zs), dtype=np.complex128), zs.shape).copy()
        bad = ~np.isfinite(values) | (np.abs(values) > overflow_guard)
    return values, bad


def evaluate_array(e: ComplexExpr, zs, singularity_tol: float = SINGULARITY_TOL,
                   overflow_guard: float = OVERFLOW_GUARD) -> np.ndarray:
    """Strict vectorised evaluation: any singular or overflowing point raises."""
    zs = _as_array(zs)
    near = singular_mask(e, zs, singularity_tol)
    if near.any():
        point = complex(zs[near].flat[0])
        nearest = min(e.singularities, key=lambda s: abs(point - s))
        raise SingularityError(point, nearest)
    values, bad = evaluate_masked(e, zs, overflow_guard)
    if bad.any():
        raise OverflowGuardError(complex(zs[bad].flat[0]))
    return values


def evaluate(e: ComplexExpr, z: complex, singularity_tol: float = SINGULARITY_TOL,
             overflow_guard: float = OVERFLOW_GUARD) -> complex:
    """Value of e at a single point."""
    values = evaluate_array(e, np.array([z], dtype=np.complex128),
                            singularity_tol, overflow_guard)
    return complex(values[0])
