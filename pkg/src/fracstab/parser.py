"""Text formats for pseudo-polynomials, transfer functions and vector fields.

Pseudo-polynomials are sums of ``[coeff][*][s[^order]]`` terms. Orders are
read exactly (``2.2`` is ``11/5``); ``s^(1/2)`` and ``s^1/2`` both mean a
half order. Transfer functions are ``(<poly>)/(<poly>)``, ``<num>/(<poly>)``
or a bare ``<poly>``, which is taken as the denominator over a unit
numerator. Vector fields are polynomials in ``x1..xn`` built from ``+ - *``,
integer powers ``^`` and parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidInputError, ParseError
from .orders import PseudoPolynomial, as_order

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_INT = re.compile(r"\d+")
_SPACE = re.compile(r"\s*")


@dataclass(frozen=True)
class TransferFunction:
    numerator: PseudoPolynomial
    denominator: PseudoPolynomial

    def __post_init__(self):
        if not self.denominator:
            raise DomainError("transfer function denominator is empty")
        for part in (self.numerator, self.denominator):
            if any(q < 0 for q in part.orders):
                raise DomainError("transfer function orders must be nonnegative")

    def __call__(self, s):
        return self.numerator(s) / self.denominator(s)


class _Scanner:
    """Character-level LL(1) scanner with whitespace skipping."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        self.pos = _SPACE.match(self.text, self.pos).end()

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def peek_after(self, ch: str) -> str:
        """Next non-space character after ``ch``, assuming ``ch`` is next."""
        self.skip()
        j = _SPACE.match(self.text, self.pos + len(ch)).end()
        return self.text[j] if j < len(self.text) else ""

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.accept(ch):
            self.fail(f"expected {ch!r}")

    def number(self) -> str | None:
        self.skip()
        mt = _NUMBER.match(self.text, self.pos)
        if mt is None:
            return None
        self.pos = mt.end()
        return mt.group(0)

    def integer(self) -> str | None:
        self.skip()
        mt = _INT.match(self.text, self.pos)
        if mt is None:
            return None
        self.pos = mt.end()
        return mt.group(0)

    def at_end(self) -> bool:
        return self.peek() == ""

    def fail(self, what: str):
        found = self.peek() or "end of input"
        raise ParseError(f"{what}, found {found!r}", self.text, self.pos)


# -- pseudo-polynomials -----------------------------------------------------


def _order(sc: _Scanner) -> Fraction:
    neg = False
    if sc.accept("("):
        neg = sc.accept("-")
        if not neg:
            sc.accept("+")
        q = _unsigned_order(sc)
        sc.expect(")")
    else:
        neg = sc.accept("-")
        q = _unsigned_order(sc)
    if neg and q != 0:
        raise DomainError(f"negative order -{q} is not supported")
    return q


def _unsigned_order(sc: _Scanner) -> Fraction:
    start = sc.pos
    tok = sc.number()
    if tok is None:
        sc.fail("expected an order")
    q = as_order(tok)
    # p/q only when both sides are plain integers, so `1/(s+1)` stays a division
    if sc.peek() == "/" and _INT.fullmatch(tok) and sc.peek_after("/").isdigit():
        sc.accept("/")
        den = sc.integer()
        if int(den) == 0:
            raise ParseError("zero denominator in order", sc.text, start)
        q = Fraction(int(tok), int(den))
    return q


def _poly_term(sc: _Scanner, var: str) -> tuple[float, Fraction]:
    coeff = 1.0
    tok = sc.number()
    if tok is not None:
        coeff = float(tok)
        if sc.accept("*"):
            if sc.peek() != var:
                sc.fail(f"expected {var!r} after '*'")
        elif sc.peek() != var:
            return coeff, Fraction(0)
    if not sc.accept(var):
        sc.fail(f"expected a number or {var!r}")
    order = Fraction(1)
    if sc.accept("^"):
        order = _order(sc)
    return coeff, order


def _pseudo_poly(sc: _Scanner, var: str = "s") -> PseudoPolynomial:
    terms = []
    sign = 1.0
    if sc.accept("-"):
        sign = -1.0
    else:
        sc.accept("+")
    while True:
        c, q = _poly_term(sc, var)
        terms.append((sign * c, q))
        if sc.accept("+"):
            sign = 1.0
        elif sc.accept("-"):
            sign = -1.0
        else:
            break
    return PseudoPolynomial(tuple(terms))


def parse_pseudo_polynomial(text: str, var: str = "s") -> PseudoPolynomial:
    """Parse ``text`` such as ``"0.8*s^2.2 + 0.5*s^0.9 + 1"``."""
    sc = _Scanner(text)
    if sc.at_end():
        sc.fail("expected a polynomial")
    p = _pseudo_poly(sc, var)
    if not sc.at_end():
        sc.fail("expected '+', '-' or end of input")
    return p


def _group(sc: _Scanner) -> PseudoPolynomial:
    if sc.accept("("):
        p = _pseudo_poly(sc)
        sc.expect(")")
        return p
    return _pseudo_poly(sc)


def parse_transfer_function(text: str) -> TransferFunction:
    """Parse ``(num)/(den)``, ``num/(den)`` or a bare denominator ``den``."""
    sc = _Scanner(text)
    if sc.at_end():
        sc.fail("expected a transfer function")
    first = _group(sc)
    if sc.accept("/"):
        den = _group(sc)
        num = first
    else:
        num, den = PseudoPolynomial(((1.0, Fraction(0)),)), first
    if not sc.at_end():
        sc.fail("expected '/' or end of input")
    if not den:
        raise DomainError("transfer function denominator is identically zero")
    return TransferFunction(num, den)


# -- polynomial vector fields -------------------------------------------------

Monomials = dict  # exponent tuple -> coefficient


def _padd(a: Monomials, b: Monomials, sign: float = 1.0) -> Monomials:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + sign * c
    return {e: c for e, c in out.items() if c != 0.0}


def _pmul(a: Monomials, b: Monomials) -> Monomials:
    out: Monomials = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return {e: c for e, c in out.items() if c != 0.0}


class _FieldParser:
    def __init__(self, text: str, n: int):
        self.sc = _Scanner(text)
        self.n = n
        self.zero = (0,) * n

    def const(self, c: float) -> Monomials:
        return {self.zero: c} if c != 0.0 else {}

    def expr(self) -> Monomials:
        sc = self.sc
        if sc.accept("-"):
            acc = _padd({}, self.term(), -1.0)
        else:
            sc.accept("+")
            acc = self.term()
        while True:
            if sc.accept("+"):
                acc = _padd(acc, self.term())
            elif sc.accept("-"):
                acc = _padd(acc, self.term(), -1.0)
            else:
                return acc

    def term(self) -> Monomials:
        acc = self.power()
        while True:
            if self.sc.accept("*"):
                acc = _pmul(acc, self.power())
            elif self.sc.peek() in ("x", "("):
                # implicit product such as `2x1` or `3(x1+x2)`
                acc = _pmul(acc, self.power())
            else:
                return acc

    def power(self) -> Monomials:
        base = self.atom()
        if self.sc.accept("^"):
            start = self.sc.pos
            tok = self.sc.integer()
            if tok is None:
                raise ParseError("expected a nonnegative integer power", self.sc.text, start)
            out = self.const(1.0)
            for _ in range(int(tok)):
                out = _pmul(out, base)
            return out
        return base

    def atom(self) -> Monomials:
        sc = self.sc
        if sc.accept("("):
            inner = self.expr()
            sc.expect(")")
            return inner
        if sc.accept("-"):
            return _padd({}, self.power(), -1.0)
        if sc.peek() == "x":
            start = sc.pos
            sc.pos += 1
            tok = sc.integer()
            if tok is None:
                raise ParseError("expected a variable index after 'x'", sc.text, start)
            idx = int(tok)
            if not 1 <= idx <= self.n:
                raise ParseError(f"variable x{idx} outside x1..x{self.n}", sc.text, start)
            e = [0] * self.n
            e[idx - 1] = 1
            return {tuple(e): 1.0}
        tok = sc.number()
        if tok is None:
            sc.fail("expected a number, variable or '('")
        return self.const(float(tok))

    def parse(self) -> Monomials:
        if self.sc.at_end():
            self.sc.fail("expected a polynomial")
        out = self.expr()
        if not self.sc.at_end():
            self.sc.fail("expected an operator or end of input")
        return out


@dataclass(frozen=True)
class PolynomialVectorField:
    """Autonomous system ``D^{q_i} x_i = f_i(x)`` with polynomial ``f_i``.

    ``components[i]`` is a tuple of ``(coeff, exponents)`` pairs where
    ``exponents`` has one nonnegative integer per state variable.
    """

    orders: tuple[Fraction, ...]
    components: tuple[tuple[tuple[float, tuple[int, ...]], ...], ...]

    def __post_init__(self):
        n = len(self.components)
        if n == 0:
            raise InvalidInputError("vector field needs at least one component")
        if len(self.orders) != n:
            raise InvalidInputError(f"{len(self.orders)} orders given for {n} components")
        orders = tuple(as_order(q) for q in self.orders)
        for q in orders:
            if not 0 < q < 2:
                raise DomainError(f"order {q} outside (0, 2)")
        comps = []
        for comp in self.components:
            terms = []
            for c, e in comp:
                e = tuple(int(k) for k in e)
                if len(e) != n or any(k < 0 for k in e):
                    raise InvalidInputError(f"bad exponent vector {e} for dimension {n}")
                terms.append((float(c), e))
            comps.append(tuple(sorted(terms, key=lambda t: t[1], reverse=True)))
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "components", tuple(comps))
        # Dense arrays for fast evaluation: one block per component.
        coeffs = [np.array([c for c, _ in comp], dtype=float) for comp in self.components]
        exps = [np.array([e for _, e in comp], dtype=int).reshape(-1, n) for comp in self.components]
        object.__setattr__(self, "_coeffs", coeffs)
        object.__setattr__(self, "_exps", exps)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def is_commensurate(self) -> bool:
        return len(set(self.orders)) == 1

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty(self.n)
        for i, (c, e) in enumerate(zip(self._coeffs, self._exps)):
            out[i] = np.dot(c, np.prod(x**e, axis=1)) if c.size else 0.0
        return out

    def jacobian(self, x) -> np.ndarray:
        """Exact partial derivatives of the polynomial components at ``x``."""
        x = np.asarray(x, dtype=float)
        n = self.n
        jac = np.zeros((n, n))
        for i, (c, e) in enumerate(zip(self._coeffs, self._exps)):
            if not c.size:
                continue
            for j in range(n):
                k = e[:, j]
                mask = k > 0
                if not mask.any():
                    continue
                ed = e[mask].copy()
                ed[:, j] -= 1
                jac[i, j] = np.dot(c[mask] * k[mask], np.prod(x**ed, axis=1))
        return jac


def _parse_orders(order_list: str) -> tuple[Fraction, ...]:
    items = [s for s in order_list.replace(";", ",").split(",")]
    if not items or any(not s.strip() for s in items):
        raise ParseError("empty entry in order list", order_list, 0)
    return tuple(as_order(s) for s in items)


def parse_vector_field(order_list: str, component_list: Sequence[str]) -> PolynomialVectorField:
    """Parse comma-separated orders and one polynomial string per state."""
    orders = _parse_orders(order_list)
    n = len(component_list)
    if len(orders) != n:
        raise InvalidInputError(f"{len(orders)} orders given for {n} components")
    comps = []
    for text in component_list:
        poly = _FieldParser(text, n).parse()
        comps.append(tuple((c, e) for e, c in poly.items()))
    return PolynomialVectorField(orders, tuple(comps))
