"""Exact derivative orders, pseudo-polynomials and their lift to the w-plane.

A pseudo-polynomial ``sum a_i s^{q_i}`` with rational orders ``q_i`` becomes an
ordinary polynomial in ``w = s^{1/m}`` once ``m`` is the least common multiple
of the order denominators. The degree of that polynomial (the fractional
degree) is the number of roots on the whole Riemann surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable

import numpy as np

from .errors import DomainError, InvalidInputError

#: Exact rational order. ``Fraction`` is always kept in lowest terms with a
#: positive denominator, and zero is ``0/1``.
RationalOrder = Fraction

MAX_FDEG = 128


def as_order(value) -> Fraction:
    """Convert ``value`` to an exact order.

    Strings and floats are read by their shortest decimal form, so ``2.2``
    becomes ``11/5`` rather than the binary expansion of the float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInputError(f"order must be finite, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot read order {value!r}") from exc
    raise InvalidInputError(f"unsupported order type {type(value).__name__}")


def lcm_of_orders(orders: Iterable) -> int:
    """LCM of the denominators of ``orders``; integer orders contribute 1."""
    dens = [as_order(q).denominator for q in orders]
    if not dens:
        raise InvalidInputError("lcm_of_orders needs at least one order")
    return reduce(math.lcm, dens, 1)


@dataclass(frozen=True)
class PseudoPolynomial:
    """Sum of ``coeff * s**order`` terms with exact rational orders.

    Terms are merged on equal order, zero coefficients dropped and the
    result sorted by strictly descending order. The zero polynomial has no
    terms.
    """

    terms: tuple[tuple[float, Fraction], ...] = ()

    def __post_init__(self):
        merged: dict[Fraction, float] = {}
        for coeff, order in self.terms:
            q = as_order(order)
            c = float(coeff)
            if not math.isfinite(c):
                raise InvalidInputError(f"coefficient must be finite, got {coeff!r}")
            merged[q] = merged.get(q, 0.0) + c
        canon = tuple(
            (c, q) for q, c in sorted(merged.items(), key=lambda kv: kv[0], reverse=True) if c != 0.0
        )
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, object]]) -> "PseudoPolynomial":
        return cls(tuple((c, as_order(q)) for c, q in pairs))

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    @property
    def coeffs(self) -> tuple[float, ...]:
        return tuple(c for c, _ in self.terms)

    @property
    def orders(self) -> tuple[Fraction, ...]:
        return tuple(q for _, q in self.terms)

    def __call__(self, s):
        """Evaluate on the principal branch of ``s**q``."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for c, q in self.terms:
            if q == 0:
                out = out + c
            else:
                out = out + c * np.power(s, float(q))
        return out if out.ndim else complex(out)

    def __str__(self):
        return format_pseudo_polynomial(self)


def _format_order(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def format_pseudo_polynomial(p: PseudoPolynomial, var: str = "s") -> str:
    """Canonical text form, readable back by the parser without loss."""
    if not p.terms:
        return "0"
    parts = []
    for i, (c, q) in enumerate(p.terms):
        sign = "-" if c < 0 else "+"
        mag = repr(abs(c))
        if q == 0:
            body = mag
        elif q == 1:
            body = f"{mag}*{var}"
        else:
            body = f"{mag}*{var}^{_format_order(q)}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


@dataclass(frozen=True)
class WPolynomial:
    """Ordinary polynomial in ``w = s^(1/m)``.

    ``coeffs[i]`` multiplies ``w**i``; the last coefficient is nonzero.
    """

    coeffs: tuple[float, ...]
    m: int

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or coeffs[-1] == 0.0:
            raise InvalidInputError("leading coefficient of a w-polynomial must be nonzero")
        if int(self.m) < 1:
            raise InvalidInputError(f"m must be >= 1, got {self.m}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "m", int(self.m))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, w):
        # np.polyval wants the highest degree first
        return np.polyval(self.coeffs[::-1], w)

    def nonzero_exponents(self) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if c != 0.0]


def _require_nonempty(p: PseudoPolynomial):
    if not p.terms:
        raise InvalidInputError("pseudo-polynomial is empty")


def to_w_polynomial(p: PseudoPolynomial, m: int | None = None) -> WPolynomial:
    """Lift ``p`` to the w-plane using ``w = s^(1/m)``.

    ``m`` defaults to the LCM of the order denominators. An explicit ``m``
    must be a multiple of it.
    """
    _require_nonempty(p)
    if any(q < 0 for q in p.orders):
        raise InvalidInputError("orders must be nonnegative to lift to the w-plane")
    base = lcm_of_orders(p.orders)
    if m is None:
        m = base
    elif m < 1 or m % base:
        raise InvalidInputError(f"m={m} is not a positive multiple of the order LCM {base}")
    degree = int(p.orders[0] * m)
    if degree > MAX_FDEG:
        raise DomainError(f"fractional degree {degree} exceeds the supported maximum {MAX_FDEG}")
    coeffs = [0.0] * (degree + 1)
    for c, q in p.terms:
        coeffs[int(q * m)] = c
    return WPolynomial(tuple(coeffs), m)


def fdeg(p: PseudoPolynomial) -> int:
    """Fractional degree: the largest lifted exponent ``q_i * m``."""
    _require_nonempty(p)
    m = lcm_of_orders(p.orders)
    return max(int(q * m) for q in p.orders)


def is_minimal_lift(wp: WPolynomial) -> bool:
    """True when the lift carries no redundant Riemann sheets."""
    return reduce(math.gcd, wp.nonzero_exponents(), wp.m) == 1


def is_minimal(p: PseudoPolynomial) -> bool:
    _require_nonempty(p)
    m = lcm_of_orders(p.orders)
    return reduce(math.gcd, (int(q * m) for q in p.orders), m) == 1

