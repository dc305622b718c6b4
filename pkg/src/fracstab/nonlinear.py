"""Equilibria and local stability of fractional-order polynomial systems.

For incommensurate orders ``q_i`` with common denominator ``m`` the
linearization at an equilibrium is stable when every root of

    det(diag(lambda^{m q_1}, ..., lambda^{m q_n}) - J) = 0

satisfies ``|arg lambda| > pi / (2m)``. The determinant is expanded by
cofactors over dense coefficient arrays, which is exact up to floating point
rounding for the small systems this is meant for.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidInputError, NotApplicableError, UnsupportedFormError
from .lti import EPS_ARG, ZERO_ROOT_TOL
from .orders import WPolynomial, as_order, lcm_of_orders
from .parser import PolynomialVectorField
from .roots import find_roots

MAX_DIM = 6
MAX_DEGREE = 200
DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class Equilibrium:
    x_star: tuple[float, ...]
    residual: float


def _field_scale(field: PolynomialVectorField) -> float:
    return max((abs(c) for comp in field.components for c, _ in comp), default=0.0)


def _newton_step(field: PolynomialVectorField, x: np.ndarray) -> np.ndarray:
    f = field(x)
    jac = field.jacobian(x)
    try:
        return np.linalg.solve(jac, -f)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(jac, -f, rcond=None)[0]


def _refine(field: PolynomialVectorField, x: np.ndarray, max_iter: int = 8) -> np.ndarray:
    """Plain Newton polishing until the residual stops improving."""
    best = x
    best_res = np.max(np.abs(field(x)))
    for _ in range(max_iter):
        cand = best + _newton_step(field, best)
        res = np.max(np.abs(field(cand)))
        if not res < best_res:
            if res == best_res and np.max(np.abs(cand - best)) > 0:
                best = cand
            break
        best, best_res = cand, res
    return best


def find_equilibria(
    field: PolynomialVectorField,
    seeds: Sequence[Sequence[float]],
    *,
    max_iter: int = 100,
    diagnostics: list[str] | None = None,
) -> list[Equilibrium]:
    """Solve ``f(x) = 0`` by damped Newton iteration from every seed.

    Converged points closer than ``1e-6`` are merged, keeping the first in
    seed order. Seeds that fail are reported through ``diagnostics`` rather
    than raising.
    """
    seeds = [np.asarray(s, dtype=float).reshape(-1) for s in seeds]
    if not seeds:
        raise InvalidInputError("find_equilibria needs at least one seed")
    tol = 1e-9 * (1.0 + _field_scale(field))
    found: list[Equilibrium] = []
    notes = diagnostics if diagnostics is not None else []
    for seed in seeds:
        if seed.size != field.n:
            raise InvalidInputError(f"seed {seed.tolist()} does not have {field.n} entries")
        x = seed.copy()
        res = np.max(np.abs(field(x)))
        for _ in range(max_iter):
            if res <= tol:
                break
            step = _newton_step(field, x)
            lam = 1.0
            while lam > 1e-6:
                cand = x + lam * step
                cres = np.max(np.abs(field(cand)))
                if np.isfinite(cres) and cres < res:
                    break
                lam *= 0.5
            else:
                break
            x, res = cand, cres
        if not res <= tol:
            notes.append(f"seed {seed.tolist()} did not converge (residual {res:.3g})")
            continue
        x = _refine(field, x)
        res = float(np.max(np.abs(field(x))))
        if any(np.max(np.abs(np.asarray(e.x_star) - x)) < DEDUP_TOL for e in found):
            continue
        found.append(Equilibrium(tuple(float(v) for v in x), res))
    return found


def jacobian_at(field: PolynomialVectorField, x) -> np.ndarray:
    return field.jacobian(np.asarray(x, dtype=float))


# -- characteristic determinant ----------------------------------------------------


def _pdet(mat: list[list[np.ndarray]]) -> np.ndarray:
    """Determinant of a matrix of ascending-coefficient polynomials."""
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return P.polysub(P.polymul(mat[0][0], mat[1][1]), P.polymul(mat[0][1], mat[1][0]))
    total = np.zeros(1)
    for j in range(n):
        entry = mat[0][j]
        if not np.any(entry):
            continue
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = P.polymul(entry, _pdet(minor))
        total = P.polyadd(total, term) if j % 2 == 0 else P.polysub(total, term)
    return total


@dataclass(frozen=True)
class IncommensurateCharPoly:
    gamma: Fraction
    m: int
    poly: WPolynomial

    @property
    def degree(self) -> int:
        return self.poly.degree

    def terms(self) -> list[tuple[int, float]]:
        """Nonzero ``(degree, coefficient)`` pairs, highest degree first."""
        return [(i, c) for i, c in reversed(list(enumerate(self.poly.coeffs))) if c != 0.0]


def char_poly_incommensurate(jac, q: Sequence) -> IncommensurateCharPoly:
    """Coefficients of ``det(diag(lambda^{m q_i}) - J)`` in ``lambda``.

    Coefficients that are zero up to rounding (judged against the same
    expansion carried out on ``|J|``) are set to exactly zero.
    """
    jac = np.atleast_2d(np.asarray(jac, dtype=float))
    n = jac.shape[0]
    if jac.shape != (n, n):
        raise InvalidInputError(f"expected a square matrix, got shape {jac.shape}")
    if n > MAX_DIM:
        raise UnsupportedFormError(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    orders = [as_order(v) for v in q]
    if len(orders) != n:
        raise InvalidInputError(f"{len(orders)} orders for a {n}x{n} matrix")
    if any(not 0 < v < 2 for v in orders):
        raise InvalidInputError("orders must lie in (0, 2)")
    m = lcm_of_orders(orders)
    powers = [int(v * m) for v in orders]
    if sum(powers) > MAX_DEGREE:
        raise UnsupportedFormError(f"characteristic degree {sum(powers)} exceeds {MAX_DEGREE}")

    def build(a: np.ndarray, sign: float) -> list[list[np.ndarray]]:
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if i == j:
                    e = np.zeros(powers[i] + 1)
                    e[powers[i]] += 1.0
                    e[0] += sign * a[i, j]
                else:
                    e = np.array([sign * a[i, j]])
                row.append(e)
            rows.append(row)
        return rows

    coeffs = _pdet(build(jac, -1.0))
    bound = np.abs(_pdet(build(np.abs(jac), 1.0)))
    size = max(coeffs.size, bound.size)
    coeffs = np.pad(coeffs, (0, size - coeffs.size))
    bound = np.pad(bound, (0, size - bound.size))
    coeffs[np.abs(coeffs) <= 64 * np.finfo(float).eps * bound] = 0.0
    coeffs = np.trim_zeros(coeffs, "b")
    return IncommensurateCharPoly(Fraction(1, m), m, WPolynomial(tuple(coeffs), m))


class NLVerdict(str, enum.Enum):
    STABLE = "STABLE"
    MARGINAL = "MARGINAL"
    UNSTABLE = "UNSTABLE"


@dataclass(frozen=True)
class NonlinearStabilityReport:
    gamma: float
    threshold: float
    roots: tuple[complex, ...]
    abs_args: tuple[float, ...]
    verdict: NLVerdict
    commensurate: bool
    char_poly: IncommensurateCharPoly | None = None
    notes: tuple[str, ...] = ()

    @property
    def unstable_roots(self) -> list[complex]:
        return [r for r, a in zip(self.roots, self.abs_args) if a < self.threshold - EPS_ARG]


def nonlinear_stability(jac, q: Sequence) -> NonlinearStabilityReport:
    """Local stability of an equilibrium with Jacobian ``jac`` and orders ``q``.

    Equal orders use the eigenvalues of ``jac`` against ``q pi/2``; otherwise
    the roots of the characteristic determinant are tested against
    ``pi/(2m)``. Roots on the boundary (within ``1e-9``) give MARGINAL.
    """
    jac = np.atleast_2d(np.asarray(jac, dtype=float))
    orders = [as_order(v) for v in q]
    notes = []
    cp = None
    if len(set(orders)) == 1:
        gamma = float(orders[0])
        if not 0 < gamma < 2:
            raise InvalidInputError("orders must lie in (0, 2)")
        roots = np.linalg.eigvals(jac)
        commensurate = True
    else:
        cp = char_poly_incommensurate(jac, orders)
        gamma = float(cp.gamma)
        roots = find_roots(cp.poly.coeffs, name="characteristic determinant")
        commensurate = False
    threshold = gamma * math.pi / 2
    args = []
    verdict = NLVerdict.STABLE
    for r in roots:
        if abs(r) <= ZERO_ROOT_TOL:
            args.append(0.0)
            notes.append("zero root: argument undefined, treated as unstable")
            verdict = NLVerdict.UNSTABLE
            continue
        a = abs(cmath.phase(r))
        args.append(a)
        if abs(a - threshold) <= EPS_ARG:
            if verdict is NLVerdict.STABLE:
                verdict = NLVerdict.MARGINAL
        elif a < threshold:
            verdict = NLVerdict.UNSTABLE
    return NonlinearStabilityReport(
        gamma, threshold, tuple(complex(r) for r in roots), tuple(args), verdict, commensurate, cp, tuple(notes)
    )


def min_chaos_order(jac) -> float:
    """Smallest commensurate order keeping the unstable eigenvalues unstable.

    For eigenvalues ``alpha +- j beta`` with ``alpha > 0`` this is the
    largest ``(2/pi) atan(|beta| / alpha)``.
    """
    eig = np.linalg.eigvals(np.atleast_2d(np.asarray(jac, dtype=float)))
    unstable = [e for e in eig if e.real > 0]
    if not unstable:
        raise NotApplicableError("no eigenvalue in the unstable region; chaos condition does not apply")
    return max(2 / math.pi * math.atan(abs(e.imag) / e.real) for e in unstable)
