"""Stability of fractional-order LTI systems on the w-plane.

The characteristic pseudo-polynomial is lifted to ``w = s^(1/m)``, all
roots of the resulting polynomial are computed, and each root is placed in
one of the angular sectors of the w-plane:

* ``|arg w| <  pi/(2m)``: unstable (maps to the right half s-plane)
* ``|arg w| == pi/(2m)``: oscillatory (imaginary s-axis)
* ``pi/(2m) < |arg w| < pi/m``: stable
* ``|arg w| >= pi/m``: not on the principal Riemann sheet, no physical pole

Only roots on the principal sheet are mapped back to s-plane poles
``s = w^m``; their arguments satisfy ``|arg s| = m |arg w|``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, NumericError, UnsupportedFormError
from .orders import PseudoPolynomial, as_order, fdeg, to_w_polynomial
from .parser import TransferFunction
from .roots import find_roots, root_clusters

EPS_ARG = 1e-9
ZERO_ROOT_TOL = 1e-12
COINCIDE_TOL = 1e-8


class Sector(str, enum.Enum):
    UNSTABLE = "UNSTABLE"
    OSCILLATORY = "OSCILLATORY"
    STABLE = "STABLE"
    NONPHYSICAL = "NONPHYSICAL"


class Verdict(str, enum.Enum):
    STABLE = "STABLE"
    OSCILLATORY = "OSCILLATORY"
    UNSTABLE = "UNSTABLE"


@dataclass(frozen=True)
class ClassifiedRoot:
    w: complex
    abs_arg: float
    sector: Sector
    s_pole: complex | None = None


@dataclass(frozen=True)
class StabilityReport:
    m: int
    fdeg: int
    roots: tuple[ClassifiedRoot, ...]
    verdict: Verdict
    notes: tuple[str, ...] = ()

    @property
    def physical_roots(self) -> list[ClassifiedRoot]:
        return [r for r in self.roots if r.sector is not Sector.NONPHYSICAL]

    @property
    def s_poles(self) -> list[complex]:
        return [r.s_pole for r in self.roots if r.s_pole is not None]

    def to_dict(self) -> dict:
        roots = []
        for r in self.roots:
            item = {
                "w_re": r.w.real,
                "w_im": r.w.imag,
                "abs_arg": r.abs_arg,
                "sector": r.sector.value,
            }
            if r.s_pole is not None:
                item["s_re"] = r.s_pole.real
                item["s_im"] = r.s_pole.imag
            roots.append(item)
        return {
            "m": self.m,
            "fdeg": self.fdeg,
            "roots": roots,
            "verdict": self.verdict.value,
            "notes": list(self.notes),
        }


def classify_roots(roots: Sequence[complex], m: int) -> list[ClassifiedRoot]:
    """Assign every w-plane root to its sector for the lift ``w = s^(1/m)``."""
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    edge = math.pi / (2 * m)
    sheet = math.pi / m
    out = []
    for w in roots:
        w = complex(w)
        if abs(w) <= ZERO_ROOT_TOL:
            out.append(ClassifiedRoot(w, 0.0, Sector.UNSTABLE, 0j))
            continue
        phi = abs(cmath.phase(w))
        # with m = 1 the map w = s is single valued: no sheet edge to cross
        if m > 1 and phi >= sheet - EPS_ARG:
            sector = Sector.NONPHYSICAL
        elif phi < edge - EPS_ARG:
            sector = Sector.UNSTABLE
        elif abs(phi - edge) <= EPS_ARG:
            sector = Sector.OSCILLATORY
        else:
            sector = Sector.STABLE
        s_pole = None if sector is Sector.NONPHYSICAL else w**m
        out.append(ClassifiedRoot(w, phi, sector, s_pole))
    return out


def _verdict(classified: Sequence[ClassifiedRoot]) -> Verdict:
    sectors = {r.sector for r in classified}
    if Sector.UNSTABLE in sectors:
        return Verdict.UNSTABLE
    if Sector.OSCILLATORY in sectors:
        return Verdict.OSCILLATORY
    return Verdict.STABLE


def _principal_poles(p: PseudoPolynomial) -> list[complex]:
    """s-plane roots of ``p`` on the principal sheet (used for zero checks)."""
    if len(p) < 2:
        return []
    wp = to_w_polynomial(p)
    if wp.degree < 1:
        return []
    return [r.s_pole for r in classify_roots(find_roots(wp.coeffs), wp.m) if r.s_pole is not None]


def analyze_polynomial(den: PseudoPolynomial, numerator: PseudoPolynomial | None = None) -> StabilityReport:
    """Lift, solve and classify the characteristic pseudo-polynomial ``den``."""
    wp = to_w_polynomial(den)
    notes = []
    if wp.degree == 0:
        return StabilityReport(wp.m, 0, (), Verdict.STABLE, ("constant denominator: no poles",))
    roots = find_roots(wp.coeffs, name=str(den))
    classified = classify_roots(roots, wp.m)
    if len(classified) != fdeg(den):
        raise NumericError(f"found {len(classified)} roots for a polynomial of fractional degree {fdeg(den)}")

    for grp in root_clusters(roots):
        notes.append(f"root cluster of multiplicity {len(grp)} near w={complex(roots[grp[0]]):.6g}")
    if any(r.sector is Sector.UNSTABLE and abs(r.w) <= ZERO_ROOT_TOL for r in classified):
        notes.append("w=0 is a root (pole at s=0): the system cannot be stable")
    physical = [r for r in classified if r.sector is not Sector.NONPHYSICAL]
    if not physical:
        notes.append("no physical roots on the principal sheet: stable")
    if any(r.sector is Sector.OSCILLATORY for r in classified):
        notes.append("roots on the oscillation boundary |arg w| = pi/(2m) within 1e-9")
    if wp.m > 1 and any(abs(r.abs_arg - math.pi / wp.m) <= EPS_ARG for r in classified):
        notes.append("roots on the principal sheet edge |arg w| = pi/m treated as non-physical")

    if numerator is not None and len(numerator) >= 2:
        zeros = _principal_poles(numerator)
        for pole in (r.s_pole for r in physical):
            for z in zeros:
                if abs(z - pole) <= COINCIDE_TOL * max(1.0, abs(pole)):
                    notes.append(f"numerator zero coincides with pole s={pole:.6g}; no cancellation performed")
                    break

    return StabilityReport(wp.m, wp.degree, tuple(classified), _verdict(classified), tuple(notes))


def analyze(tf: TransferFunction) -> StabilityReport:
    """Stability verdict of a fractional transfer function from its denominator."""
    return analyze_polynomial(tf.denominator, tf.numerator)


# -- matrix tests ---------------------------------------------------------------


def _square(a) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    return a


def _eigvals(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation failed: {exc}") from exc


def matrix_sector_test(a, delta: float) -> bool:
    """True iff every eigenvalue of the rotated block matrix has Re < 0.

    The block matrix ``[[A cos d, -A sin d], [A sin d, A cos d]]`` has the
    eigenvalues of ``A`` rotated by ``+-d``, so the test holds exactly when
    all eigenvalues of ``A`` satisfy ``|arg(lambda)| > pi/2 + d``.
    """
    a = _square(a)
    if not 0 < delta <= math.pi / 2:
        raise InvalidInputError(f"delta must lie in (0, pi/2], got {delta}")
    c, s = math.cos(delta), math.sin(delta)
    block = np.kron(np.array([[c, -s], [s, c]]), a)
    return bool(np.all(_eigvals(block).real < 0))


@dataclass(frozen=True)
class EigTestReport:
    eigenvalues: tuple[complex, ...]
    abs_args: tuple[float, ...]
    stable: bool
    threshold: float
    notes: tuple[str, ...] = ()


def _arg_report(values, threshold: float, notes: list[str]) -> tuple[tuple[float, ...], bool, bool]:
    """(abs args, all strictly beyond threshold, any on the boundary)."""
    args = []
    stable = True
    marginal = False
    for lam in values:
        if abs(lam) <= ZERO_ROOT_TOL:
            args.append(0.0)
            stable = False
            notes.append("zero eigenvalue: argument undefined, treated as unstable")
            continue
        phi = abs(cmath.phase(lam))
        args.append(phi)
        if abs(phi - threshold) <= EPS_ARG:
            marginal = True
            stable = False
        elif phi < threshold:
            stable = False
    return tuple(args), stable, marginal


def commensurate_eig_test(a, q) -> EigTestReport:
    """Eigenvalue test ``|arg(eig(A))| > q pi / 2`` for commensurate order ``q``.

    ``q`` may also be a sequence of per-state orders. When they differ the
    test is run with the largest order and the report says it is not
    conclusive.
    """
    a = _square(a)
    notes = []
    if np.ndim(q):
        qs = [float(as_order(x)) for x in q]
        if len(qs) != a.shape[0]:
            raise InvalidInputError("order vector length does not match the matrix")
        if len(set(qs)) > 1:
            notes.append("orders are not commensurate: the eigenvalue test is not conclusive, ran with max(q)")
        qv = max(qs)
    else:
        qv = float(q)
    if not 0 < qv < 2:
        raise InvalidInputError(f"order must lie in (0, 2), got {qv}")
    eig = _eigvals(a)
    threshold = qv * math.pi / 2
    args, stable, marginal = _arg_report(eig, threshold, notes)
    if marginal:
        notes.append("OSCILLATORY: eigenvalue on the boundary |arg| = q pi/2")
    return EigTestReport(tuple(complex(e) for e in eig), args, stable, threshold, tuple(notes))


@dataclass(frozen=True)
class ModalTerm:
    """One term ``A / (s^q + lambda)^k`` of a modal expansion."""

    q: float
    lam: complex
    k: int = 1
    coeff: complex = 1.0

    def __post_init__(self):
        if not 0 < float(self.q) < 2:
            raise InvalidInputError(f"modal order must lie in (0, 2), got {self.q}")
        if int(self.k) < 1:
            raise InvalidInputError(f"pole multiplicity must be >= 1, got {self.k}")


def modal_margins(terms: Sequence[ModalTerm]) -> list[float]:
    """``pi (1 - q/2) - |arg(lambda)|`` per term; positive means stable."""
    out = []
    for t in terms:
        if abs(t.lam) <= ZERO_ROOT_TOL:
            out.append(0.0)  # pole at s = 0
        else:
            out.append(math.pi * (1 - float(t.q) / 2) - abs(cmath.phase(complex(t.lam))))
    return out


def modal_stable(terms: Sequence[ModalTerm]) -> bool:
    """BIBO stability of a sum of ``A/(s^q + lambda)^k`` terms.

    Every term needs ``|arg(lambda)| < pi (1 - q/2)``; terms within
    ``1e-9`` of the boundary are marginal and count as not stable.
    """
    return all(margin > EPS_ARG for margin in modal_margins(terms))


# -- state space ------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    q: tuple[Fraction, ...]

    def __post_init__(self):
        a = _square(self.A)
        n = a.shape[0]
        b = np.asarray(self.B, dtype=float).reshape(n, -1)
        c = np.asarray(self.C, dtype=float).reshape(-1, n)
        q = tuple(as_order(x) for x in self.q)
        if len(q) != n:
            raise InvalidInputError(f"{len(q)} orders for a state of dimension {n}")
        if any(not 0 < x < 2 for x in q):
            raise InvalidInputError("state orders must lie in (0, 2)")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.A.shape[0]


def to_state_space(den: PseudoPolynomial) -> StateSpace:
    """Companion-form realization of ``1 / den`` with per-state orders.

    With ascending orders ``0 = a_0 < a_1 < ... < a_n`` the states are
    ``x_{i+1} = D^{a_i} y`` and the order of state ``i`` is ``a_i - a_{i-1}``.
    Gaps of two or more are split with zero-coefficient intermediate orders
    so that every state order stays below 2.
    """
    if len(den) < 2:
        raise UnsupportedFormError("state-space conversion needs at least two terms")
    asc = sorted(den.terms, key=lambda t: t[1])
    if asc[0][1] != 0:
        raise UnsupportedFormError("denominator needs a constant term (order 0) for companion form")
    orders = [asc[0][1]]
    coeffs = [asc[0][0]]
    for c, q in asc[1:]:
        gap = q - orders[-1]
        if gap <= 0:
            raise InvalidInputError("orders must be strictly ascending")
        pieces = int(gap // 2) + 1 if gap >= 2 else 1
        for j in range(1, pieces):
            orders.append(orders[-1] + gap / pieces)
            coeffs.append(0.0)
        orders.append(q)
        coeffs.append(c)
    n = len(orders) - 1
    a_n = coeffs[-1]
    A = np.zeros((n, n))
    A[np.arange(n - 1), np.arange(1, n)] = 1.0
    A[-1, :] = [-c / a_n + 0.0 for c in coeffs[:-1]]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0 / a_n
    C = np.zeros((1, n))
    C[0, 0] = 1.0
    q = tuple(b - a for a, b in zip(orders, orders[1:]))
    return StateSpace(A, B, C, q)


def _numeric_rank(mat: np.ndarray) -> int:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    tol = max(mat.shape) * sv[0] * 1e-12
    return int(np.sum(sv > tol))


def controllability_matrix(ss: StateSpace) -> np.ndarray:
    blocks = [ss.B]
    for _ in range(ss.n - 1):
        blocks.append(ss.A @ blocks[-1])
    return np.hstack(blocks)


def observability_matrix(ss: StateSpace) -> np.ndarray:
    blocks = [ss.C]
    for _ in range(ss.n - 1):
        blocks.append(blocks[-1] @ ss.A)
    return np.vstack(blocks)


def controllable(ss: StateSpace) -> bool:
    return _numeric_rank(controllability_matrix(ss)) == ss.n


def observable(ss: StateSpace) -> bool:
    return _numeric_rank(observability_matrix(ss)) == ss.n


def final_value(tf: TransferFunction) -> float | str:
    """``lim_{s->0} s G(s)`` along the positive real axis.

    Only the lowest-order terms of numerator and denominator matter near
    ``s = 0``; returns the finite limit, ``0.0``, or ``"indeterminate"`` when
    ``s G(s)`` diverges.
    """
    if not tf.numerator:
        return 0.0
    b, nq = tf.numerator.terms[-1]
    a, dq = tf.denominator.terms[-1]
    exponent = 1 + nq - dq
    if exponent > 0:
        return 0.0
    if exponent == 0:
        return b / a
    return "indeterminate"
