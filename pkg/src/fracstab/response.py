"""Closed-form time responses of fractional linear systems.

The responses are double series of Podlubny functions
``E_k(t, y; mu, nu) = t^{mu k + nu - 1} E^{(k)}_{mu,nu}(y t^mu)``. For the
n-term equation ``a_n D^{a_n} y + ... + a_0 D^{a_0} y = u`` the outer index
``m`` runs over all compositions ``k_0 + ... + k_{n-2} = m`` and

    y(t) = 1/a_n sum_m (-1)^m/m! sum_k (m; k) prod (a_i/a_n)^{k_i}
           E_m(t, -a_{n-1}/a_n; a_n - a_{n-1}, a_n + sum (a_{n-1} - a_j) k_j + d)

where ``d`` is 0 for the impulse response and 1 for the step response.

The series converge for every ``t`` but cancel badly once ``t`` grows. Each
point is first summed in double precision; if that trips the cancellation
guard (or the inner series is out of its double-precision range) and
``mp_fallback`` is set, the same series is re-summed with mpmath at a
working precision chosen from the observed term magnitudes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .errors import DomainError, FracStabError, InvalidInputError
from .lti import ModalTerm
from .mittag_leffler import ml_series, podlubny_series
from .orders import PseudoPolynomial

MP_MAX_TERMS = 200_000
MP_MAX_DPS = 400


@dataclass(frozen=True)
class SeriesBudget:
    max_outer: int = 60
    rel_tol: float = 1e-10
    cancellation_cap: float = 1e12
    mp_fallback: bool = True

    def __post_init__(self):
        if self.max_outer < 1:
            raise InvalidInputError("max_outer must be positive")
        if not 0 < self.rel_tol < 1:
            raise InvalidInputError("rel_tol must lie in (0, 1)")
        if self.cancellation_cap < 1:
            raise InvalidInputError("cancellation_cap must be >= 1")


class Variant(str, enum.Enum):
    """Which solution the series represents; they differ only in ``nu``.

    IMPULSE and ZERO share ``nu`` offset 0: the series quoted for the
    homogeneous equation is the impulse-response kernel. STEP adds 1.
    """

    IMPULSE = "impulse"
    STEP = "step"
    ZERO = "zero"

    @property
    def nu_offset(self) -> int:
        return 1 if self is Variant.STEP else 0


@dataclass(frozen=True)
class PointValue:
    t: float
    value: float
    converged: bool
    precision: str = "double"


# -- series description -----------------------------------------------------------


@dataclass(frozen=True)
class _OuterSeries:
    """``sum_m sum_items coef * E_m(t, y; mu, nu)`` for one (y, mu) pair.

    ``items(m)`` yields ``(coef, nu)`` pairs for outer index ``m`` where the
    coefficient is given symbolically as ``prefactor * (-1)^m * prod
    ratio_j^{k_j} / k_j!`` through the exponent vector ``k``.
    """

    prefactor: float
    ratios: tuple[float, ...]
    shifts: tuple[float, ...]
    nu0: float
    y: float
    mu: float
    single: bool = False  # one ratio, no composition enumeration

    def exponent_vectors(self, m: int) -> Iterator[tuple[int, ...]]:
        if self.single:
            yield (m,)
            return
        parts = len(self.ratios)
        if parts == 0:
            if m == 0:
                yield ()
            return
        # stars and bars, lexicographic in the bar positions
        for bars in combinations(range(m + parts - 1), parts - 1):
            prev = -1
            k = []
            for b in bars:
                k.append(b - prev - 1)
                prev = b
            k.append(m + parts - 1 - prev - 1)
            yield tuple(k)

    def nu(self, k: Sequence[int]) -> float:
        return self.nu0 + sum(s * kj for s, kj in zip(self.shifts, k))


def _double_coef(series: _OuterSeries, m: int, k: Sequence[int]) -> float:
    log_mag = math.log(abs(series.prefactor)) if series.prefactor else -math.inf
    sign = math.copysign(1.0, series.prefactor) * (-1.0) ** m
    for r, kj in zip(series.ratios, k):
        if kj == 0:
            continue
        if r == 0:
            return 0.0
        log_mag += kj * math.log(abs(r)) - math.lgamma(kj + 1)
        if r < 0 and kj % 2:
            sign = -sign
    return sign * math.exp(log_mag)


class _NeedsFallback(Exception):
    pass


def _sum_double(series: _OuterSeries, t: float, budget: SeriesBudget) -> tuple[float, bool, float]:
    """(value, stopped_by_tolerance, cancellation ratio) in double precision."""
    total = math.fsum([])
    parts: list[float] = []
    max_term = 0.0
    small = 0
    prev = math.inf
    stopped = False
    for m in range(budget.max_outer + 1):
        contrib = []
        for k in series.exponent_vectors(m):
            coef = _double_coef(series, m, k)
            if coef == 0.0:
                continue
            try:
                val, res = podlubny_series(m, t, series.y, series.mu, series.nu(k))
            except (DomainError, FracStabError, OverflowError) as exc:
                raise _NeedsFallback(str(exc)) from exc
            scale = abs(coef) * t ** (series.mu * m + series.nu(k) - 1)
            max_term = max(max_term, scale * res.max_term)
            contrib.append(coef * val.real)
        c = math.fsum(contrib)
        if not math.isfinite(c):
            raise _NeedsFallback("non-finite outer term")
        parts.append(c)
        max_term = max(max_term, abs(c))
        total = math.fsum(parts)
        if abs(c) <= budget.rel_tol * abs(total) and abs(c) <= prev:
            small += 1
            if small >= 3:
                stopped = True
                break
        else:
            small = 0
        prev = abs(c)
    ratio = max_term / abs(total) if total else math.inf
    return total, stopped, ratio


def _mp_ek(k: int, t, y, mu, nu, tol, max_terms: int = MP_MAX_TERMS):
    """Podlubny function in mpmath arithmetic; returns (value, max |term|)."""
    z = y * t**mu
    total = mpmath.mpf(0)
    max_term = mpmath.mpf(0)
    small = 0
    fact = mpmath.factorial(k)  # (i+k)!/i!
    zi = mpmath.mpf(1)
    prev = mpmath.inf
    for i in range(max_terms):
        if i:
            fact = fact * (i + k) / i
            zi = zi * z
        term = fact * zi * mpmath.rgamma(mu * (i + k) + nu)
        total += term
        at = abs(term)
        if at > max_term:
            max_term = at
        if at <= tol * abs(total) and at <= prev:
            small += 1
            if small >= 3:
                pre = t ** (mu * k + nu - 1)
                return pre * total, pre * max_term
        else:
            small = 0
        prev = at
    raise DomainError("high-precision Mittag-Leffler series did not converge")


def _sum_mp(series: _OuterSeries, t: float, budget: SeriesBudget, dps: int) -> tuple[float, bool, float]:
    with mpmath.workdps(dps):
        tol = mpmath.mpf(10) ** (-dps)
        tm = mpmath.mpf(t)
        y = mpmath.mpf(series.y)
        mu = mpmath.mpf(series.mu)
        ratios = [mpmath.mpf(r) for r in series.ratios]
        parts = []
        max_term = mpmath.mpf(0)
        small = 0
        prev = mpmath.inf
        stopped = False
        total = mpmath.mpf(0)
        for m in range(budget.max_outer + 1):
            c = mpmath.mpf(0)
            for k in series.exponent_vectors(m):
                coef = mpmath.mpf(series.prefactor) * (-1) ** m
                for r, kj in zip(ratios, k):
                    if kj:
                        coef *= r**kj / mpmath.factorial(kj)
                if coef == 0:
                    continue
                nu = mpmath.mpf(series.nu0) + sum(mpmath.mpf(s) * kj for s, kj in zip(series.shifts, k))
                val, mt = _mp_ek(m, tm, y, mu, nu, tol)
                max_term = max(max_term, abs(coef) * mt)
                c += coef * val
            parts.append(c)
            total = mpmath.fsum(parts)
            max_term = max(max_term, abs(c))
            if abs(c) <= budget.rel_tol * abs(total) and abs(c) <= prev:
                small += 1
                if small >= 3:
                    stopped = True
                    break
            else:
                small = 0
            prev = abs(c)
        ratio = max_term / abs(total) if total else mpmath.inf
        return float(total), stopped, float(ratio)


def _evaluate_point(sums: Sequence[_OuterSeries], t: float, budget: SeriesBudget) -> PointValue:
    if not t > 0:
        raise DomainError(f"response times must be positive, got {t}")
    try:
        results = [_sum_double(s, t, budget) for s in sums]
        value = math.fsum(r[0] for r in results)
        ok = all(r[1] for r in results)
        ratio = max(max(r[2] for r in results), _combined_ratio(results, value))
        if ratio <= budget.cancellation_cap:
            return PointValue(t, value, ok)
        reason_budget = not ok
    except _NeedsFallback:
        reason_budget = False
    if not budget.mp_fallback or reason_budget:
        return PointValue(t, math.nan if not reason_budget else value, False)

    dps = 30
    for _ in range(6):
        results = [_sum_mp(s, t, budget, dps) for s in sums]
        value = math.fsum(r[0] for r in results)
        ok = all(r[1] for r in results)
        ratio = max(max(r[2] for r in results), _combined_ratio(results, value))
        digits_lost = math.log10(ratio) if ratio > 1 and math.isfinite(ratio) else 0.0
        if not math.isfinite(ratio):
            digits_lost = dps  # exact zero sum: raise precision once more
        needed = int(digits_lost) + 25
        if needed <= dps:
            return PointValue(t, value, ok, precision=f"mp{dps}")
        if needed > MP_MAX_DPS:
            break
        dps = needed
    return PointValue(t, value, False, precision=f"mp{dps}")


def _combined_ratio(results, value: float) -> float:
    if len(results) == 1:
        return results[0][2]
    largest = max(abs(r[0]) * r[2] for r in results)
    return largest / abs(value) if value else math.inf


def _ascending(den: PseudoPolynomial) -> tuple[list[float], list[float]]:
    if len(den) < 2:
        raise InvalidInputError("the response series need at least two denominator terms")
    if any(q < 0 for q in den.orders):
        raise InvalidInputError("orders must be nonnegative")
    asc = sorted(den.terms, key=lambda t: t[1])
    return [c for c, _ in asc], [float(q) for _, q in asc]


def _check_grid(t_grid) -> list[float]:
    ts = [float(t) for t in np.atleast_1d(np.asarray(t_grid, dtype=float))]
    if any(not t > 0 for t in ts):
        raise DomainError("response times must be positive")
    return ts


def fode_series(den: PseudoPolynomial, variant: Variant | str = Variant.IMPULSE) -> _OuterSeries:
    """Series description of the general n-term solution for ``den``."""
    variant = Variant(variant)
    a, alpha = _ascending(den)
    n = len(a) - 1
    a_n = a[-1]
    return _OuterSeries(
        prefactor=1.0 / a_n,
        ratios=tuple(a[j] / a_n for j in range(n - 1)),
        shifts=tuple(alpha[n - 1] - alpha[j] for j in range(n - 1)),
        nu0=alpha[n] + variant.nu_offset,
        y=-a[n - 1] / a_n,
        mu=alpha[n] - alpha[n - 1],
    )


def general_fode_response(
    den: PseudoPolynomial,
    t_grid,
    budget: SeriesBudget = SeriesBudget(),
    variant: Variant | str = Variant.IMPULSE,
) -> list[PointValue]:
    """Evaluate the multinomial Mittag-Leffler series solution on ``t_grid``."""
    series = fode_series(den, variant)
    return [_evaluate_point([series], t, budget) for t in _check_grid(t_grid)]


def fode3_response(
    den: PseudoPolynomial,
    t_grid,
    budget: SeriesBudget = SeriesBudget(),
    variant: Variant | str = Variant.IMPULSE,
) -> list[PointValue]:
    """Single-sum form for ``a_2 s^b + a_1 s^a + a_0`` with ``b > a > 0``.

    y(t) = 1/a_2 sum_k (-1)^k/k! (a_0/a_2)^k E_k(t, -a_1/a_2; b - a, b + a k + d)
    """
    variant = Variant(variant)
    a, alpha = _ascending(den)
    if len(a) != 3 or alpha[0] != 0 or not alpha[2] > alpha[1] > 0:
        raise InvalidInputError("fode3_response needs exactly three terms a2 s^b + a1 s^a + a0 with b > a > 0")
    series = _OuterSeries(
        prefactor=1.0 / a[2],
        ratios=(a[0] / a[2],),
        shifts=(alpha[1],),
        nu0=alpha[2] + variant.nu_offset,
        y=-a[1] / a[2],
        mu=alpha[2] - alpha[1],
        single=True,
    )
    return [_evaluate_point([series], t, budget) for t in _check_grid(t_grid)]


@dataclass(frozen=True)
class ClosedLoop:
    """``(b1 s^beta + b0) / (a2 s^alpha2 + a1 s^alpha1 + a0)``.

    The impulse response is split into two series, one per numerator term,
    each expanded around a different pair of denominator terms so that both
    converge for all ``t``.
    """

    b1: float
    beta: float
    b0: float
    a2: float
    alpha2: float
    a1: float
    alpha1: float
    a0: float

    def series(self) -> list[_OuterSeries]:
        first = _OuterSeries(
            prefactor=self.b1 / self.a2,
            ratios=(self.a1 / self.a2,),
            shifts=(-self.alpha1,),
            nu0=self.alpha2 - self.beta,
            y=-self.a0 / self.a2,
            mu=self.alpha2,
            single=True,
        )
        second = _OuterSeries(
            prefactor=self.b0 / self.a2,
            ratios=(self.a0 / self.a2,),
            shifts=(self.alpha1,),
            nu0=self.alpha2,
            y=-self.a1 / self.a2,
            mu=self.alpha2 - self.alpha1,
            single=True,
        )
        return [first, second]

    def response(self, t_grid, budget: SeriesBudget = SeriesBudget()) -> list[PointValue]:
        sums = self.series()
        return [_evaluate_point(sums, t, budget) for t in _check_grid(t_grid)]


EXAMPLE6 = ClosedLoop(b1=12.46, beta=1.0, b0=64.47, a2=39.69, alpha2=1.25, a1=12.46, alpha1=1.0, a0=65.068)


def closed_loop_response_ex6(t_grid, budget: SeriesBudget = SeriesBudget()) -> list[PointValue]:
    """Impulse response of ``(12.46 s + 64.47) / (39.69 s^1.25 + 12.46 s + 65.068)``.

    The first series has ``nu = 0.25 - k``; its inner Gamma arguments stay
    positive, and any pole of Gamma would contribute ``1/Gamma = 0``.
    """
    return EXAMPLE6.response(t_grid, budget)


def commensurate_response(
    modal: Sequence[ModalTerm],
    k0: float,
    t_grid,
    *,
    convention: str = "standard",
) -> np.ndarray:
    """``K0 sum_i A_i t^p E_{a,a}(-lambda_i t^a)`` for simple poles.

    ``convention="standard"`` uses ``p = a - 1``, the inverse Laplace
    transform of ``1/(s^a + lambda)``, which coincides with ``E_0(t, -lambda;
    a, a)``. ``convention="literal"`` uses ``p = a``.
    """
    ts = _check_grid(t_grid)
    if convention not in ("standard", "literal"):
        raise InvalidInputError(f"unknown convention {convention!r}")
    if not modal:
        return np.zeros(len(ts))
    alphas = {float(t.q) for t in modal}
    if len(alphas) != 1:
        raise InvalidInputError("all modal terms must share the same order")
    if any(t.k != 1 for t in modal):
        raise InvalidInputError("commensurate_response handles simple poles (k = 1) only")
    a = alphas.pop()
    shift = a - 1 if convention == "standard" else a
    out = np.zeros(len(ts), dtype=complex)
    for i, t in enumerate(ts):
        acc = 0j
        for term in modal:
            res = ml_series(a, a, -complex(term.lam) * t**a)
            if res.cancellation > 1e12:
                raise DomainError(f"cancellation too large at t={t}")
            acc += complex(term.coeff) * t**shift * res.value
        out[i] = k0 * acc
    if np.all(np.abs(out.imag) <= 1e-12 * np.maximum(1.0, np.abs(out.real))):
        return out.real
    return out
