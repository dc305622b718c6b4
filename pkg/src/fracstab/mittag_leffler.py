"""Two-parameter Mittag-Leffler function by truncated power series.

``E_{mu,nu}(z) = sum_i z^i / Gamma(mu*i + nu)`` is summed term by term until
three consecutive terms fall below ``1e-16`` of the running sum. Magnitudes
are accumulated in log space, so neither ``z^i`` nor the factorials of the
derivative series overflow. Only the series is implemented; for
``|z| > Z_MAX`` the evaluation is refused instead of returning digits that
cancellation has destroyed.

When the largest term exceeds the result by more than ``REFINE_RATIO`` the
same partial sum is recomputed in mpmath with enough extra digits to absorb
the cancellation, so moderately cancelling sums keep full double accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath

from .errors import DomainError, EvaluationError, InvalidInputError, LossOfPrecisionError

Z_MAX = 50.0
MAX_TERMS = 10_000
MAX_DERIV = 256
STOP_REL = 1e-16
STOP_RUN = 3
CANCELLATION_CAP = 1e12
REFINE_RATIO = 1e4


@dataclass(frozen=True)
class MLParams:
    mu: float
    nu: float

    def __post_init__(self):
        if not (self.mu > 0 and self.nu > 0):
            raise InvalidInputError(f"Mittag-Leffler parameters need mu > 0 and nu > 0, got {self.mu}, {self.nu}")


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series plus the diagnostics used by the guards."""

    value: complex
    n_terms: int
    max_term: float
    gamma_poles: int = 0

    @property
    def cancellation(self) -> float:
        # relative to |value|, floored at 1 so that sums near zero are judged
        # by their absolute rounding error
        return self.max_term / max(abs(self.value), 1.0)


def _log_rgamma(x: float) -> tuple[float, float]:
    """``(log|1/Gamma(x)|, sign)``; sign 0 at the poles of Gamma."""
    if x <= 0 and x == math.floor(x):
        return -math.inf, 0.0
    lg = math.lgamma(x)
    if x > 0:
        return -lg, 1.0
    # Gamma(x) for negative non-integer x has sign (-1)^ceil(-x)
    return -lg, (-1.0) ** math.ceil(-x)


def _kahan_add(total: complex, comp: complex, term: complex) -> tuple[complex, complex]:
    # Neumaier variant, applied to the real and imaginary parts jointly
    re, ce = _neumaier(total.real, comp.real, term.real)
    im, ci = _neumaier(total.imag, comp.imag, term.imag)
    return complex(re, im), complex(ce, ci)


def _neumaier(s: float, c: float, x: float) -> tuple[float, float]:
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


def ml_series(mu: float, nu: float, z: complex, k: int = 0, *, z_max: float = Z_MAX) -> SeriesResult:
    """k-th derivative series of ``E_{mu,nu}`` at ``z`` with diagnostics.

    ``nu`` may be any real here; terms whose Gamma argument is a pole
    contribute exactly zero (``1/Gamma`` is entire) and are counted in
    ``gamma_poles``. Raises on non-convergence but never on cancellation;
    callers decide what cancellation means for them.
    """
    if mu <= 0:
        raise InvalidInputError(f"mu must be positive, got {mu}")
    if k < 0 or k > MAX_DERIV:
        raise InvalidInputError(f"derivative order must lie in 0..{MAX_DERIV}, got {k}")
    z = complex(z)
    az = abs(z)
    if az > z_max:
        raise DomainError(f"|z| = {az:.6g} exceeds the series limit {z_max}")

    log_az = math.log(az) if az > 0 else -math.inf
    unit = z / az if az > 0 else 1.0 + 0j
    phase = 1.0 + 0j
    total = 0j
    comp = 0j
    max_term = 0.0
    small_run = 0
    poles = 0
    log_fact = 0.0  # log((i+k)!/i!)
    if k:
        log_fact = math.lgamma(k + 1)

    for i in range(MAX_TERMS):
        if i > 0:
            phase *= unit
            if k:
                log_fact += math.log((i + k) / i)
        arg = mu * (i + k) + nu
        lrg, sign = _log_rgamma(arg)
        if sign == 0.0:
            poles += 1
            mag = 0.0
            term = 0j
        else:
            if i == 0:
                log_mag = log_fact + lrg
            elif az == 0:
                log_mag = -math.inf
            else:
                log_mag = i * log_az + log_fact + lrg
            if log_mag > 709.0:
                raise EvaluationError(f"Mittag-Leffler series terms exceed double range (mu={mu}, nu={nu}, z={z})")
            mag = math.exp(log_mag) if log_mag > -745 else 0.0
            term = sign * mag * phase
        total, comp = _kahan_add(total, comp, term)
        max_term = max(max_term, mag)

        running = abs(total + comp)
        # only stop once the terms are past their peak
        nxt = mu * (i + 1 + k) + nu
        decaying = az == 0 or (
            log_az + math.log((i + 1 + k) / (i + 1)) + (math.lgamma(arg) - math.lgamma(nxt) if arg > 0 and nxt > 0 else 0.0) < 0
        )
        if mag <= STOP_REL * running and decaying:
            small_run += 1
            if small_run >= STOP_RUN:
                res = SeriesResult(total + comp, i + 1, max_term, poles)
                if REFINE_RATIO < res.cancellation <= CANCELLATION_CAP:
                    res = replace(res, value=_refined_sum(mu, nu, z, k, res))
                return res
        else:
            small_run = 0
    raise EvaluationError(f"Mittag-Leffler series did not converge within {MAX_TERMS} terms (mu={mu}, nu={nu}, z={z})")


def _refined_sum(mu: float, nu: float, z: complex, k: int, res: SeriesResult) -> complex:
    """The same ``res.n_terms``-term partial sum in extended precision."""
    digits = 20 + math.ceil(math.log10(res.cancellation))
    with mpmath.workdps(digits):
        zm = mpmath.mpc(z)
        fact = mpmath.factorial(k)
        zi = mpmath.mpf(1)
        total = mpmath.mpc(0)
        for i in range(res.n_terms):
            if i:
                fact = fact * (i + k) / i
                zi = zi * zm
            total += fact * zi * mpmath.rgamma(mpmath.mpf(mu) * (i + k) + mpmath.mpf(nu))
        return complex(total)


def _checked(res: SeriesResult, what: str) -> complex:
    if res.cancellation > CANCELLATION_CAP:
        raise LossOfPrecisionError(
            f"{what}: cancellation ratio {res.cancellation:.3g} exceeds {CANCELLATION_CAP:g}; result unreliable"
        )
    return res.value


def ml(params: MLParams, z: complex) -> complex:
    """``E_{mu,nu}(z)``."""
    return _checked(ml_series(params.mu, params.nu, z, 0), "ml")


def ml_deriv(params: MLParams, k: int, z: complex) -> complex:
    """k-th derivative ``E^{(k)}_{mu,nu}(z)``; ``k = 0`` is :func:`ml` exactly."""
    return _checked(ml_series(params.mu, params.nu, z, k), "ml_deriv")


def podlubny_series(k: int, t: float, y: float, mu: float, nu: float) -> tuple[complex, SeriesResult]:
    """``t^{mu k + nu - 1} E^{(k)}_{mu,nu}(y t^mu)`` with the inner diagnostics."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    res = ml_series(mu, nu, y * t**mu, k)
    return t ** (mu * k + nu - 1) * res.value, res


def podlubny_ek(k: int, t: float, y: float, mu: float, nu: float) -> float:
    """Podlubny's function ``E_k(t, y; mu, nu)`` for real arguments.

    ``nu`` may be zero or negative; the power prefactor then diverges at
    ``t -> 0`` and the inner series treats ``1/Gamma`` at its poles as 0.
    """
    value, res = podlubny_series(k, t, y, mu, nu)
    _checked(res, "podlubny_ek")
    return value.real


def ml_scalar(mu: float, nu: float, z: complex, k: int = 0) -> complex:
    """Convenience wrapper: ``ml_deriv(MLParams(mu, nu), k, z)``."""
    return ml_deriv(MLParams(mu, nu), k, z)
