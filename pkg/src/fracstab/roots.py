"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

Sparse, high-degree w-plane polynomials such as ``0.8 w^22 + 0.5 w^9 + 1``
have all their roots close to one circle, which is exactly the situation the
Aberth correction handles well: each root estimate is pushed by a Newton step
that is repelled from all the other estimates.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, NumericError

MAX_ITER = 500
BACKWARD_TOL = 1e-12
CLUSTER_TOL = 1e-8


def _horner(desc: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """p(z), p'(z) and the modulus bound sum |a_i| |z|^i, by Horner."""
    p = np.full_like(z, desc[0])
    dp = np.zeros_like(z)
    az = np.abs(z)
    bound = np.full(z.shape, abs(desc[0]))
    for a in desc[1:]:
        dp = dp * z + p
        p = p * z + a
        bound = bound * az + abs(a)
    return p, dp, bound


def backward_error(coeffs_ascending, z) -> np.ndarray:
    """``|P(z)| / sum |a_i||z|^i`` for each ``z``."""
    desc = np.asarray(coeffs_ascending, dtype=complex)[::-1]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p, _, bound = _horner(desc, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(bound > 0, np.abs(p) / bound, 0.0)


def _pair_conjugates(z: np.ndarray, scale: float) -> np.ndarray:
    """Make a root set of a real polynomial exactly conjugate-symmetric."""
    z = z.copy()
    tol = 1e-7 * max(scale, 1.0)
    upper = [i for i in range(len(z)) if z[i].imag > tol]
    lower = [i for i in range(len(z)) if z[i].imag < -tol]
    real = [i for i in range(len(z)) if abs(z[i].imag) <= tol]
    for i in real:
        z[i] = z[i].real
    free = set(lower)
    for i in upper:
        if not free:
            break
        j = min(free, key=lambda j: abs(z[j] - np.conj(z[i])))
        free.discard(j)
        avg = 0.5 * (z[i] + np.conj(z[j]))
        z[i], z[j] = avg, np.conj(avg)
    # an unmatched non-real estimate belongs to a real (multiple) root
    for i in free:
        z[i] = z[i].real
    for i in upper:
        if not any(abs(z[i] - np.conj(z[j])) == 0 for j in lower):
            z[i] = z[i].real
    return z


def sort_roots(z) -> np.ndarray:
    """Descending real part, then descending imaginary part."""
    z = np.asarray(z, dtype=complex)
    order = np.lexsort((-z.imag, -z.real))
    return z[order]


def find_roots(coeffs_ascending, *, name: str = "polynomial") -> np.ndarray:
    """All complex roots (with multiplicity) of ``sum c_i w^i``.

    ``coeffs_ascending[i]`` multiplies ``w**i``. Exact zero roots are split
    off first; the remainder is scaled to monic form and solved by Aberth
    iteration from a perturbed circle of radius ``|a_0/a_N|^(1/N)``, then each
    root gets one Newton polish. Every root is checked against a backward
    error of ``1e-12``.
    """
    c = np.trim_zeros(np.asarray(coeffs_ascending, dtype=float), "b")
    if c.size < 2:
        raise InvalidInputError(f"{name} has degree 0; nothing to solve")
    if not np.all(np.isfinite(c)):
        raise InvalidInputError(f"{name} has non-finite coefficients")
    n_zero = int(np.argmax(c != 0.0))
    core = c[n_zero:]
    deg = core.size - 1
    zeros = np.zeros(n_zero, dtype=complex)
    if deg == 0:
        return sort_roots(zeros)

    monic = core / core[-1]
    desc = monic[::-1].astype(complex)
    radius = abs(monic[0]) ** (1.0 / deg)
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = radius * np.exp(1j * angles)
    if deg == 1:
        z = np.array([-monic[0] + 0j])

    active = np.ones(deg, dtype=bool)
    for _ in range(MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p, dp, bound = _horner(desc, z[idx])
        ratio = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 0)
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        repel = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - ratio * repel
        step = np.where(denom != 0, ratio / np.where(denom != 0, denom, 1), ratio)
        z[idx] -= step
        done = (np.abs(step) <= 4 * np.finfo(float).eps * np.maximum(np.abs(z[idx]), 1e-300)) | (
            np.abs(p) <= np.finfo(float).eps * bound
        )
        active[idx[done]] = False

    # one Newton polish per root, kept only if it lowers the residual
    p, dp, bound = _horner(desc, z)
    safe = dp != 0
    cand = np.where(safe, z - p / np.where(safe, dp, 1), z)
    p2, _, _ = _horner(desc, cand)
    z = np.where(np.abs(p2) < np.abs(p), cand, z)

    z = _pair_conjugates(z, radius)
    berr = backward_error(core, z)
    if np.any(berr > BACKWARD_TOL):
        raise NumericError(f"root finder did not converge for {name}: worst backward error {berr.max():.3g}")
    return sort_roots(np.concatenate([z, zeros]))


def root_clusters(z, scale: float | None = None) -> list[list[int]]:
    """Groups of root indices closer than ``1e-8 * scale`` to each other."""
    z = np.asarray(z, dtype=complex)
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(z)))) if z.size else 1.0
    tol = CLUSTER_TOL * scale
    seen: set[int] = set()
    groups = []
    for i in range(z.size):
        if i in seen:
            continue
        grp = [j for j in range(z.size) if j not in seen and abs(z[j] - z[i]) < tol]
        seen.update(grp)
        if len(grp) > 1:
            groups.append(grp)
    return groups
