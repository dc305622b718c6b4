"""Fixed-step Grünwald-Letnikov integration of fractional-order systems.

Each state obeys ``D^{q_i} x_i = f_i(x)`` and is advanced explicitly:

    x_i(t_k) = x_i(0) + h^{q_i} f_i(x(t_{k-1}))
               - sum_{j=1}^{J_k} c_j^{(q_i)} (x_i(t_{k-j}) - x_i(0))

with the binomial weights ``c_j = (-1)^j binom(q, j)``. The memory sum runs
over deviations from the initial state, which makes the scheme solve the
Caputo-type initial value problem; with zero initial state it is the plain
GL recursion. ``J_k`` is ``k`` (full memory) or the short-memory window
``floor(memory / h)``.

Solutions of such problems start like ``x(0) + c t^q``, which the plain
recursion resolves only to ``O(h^q)`` in the first steps. With
``start_correction`` one extra weight per step, ``w_k = Gamma(1+q) -
sum_{j<k} c_j (k-j)^q``, is applied to the first deviation so that the
scheme is exact on ``t^q`` and first order uniformly in time. For ``q = 1``
all ``w_k`` vanish and the update is explicit Euler.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError
from .lti import to_state_space
from .orders import PseudoPolynomial
from .parser import PolynomialVectorField

DIVERGENCE_LIMIT = 1e8


def gl_coeffs(q: float, n: int) -> np.ndarray:
    """Weights ``c_0..c_n`` with ``c_0 = 1`` and ``c_j = (1 - (1+q)/j) c_{j-1}``."""
    if n < 0:
        raise InvalidInputError(f"n must be nonnegative, got {n}")
    c = np.empty(n + 1)
    c[0] = 1.0
    if n:
        j = np.arange(1, n + 1)
        c[1:] = np.cumprod(1.0 - (1.0 + q) / j)
    return c


@dataclass(frozen=True)
class SimConfig:
    h: float
    t_end: float
    x0: tuple[float, ...] = ()
    memory: float | None = None
    start_correction: bool = True

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidInputError(f"step h must be positive, got {self.h}")
        if not self.t_end > 0:
            raise InvalidInputError(f"t_end must be positive, got {self.t_end}")
        if self.h > self.t_end:
            raise InvalidInputError(f"step h={self.h} exceeds t_end={self.t_end}")
        if self.memory is not None and self.memory < 10 * self.h:
            raise InvalidInputError(f"memory window {self.memory} is shorter than 10 steps")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.h))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diverged: bool = False
    diverged_at: int | None = None

    def to_csv(self, names: Sequence[str] | None = None, fmt: Callable[[float], str] = repr) -> str:
        n = self.states.shape[1]
        names = list(names) if names else [f"x{i + 1}" for i in range(n)]
        lines = [",".join(["t", *names])]
        for t, row in zip(self.times, self.states):
            lines.append(",".join([fmt(float(t)), *(fmt(float(v)) for v in row)]))
        if self.diverged:
            lines.append(f"# diverged at step {self.diverged_at} (|x| > {DIVERGENCE_LIMIT:g})")
        return "\n".join(lines) + "\n"


def start_weights(q: float, n: int) -> np.ndarray:
    """``w_0..w_n`` making the GL sum exact on ``t^q`` (``w_0`` unused)."""
    c = gl_coeffs(q, n)
    powers = np.arange(n + 1, dtype=float) ** q
    return math.gamma(1.0 + q) - np.convolve(c, powers)[: n + 1]


def _integrate(
    rhs, x0: np.ndarray, q: Sequence[float], h: float, n_steps: int, memory: float | None, correct: bool
) -> Trajectory:
    n = x0.size
    window = n_steps if memory is None else max(1, int(math.floor(memory / h + 1e-9)))
    horizon = min(n_steps, window)
    groups: dict[float, list[int]] = {}
    for i, qi in enumerate(q):
        groups.setdefault(float(qi), []).append(i)
    # reversed weights: crev[horizon - j] = c_j, so a contiguous slice lines
    # up with the deviation history dev[k-J:k]
    plan = []
    for qv, idx in groups.items():
        c = gl_coeffs(qv, horizon)
        w = start_weights(qv, horizon) if correct and qv != 1.0 else None
        plan.append((np.array(idx), h**qv, c[::-1].copy(), w))

    states = np.empty((n_steps + 1, n))
    dev = np.zeros((n_steps + 1, n))
    states[0] = x0
    x = x0.copy()
    for k in range(1, n_steps + 1):
        f = rhs(k - 1, x)
        J = min(k, window)
        new = np.empty(n)
        for idx, hq, crev, w in plan:
            mem = crev[horizon - J : horizon] @ dev[k - J : k, idx]
            if w is None or k > window:
                new[idx] = x0[idx] + hq * f[idx] - mem
            elif k == 1:
                new[idx] = x0[idx] + hq * f[idx] / (1.0 + w[1])
            else:
                new[idx] = x0[idx] + hq * f[idx] - mem - w[k] * dev[1, idx]
        if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > DIVERGENCE_LIMIT:
            times = h * np.arange(k)
            return Trajectory(times, states[:k].copy(), True, k)
        states[k] = new
        dev[k] = new - x0
        x = new
    return Trajectory(h * np.arange(n_steps + 1), states, False, None)


def simulate(field_: PolynomialVectorField, cfg: SimConfig) -> Trajectory:
    """Integrate an autonomous polynomial system from ``cfg.x0``."""
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.size != field_.n:
        raise InvalidInputError(f"x0 has {x0.size} entries for a {field_.n}-dimensional system")
    q = [float(v) for v in field_.orders]
    return _integrate(lambda k, x: field_(x), x0, q, cfg.h, cfg.n_steps, cfg.memory, cfg.start_correction)


class InputKind(str, enum.Enum):
    ZERO = "zero"
    IMPULSE = "impulse"
    STEP = "step"


def simulate_lti(den: PseudoPolynomial, input: InputKind | str, cfg: SimConfig) -> Trajectory:
    """Simulate ``den(D) y = u`` through its companion state-space form.

    The states are ``y, D^{a_1} y, ...``; column 0 of the result is ``y``.
    The impulse is a single pulse of height ``1/h`` on the first step.
    ``cfg.x0`` is the initial state (zeros when empty). The start correction
    only applies to the unforced case; forced states do not start like
    ``t^q``.
    """
    kind = InputKind(input)
    ss = to_state_space(den)
    x0 = np.asarray(cfg.x0, dtype=float) if cfg.x0 else np.zeros(ss.n)
    if x0.size != ss.n:
        raise InvalidInputError(f"x0 has {x0.size} entries for a {ss.n}-state realization")
    A, b = ss.A, ss.B[:, 0]
    h = cfg.h

    def rhs(k, x):
        if kind is InputKind.STEP:
            u = 1.0
        elif kind is InputKind.IMPULSE:
            u = 1.0 / h if k == 0 else 0.0
        else:
            u = 0.0
        return A @ x + b * u

    correct = cfg.start_correction and kind is InputKind.ZERO
    return _integrate(rhs, x0, [float(q) for q in ss.q], h, cfg.n_steps, cfg.memory, correct)
