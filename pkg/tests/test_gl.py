import time

import numpy as np
import pytest

from fracstab.errors import InvalidInputError
from fracstab.gl import SimConfig, gl_coeffs, simulate, simulate_lti, start_weights
from fracstab.mittag_leffler import ml_series
from fracstab.parser import parse_pseudo_polynomial as pp
from fracstab.parser import parse_vector_field

RELAX = parse_vector_field("0.7", ["-x1"])


def relax_oracle(t):
    return np.array([ml_series(0.7, 1.0, -(ti**0.7)).value.real for ti in t])


def relax_error(h, t_end=5.0):
    tr = simulate(RELAX, SimConfig(h, t_end, (1.0,)))
    return np.max(np.abs(tr.states[:, 0] - relax_oracle(tr.times)))


def test_gl_coeffs():
    assert np.array_equal(gl_coeffs(1.0, 3), [1, -1, 0, 0])
    assert np.allclose(gl_coeffs(0.5, 2), [1, -0.5, -0.125], rtol=0, atol=1e-16)
    assert gl_coeffs(0.37, 0)[0] == 1.0


def test_start_weights_vanish_for_integer_order():
    assert np.allclose(start_weights(1.0, 20)[1:], 0.0, atol=1e-15)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        SimConfig(10.0, 5.0)
    with pytest.raises(InvalidInputError):
        SimConfig(0.1, 5.0, memory=0.5)
    with pytest.raises(InvalidInputError):
        SimConfig(-0.1, 5.0)
    with pytest.raises(InvalidInputError):
        simulate(RELAX, SimConfig(0.1, 1.0, (1.0, 2.0)))


def test_relaxation_accuracy_and_order():
    t0 = time.perf_counter()
    e1 = relax_error(1e-3)
    e2 = relax_error(5e-4)
    assert time.perf_counter() - t0 < 10
    assert e1 <= 5e-3
    assert 1.7 <= e1 / e2 <= 2.3


def test_power_law_tail():
    tr = simulate(RELAX, SimConfig(1e-2, 100.0, (1.0,)))
    sel = tr.times >= 50
    slope = np.polyfit(np.log(tr.times[sel]), np.log(np.abs(tr.states[sel, 0])), 1)[0]
    assert abs(slope + 0.7) <= 0.15


def test_short_memory_full_window_is_bitwise_identical():
    full = simulate(RELAX, SimConfig(1e-2, 3.0, (1.0,)))
    windowed = simulate(RELAX, SimConfig(1e-2, 3.0, (1.0,), memory=3.0))
    assert np.array_equal(full.states, windowed.states)


def test_short_memory_differs_when_truncated():
    full = simulate(RELAX, SimConfig(1e-2, 3.0, (1.0,)))
    short = simulate(RELAX, SimConfig(1e-2, 3.0, (1.0,), memory=0.5))
    assert not np.array_equal(full.states, short.states)
    assert np.all(np.isfinite(short.states))


def test_integer_order_is_euler():
    f = parse_vector_field("1,1", ["-x1 + x2", "-2*x2"])
    h = 0.01
    tr = simulate(f, SimConfig(h, 1.0, (1.0, 1.0)))
    a = np.array([[-1.0, 1.0], [0.0, -2.0]])
    x = np.array([1.0, 1.0])
    for k in range(1, tr.states.shape[0]):
        x = x + h * a @ x
        assert np.allclose(tr.states[k], x, rtol=1e-12, atol=1e-14)


def test_chen_bounded():
    chen = parse_vector_field("0.8,1.0,0.9", ["35*(x2-x1)", "-7*x1-x1*x3+28*x2", "x1*x2-3*x3"])
    tr = simulate(chen, SimConfig(5e-3, 30.0, (-9.0, -5.0, 14.0)))
    assert not tr.diverged
    late = tr.states[tr.times >= 1.0]
    assert np.all(np.abs(late[:, :2]) <= 30)
    assert np.all((late[:, 2] >= 0) & (late[:, 2] <= 50))
    # still moving at the end: no convergence to an equilibrium
    assert np.std(late[-1000:, 0]) > 1.0


def test_divergence_flag_and_csv():
    f = parse_vector_field("0.9", ["x1^2"])
    tr = simulate(f, SimConfig(0.01, 10.0, (1.0,)))
    assert tr.diverged and tr.diverged_at is not None
    assert tr.states.shape[0] == tr.diverged_at
    csv = tr.to_csv()
    assert csv.startswith("t,x1\n")
    assert csv.rstrip().splitlines()[-1].startswith("# diverged at step")


def test_lti_step_first_order():
    tr = simulate_lti(pp("s+1"), "step", SimConfig(1e-3, 3.0))
    exact = 1 - np.exp(-tr.times)
    assert np.max(np.abs(tr.states[:, 0] - exact)) < 1e-3


def test_lti_zero_input_decays():
    tr = simulate_lti(pp("0.8*s^2.2+0.5*s^0.9+1"), "zero", SimConfig(1e-2, 50.0, (1.0, 0.0)))
    y = tr.states[:, 0]
    assert abs(y[-1]) < 0.05 * np.max(np.abs(y))


def test_lti_impulse_two_term_kernel():
    # impulse response of 1/(s + 2) is exp(-2t)
    tr = simulate_lti(pp("s+2"), "impulse", SimConfig(1e-3, 2.0))
    sel = tr.times >= 0.1
    assert np.max(np.abs(tr.states[sel, 0] - np.exp(-2 * tr.times[sel]))) < 5e-3


def test_start_correction_fixes_early_steps():
    cfg = dict(h=1e-3, t_end=0.05, x0=(1.0,))
    t = simulate(RELAX, SimConfig(**cfg)).times
    corrected = simulate(RELAX, SimConfig(**cfg)).states[:, 0]
    plain = simulate(RELAX, SimConfig(**cfg, start_correction=False)).states[:, 0]
    exact = relax_oracle(t)
    assert np.max(np.abs(corrected - exact)) < 1e-3
    assert np.max(np.abs(plain - exact)) > 3 * np.max(np.abs(corrected - exact))
