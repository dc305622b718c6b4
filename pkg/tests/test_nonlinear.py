import math
import time
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fracstab.errors import NotApplicableError, UnsupportedFormError
from fracstab.nonlinear import (
    NLVerdict,
    char_poly_incommensurate,
    find_equilibria,
    jacobian_at,
    min_chaos_order,
    nonlinear_stability,
)
from fracstab.parser import PolynomialVectorField, parse_vector_field
from fracstab.roots import find_roots

CHEN = ["35*(x2-x1)", "-7*x1-x1*x3+28*x2", "x1*x2-3*x3"]
Q_CHEN = (F(4, 5), F(1), F(9, 10))
R63 = math.sqrt(63)


@pytest.fixture(scope="module")
def chen():
    return parse_vector_field("0.8,1.0,0.9", CHEN)


def test_chen_equilibria(chen):
    eq = find_equilibria(chen, [(0, 0, 0), (8, 8, 21), (-8, -8, 21)])
    pts = np.array([e.x_star for e in eq])
    assert np.allclose(pts, [[0, 0, 0], [R63, R63, 21], [-R63, -R63, 21]], atol=1e-12)
    assert all(e.residual <= 1e-9 * 36 for e in eq)


def test_dedup_and_diagnostics():
    f = parse_vector_field("0.5", ["x1^2-1"])
    eq = find_equilibria(f, [(0.5,), (-0.5,), (2.0,), (0.9,)])
    assert [e.x_star for e in eq] == [(1.0,), (-1.0,)]
    g = parse_vector_field("0.9", ["1+x1^2"])
    notes = []
    assert find_equilibria(g, [(0.0,)], diagnostics=notes) == []
    assert notes and "did not converge" in notes[0]


def test_linear_decay_equilibrium():
    f = parse_vector_field("1", ["-x1"])
    (e,) = find_equilibria(f, [(3.0,)])
    assert e.x_star == (0.0,)


def test_chen_jacobians(chen):
    assert np.allclose(jacobian_at(chen, [R63, R63, 21]), [[-35, 35, 0], [-28, 28, -R63], [R63, R63, -3]])
    assert np.array_equal(jacobian_at(chen, [0, 0, 0]), [[-35, 35, 0], [-7, 28, 0], [0, 0, -3]])
    lin = parse_vector_field("0.5,0.5", ["2*x1-x2", "3*x2"])
    for x in ([0, 0], [1.5, -2]):
        assert np.array_equal(jacobian_at(lin, x), [[2, -1], [0, 3]])


def test_chen_char_poly(chen):
    cp = char_poly_incommensurate(jacobian_at(chen, [R63, R63, 21]), Q_CHEN)
    assert cp.m == 10 and cp.gamma == F(1, 10) and cp.degree == 27
    expected = [(27, 1), (19, 35), (18, 3), (17, -28), (10, 105), (8, -21), (0, 4410)]
    terms = cp.terms()
    assert [d for d, _ in terms] == [d for d, _ in expected]
    for (_, c), (_, e) in zip(terms, expected):
        assert c == pytest.approx(e, rel=1e-9)


def test_char_poly_small_cases():
    cp = char_poly_incommensurate([[-1.0]], [F(1, 2)])
    assert cp.m == 2 and cp.poly.coeffs == (1.0, 1.0)
    cp = char_poly_incommensurate([[-1.0, 0], [0, 2.0]], [F(1, 3), F(1, 3)])
    # (l - -1)(l - 2) with m = 3, degree m q = 1 each
    assert cp.poly.coeffs == (-2.0, -1.0, 1.0)
    with pytest.raises(UnsupportedFormError):
        char_poly_incommensurate(np.eye(7), [F(1, 2)] * 7)


def test_chen_stability(chen):
    t0 = time.perf_counter()
    rep = nonlinear_stability(jacobian_at(chen, [R63, R63, 21]), Q_CHEN)
    assert time.perf_counter() - t0 < 5
    assert rep.verdict is NLVerdict.UNSTABLE and not rep.commensurate
    assert rep.gamma == pytest.approx(0.1)
    un = sorted(rep.unstable_roots, key=lambda z: z.imag)
    assert len(un) == 2
    assert abs(un[1] - (1.2928 + 0.2032j)) < 2e-3 and abs(un[0] - (1.2928 - 0.2032j)) < 2e-3
    args = [a for r, a in zip(rep.roots, rep.abs_args) if r in un]
    assert args[0] == pytest.approx(0.1560, abs=1e-3) and args[0] < math.pi / 20


def test_commensurate_and_marginal():
    assert nonlinear_stability([[-1, 0], [0, -2]], [1, 1]).verdict is NLVerdict.STABLE
    # eigenvalues +-j sit exactly on |arg| = pi/2 for q = 1
    assert nonlinear_stability([[0, 1], [-1, 0]], [1, 1]).verdict is NLVerdict.MARGINAL
    assert nonlinear_stability([[0.5]], [0.5]).verdict is NLVerdict.UNSTABLE


def test_min_chaos_order(chen):
    assert min_chaos_order([[1, -1], [1, 1]]) == pytest.approx(0.5, rel=1e-14)
    a, b = 1.2928, 0.2032
    assert min_chaos_order([[a, -b], [b, a]]) == pytest.approx(2 / math.pi * math.atan(b / a), rel=1e-12)
    assert min_chaos_order([[a, -b], [b, a]]) == pytest.approx(0.0993, abs=1e-4)
    with pytest.raises(NotApplicableError):
        min_chaos_order([[-1, 0], [0, -2]])


# -- properties -------------------------------------------------------------------

entries = st.lists(st.floats(-3, 3), min_size=9, max_size=9)


@given(entries, st.sampled_from([F(1, 2), F(2, 3), F(3, 4), F(4, 5), F(1), F(6, 5)]))
def test_determinant_matches_eigenvalues(vals, q):
    jac = np.array(vals).reshape(3, 3)
    eig = np.linalg.eigvals(jac)
    assume(np.min(np.abs(eig)) > 1e-2)
    assume(min(abs(a - b) for i, a in enumerate(eig) for b in eig[i + 1 :]) > 1e-2)
    cp = char_poly_incommensurate(jac, [q] * 3)
    roots = find_roots(cp.poly.coeffs)
    k = int(q * cp.m)
    desc = np.array(cp.poly.coeffs[::-1], dtype=complex)
    der = np.polyder(desc)
    for mu in eig:
        lam = roots[np.argmin(np.abs(roots**k - mu))]
        for _ in range(3):
            step = np.polyval(desc, lam) / np.polyval(der, lam)
            if not np.isfinite(step):
                break
            lam -= step
        assert abs(lam**k - mu) <= 1e-8 * max(1.0, abs(mu))


poly_terms = st.lists(
    st.tuples(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.lists(st.integers(0, 3), min_size=3, max_size=3)),
    min_size=1,
    max_size=5,
)


@given(st.lists(poly_terms, min_size=3, max_size=3), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_jacobian_finite_differences(comps, x):
    field = PolynomialVectorField((F(1, 2),) * 3, tuple(tuple((c, tuple(e)) for c, e in comp) for comp in comps))
    x = np.array(x)
    jac = field.jacobian(x)
    fd = np.empty((3, 3))
    for j in range(3):
        h = 1e-6 * (1 + abs(x[j]))
        e = np.zeros(3)
        e[j] = h
        fd[:, j] = (field(x + e) - field(x - e)) / (2 * h)
    scale = np.maximum(1.0, np.abs(jac))
    assert np.all(np.abs(fd - jac) <= 1e-5 * scale)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_equilibria_are_newton_fixed_points(seed):
    field = parse_vector_field("0.9,0.9,0.9", ["x1^2 + x2 - 1", "x2 - x3^2", "x1 + x3 - 0.5"])
    for e in find_equilibria(field, [seed]):
        x = np.array(e.x_star)
        assert e.residual <= 1e-9 * (1 + 1)
        step = np.linalg.solve(field.jacobian(x), -field(x))
        assert np.max(np.abs(step)) <= 1e-12 * max(1.0, np.max(np.abs(x)))
