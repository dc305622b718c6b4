import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracstab.errors import InvalidInputError
from fracstab.roots import backward_error, find_roots, root_clusters, sort_roots

EX4 = np.zeros(23)
EX4[[0, 9, 22]] = [1.0, 0.5, 0.8]

# upper-half-plane members of each conjugate pair as printed for Example 4
EX4_PAPER = [
    -0.9970 + 0.1182j, -0.9297 + 0.4414j, -0.7465 + 0.6420j, -0.5661 + 0.8633j,
    -0.259 + 0.9625j, -0.0254 + 1.0111j, 0.3080 + 0.9772j, 0.5243 + 0.8359j,
    0.7793 + 0.6795j, 0.9084 + 0.3960j, 1.0045 + 0.1684j,
]  # fmt: skip


def test_example4_roots():
    t0 = time.perf_counter()
    z = find_roots(EX4)
    assert time.perf_counter() - t0 < 1.0
    assert z.size == 22
    for w in EX4_PAPER:
        for target in (w, w.conjugate()):
            assert np.min(np.abs(z - target)) < 1e-3
    assert np.all(backward_error(EX4, z) <= 1e-12)


def test_example6_roots():
    z = find_roots([65.068, 0, 0, 0, 12.46, 39.69])
    expected = [0.83580 + 0.64536j, 0.83580 - 0.64536j, -0.40540 + 1.0426j, -0.40540 - 1.0426j, -1.17474]
    assert np.allclose(z, expected, atol=1e-3, rtol=0)
    assert z[4].imag == 0.0


def test_unit_circle_pair():
    z = find_roots([1, 0, 1])
    assert np.allclose(z, [1j, -1j], atol=1e-14)


def test_zero_roots_split_off():
    z = find_roots([0, 0, -1, 1])  # w^3 - w^2
    assert sorted(z.real) == [0.0, 0.0, 1.0]


def test_double_roots_are_clustered():
    z = find_roots([2, -3, 0, 1])  # (w - 1)^2 (w + 2)
    assert np.allclose(z, [1, 1, -2], atol=1e-7)
    assert root_clusters(z) == [[0, 1]]
    z = find_roots([1, 0, 2, 0, 1])  # (w^2 + 1)^2
    assert root_clusters(z) == [[0, 2], [1, 3]]


def test_degree_zero_rejected():
    with pytest.raises(InvalidInputError):
        find_roots([3.0])
    with pytest.raises(InvalidInputError):
        find_roots([1.0, np.inf])


def test_sort_order():
    z = sort_roots([1j, 2, -1, 2 + 1j, 2 - 1j])
    assert list(z) == [2 + 1j, 2, 2 - 1j, 1j, -1]


def test_degree_64_sparse():
    c = np.zeros(65)
    c[[0, 17, 64]] = [2.0, -1.0, 1.0]
    z = find_roots(c)
    assert z.size == 64 and np.all(backward_error(c, z) <= 1e-12)


# -- properties -------------------------------------------------------------------

coeffs_st = st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=25).filter(
    lambda c: abs(c[-1]) > 1e-2 and abs(c[0]) > 1e-3
)


@given(coeffs_st)
def test_count_backward_error_and_conjugates(c):
    z = find_roots(c)
    assert z.size == len(c) - 1
    assert np.all(backward_error(c, z) <= 1e-12)
    upper = np.sort_complex(z[z.imag > 0])
    lower = np.sort_complex(np.conj(z[z.imag < 0]))
    assert upper.size == lower.size
    assert np.all(np.abs(upper - lower) <= 1e-10 * np.maximum(1, np.abs(upper)))
