import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from sympy import Rational
from sympy.physics.quantum.cg import CG

from relparam.spin_algebra import (
    PAULI,
    HalfInteger,
    as_direction,
    clebsch_gordan,
    coherent_state,
    collective_rotation,
    direction,
    qubit_state,
    rotation_matrix,
    rotation_operator,
    spin_operators,
    tensor,
)

from conftest import random_unit


class TestHalfInteger:
    @pytest.mark.parametrize("text,twice", [("1/2", 1), ("3/2", 3), ("2", 4), ("2.5", 5), ("0", 0)])
    def test_parse(self, text, twice):
        assert HalfInteger.of(text).twice_j == twice

    @pytest.mark.parametrize("value", ["0.3", "1/3", 0.3, "abc", -0.5, float("nan")])
    def test_rejects(self, value):
        with pytest.raises((ValueError, TypeError)):
            HalfInteger.of(value)

    def test_fraction_and_str(self):
        j = HalfInteger.of(Fraction(7, 2))
        assert str(j) == "7/2" and j.dim == 8 and j.casimir == pytest.approx(3.5 * 4.5)
        assert str(HalfInteger(6)) == "3"

    def test_shift(self):
        assert HalfInteger(3).shift(-1) == HalfInteger(2)
        with pytest.raises(ValueError):
            HalfInteger(0).shift(-1)


@pytest.mark.parametrize("twice_j", [1, 2, 3, 4, 7, 10, 20, 51, 100])
def test_casimir_and_commutators(twice_j):
    j = HalfInteger(twice_j)
    jx, jy, jz = spin_operators(j)
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.abs(casimir - j.casimir * np.eye(j.dim)).max() < 1e-9
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-9
    assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() < 1e-9
    assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() < 1e-9
    # basis ordered m = j ... -j
    assert np.real(np.diag(jz))[0] == pytest.approx(j.value)


def test_operators_read_only():
    jx, _, _ = spin_operators(1)
    with pytest.raises(ValueError):
        jx[0, 0] = 1.0


def test_pauli():
    x, y, z = PAULI
    assert np.allclose(x @ x, np.eye(2)) and np.allclose(x @ y, 1j * z)


def test_as_direction_rejects():
    with pytest.raises(ValueError):
        as_direction([1, 1, 0])
    with pytest.raises(ValueError):
        as_direction([1, 0])


@pytest.mark.parametrize("twice_j", [1, 2, 3, 4, 5, 6])
def test_coherent_overlap_law(twice_j, rng):
    j = HalfInteger(twice_j)
    up = coherent_state(j, [0, 0, 1])
    for _ in range(10):
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        psi = coherent_state(j, direction(theta, phi))
        assert abs(np.vdot(up, psi)) ** 2 == pytest.approx(((1 + math.cos(theta)) / 2) ** twice_j, abs=1e-10)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("twice_j", [1, 3, 6])
def test_coherent_state_matches_rotated_top_state(twice_j, rng):
    j = HalfInteger(twice_j)
    jx, jy, jz = spin_operators(j)
    top = np.zeros(j.dim, complex)
    top[0] = 1
    for _ in range(5):
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        rotated = expm(-1j * phi * jz) @ expm(-1j * theta * jy) @ top
        psi = coherent_state(j, direction(theta, phi))
        assert abs(abs(np.vdot(rotated, psi)) - 1) < 1e-10


@pytest.mark.parametrize("vec", [[0, 0, 1], [0, 0, -1], [1, 0, 0]])
def test_coherent_poles_finite(vec):
    psi = coherent_state(HalfInteger(9), vec)
    assert np.all(np.isfinite(psi)) and np.linalg.norm(psi) == pytest.approx(1.0)


def test_qubit_state_eigenvector(rng):
    n = random_unit(rng)
    psi = qubit_state(n)
    op = sum(c * p for c, p in zip(n, PAULI))
    assert np.allclose(op @ psi, psi)


@pytest.mark.parametrize(
    "args,expected",
    [
        ((0.5, 0.5, 0.5, -0.5, 0, 0), 1 / math.sqrt(2)),
        ((0.5, -0.5, 0.5, 0.5, 0, 0), -1 / math.sqrt(2)),
        ((0.5, 0.5, 0.5, 0.5, 1, 1), 1.0),
        ((1, 0, 1, 0, 0, 0), -1 / math.sqrt(3)),
        ((1, 1, 0.5, -0.5, 1.5, 0.5), 1 / math.sqrt(3)),
    ],
)
def test_cg_known_values(args, expected):
    assert clebsch_gordan(*args) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("args", [(0.5, 0.5, 0.5, 0.5, 0, 0), (1, 0, 1, 0, 3, 0), (1, 2, 1, -2, 0, 0), (1, 0.5, 1, 0, 1, 0.5)])
def test_cg_invalid_is_zero(args):
    assert clebsch_gordan(*args) == 0.0


def _half(x):
    return Rational(round(2 * x), 2)


@settings(max_examples=60, deadline=None)
@given(
    a=st.integers(0, 8), b=st.integers(0, 8), c_off=st.integers(0, 8),
    ma=st.integers(0, 8), mb=st.integers(0, 8),
)
def test_cg_matches_sympy(a, b, c_off, ma, mb):
    twice_c = abs(a - b) + 2 * min(c_off, (a + b - abs(a - b)) // 2)
    am = -a + 2 * (ma % (a + 1))
    bm = -b + 2 * (mb % (b + 1))
    j1, m1, j2, m2, J = a / 2, am / 2, b / 2, bm / 2, twice_c / 2
    M = m1 + m2
    if abs(M) > J:
        assert clebsch_gordan(j1, m1, j2, m2, J, M) == 0.0
        return
    ref = float(CG(_half(j1), _half(m1), _half(j2), _half(m2), _half(J), _half(M)).doit())
    assert clebsch_gordan(j1, m1, j2, m2, J, M) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("j1,j2", [(0.5, 0.5), (1, 1.5), (3, 2), (0.5, 25)])
def test_cg_orthogonality(j1, j2):
    for twice_M in range(-int(2 * (j1 + j2)), int(2 * (j1 + j2)) + 1, 2):
        M = twice_M / 2
        m1s = [m for m in np.arange(-j1, j1 + 0.5) if abs(M - m) <= j2]
        Js = [J for J in np.arange(abs(j1 - j2), j1 + j2 + 0.5) if J >= abs(M)]
        mat = np.array([[clebsch_gordan(j1, m1, j2, M - m1, J, M) for J in Js] for m1 in m1s])
        assert np.abs(mat @ mat.T - np.eye(len(m1s))).max() < 1e-12


def test_tensor():
    assert tensor([np.eye(2), np.eye(3)]).shape == (6, 6)
    with pytest.raises(ValueError):
        tensor([np.eye(2), np.ones(2)])
    with pytest.raises(ValueError):
        tensor([])


def test_rotation_matrix_is_so3(rng):
    R = rotation_matrix(random_unit(rng), 1.234)
    assert np.allclose(R @ R.T, np.eye(3)) and np.linalg.det(R) == pytest.approx(1.0)


@pytest.mark.parametrize("twice_j", [1, 2, 5])
def test_rotation_moves_coherent_states(twice_j, rng):
    j = HalfInteger(twice_j)
    n, axis = random_unit(rng), random_unit(rng)
    angle = rng.uniform(0, 2 * np.pi)
    U = rotation_operator(j, axis, angle)
    assert np.allclose(U.conj().T @ U, np.eye(j.dim))
    moved = U @ coherent_state(j, n)
    target = coherent_state(j, rotation_matrix(axis, angle) @ n)
    assert abs(abs(np.vdot(moved, target)) - 1) < 1e-10


def test_collective_rotation_shape():
    U = collective_rotation([0, 0, 1], 0.3, ["1/2", "1/2", "2"])
    assert U.shape == (20, 20)
    assert np.allclose(U.conj().T @ U, np.eye(20))
