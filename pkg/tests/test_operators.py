import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steertrust.errors import InvalidState, NonHermitianInput, UnsupportedDimension
from steertrust.operators import (
    HEISENBERG_WEYL,
    PAULI,
    DensityMatrix,
    HermitianUnitTrace,
    build_basis,
    build_clock_shift,
    frobenius_norm,
    hs_norm_sq,
    matrix_from_json,
    matrix_to_json,
    max_eigenvalue,
    projector,
    random_density_matrix,
)

from oracles import eig2_closed_form, random_hermitian

ALL_BASES = [(2, PAULI)] + [(d, HEISENBERG_WEYL) for d in range(2, 9)]


def test_hs_norm_trivial_cases():
    assert hs_norm_sq(np.zeros((3, 3))) == 0.0
    for d in range(2, 6):
        assert hs_norm_sq(np.eye(d)) == pytest.approx(d, abs=1e-12)
    assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert frobenius_norm(projector([1, 1j])) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("d,label", ALL_BASES)
def test_distinct_basis_elements_are_2d_apart(d, label):
    els = build_basis(d, label).elements
    for i, j in itertools.combinations(range(len(els)), 2):
        assert hs_norm_sq(els[j] - els[i]) == pytest.approx(2 * d, abs=1e-10)


@pytest.mark.parametrize("d,label", ALL_BASES)
def test_basis_orthogonality(d, label):
    els = build_basis(d, label).elements
    assert len(els) == d * d
    assert np.allclose(els[0], np.eye(d))
    for i, j in itertools.product(range(d * d), repeat=2):
        tr = np.trace(els[i] @ els[j].conj().T)
        assert abs(tr - d * (i == j)) < 1e-10


def test_pauli_and_small_heisenberg_weyl():
    p = build_basis(2, PAULI).elements
    assert np.allclose(p[1], [[0, 1], [1, 0]])
    assert np.allclose(p[2], [[0, -1j], [1j, 0]])
    assert np.allclose(p[3], [[1, 0], [0, -1]])
    hw = build_basis(2, HEISENBERG_WEYL).elements
    z, x = np.diag([1, -1]), np.array([[0, 1], [1, 0]])
    for got, want in zip(hw, [np.eye(2), z, x, x @ z]):
        assert np.allclose(got, want, atol=1e-12)


def test_basis_errors():
    with pytest.raises(UnsupportedDimension):
        build_basis(3, PAULI)
    with pytest.raises(UnsupportedDimension):
        build_basis(1)
    with pytest.raises(UnsupportedDimension):
        build_clock_shift(1)


def test_clock_shift():
    cs = build_clock_shift(2)
    assert np.allclose(cs.Z, np.diag([1, -1]), atol=1e-12)
    assert np.allclose(cs.X, [[0, 1], [1, 0]])
    for d in range(2, 9):
        cs = build_clock_shift(d)
        assert np.allclose(np.linalg.matrix_power(cs.Z, d), np.eye(d), atol=1e-12)
        assert np.allclose(np.linalg.matrix_power(cs.X, d), np.eye(d), atol=1e-12)
        for k in range(1, d):
            # geometric sum of d-th roots of unity
            assert abs(np.trace(np.linalg.matrix_power(cs.Z, k))) < 1e-12
    cs = build_clock_shift(3)
    assert abs(cs.omega - np.exp(2j * np.pi / 3)) < 1e-15
    # X|i> = |i+1>
    assert cs.X[1, 0] == 1 and cs.X[0, 2] == 1


def test_max_eigenvalue_examples():
    assert max_eigenvalue(np.eye(4)) == pytest.approx(1.0, abs=1e-12)
    assert max_eigenvalue(np.diag([3.0, -1.0])) == pytest.approx(3.0, abs=1e-12)
    m = projector([1, 0]) + projector([1, 1])
    assert max_eigenvalue(m) == pytest.approx(eig2_closed_form(m)[1], abs=1e-12)
    assert max_eigenvalue(m) == pytest.approx(1 + 1 / np.sqrt(2), abs=1e-12)
    with pytest.raises(NonHermitianInput):
        max_eigenvalue(np.array([[0, 1], [0, 0]]))


def test_dimension_one_rejected():
    with pytest.raises(UnsupportedDimension):
        DensityMatrix(np.array([[1.0]]))


def test_density_matrix_invariants():
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    h = HermitianUnitTrace(np.diag([1.5, -0.5]))
    assert h.min_eigenvalue == pytest.approx(-0.5)
    rng = np.random.default_rng(0)
    for d in range(2, 7):
        rho = random_density_matrix(d, rng)
        assert frobenius_norm(rho.matrix) <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_norm_identities(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    assert hs_norm_sq(a) == pytest.approx(frobenius_norm(a) ** 2, rel=1e-12)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    assert hs_norm_sq(q @ a) == pytest.approx(hs_norm_sq(a), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 10), seed=st.integers(0, 2**32 - 1))
def test_max_eigenvalue_matches_general_eigensolver(d, seed):
    h = random_hermitian(d, np.random.default_rng(seed))
    ref = np.max(np.linalg.eigvals(h).real)
    assert max_eigenvalue(h) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_matrix_json_roundtrip():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    doc = json.loads(json.dumps(matrix_to_json(m)))
    assert doc["dim"] == 3 and len(doc["entries"][0][0]) == 2
    assert np.array_equal(matrix_from_json(doc), m)
