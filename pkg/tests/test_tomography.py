import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steertrust import kernels
from steertrust.errors import DimensionMismatch
from steertrust.operators import PAULI, DensityMatrix, build_basis, hs_norm_sq, random_density_matrix
from steertrust.tomography import (
    coefficient_error_bound,
    decompose,
    default_basis,
    fact1_deviation_bound,
    imprecise_tomography,
    run_fact1_experiment,
)
from steertrust.trust import perturb_basis

from oracles import naive_infer


def test_decompose_examples():
    for d in range(2, 6):
        c = decompose(np.eye(d) / d, build_basis(d))
        assert np.allclose(c.coeffs, np.eye(d * d)[0] / d, atol=1e-15)
    c = decompose(DensityMatrix(np.diag([1.0, 0.0])), build_basis(2, PAULI))
    assert np.allclose(c.coeffs, [0.5, 0, 0, 0.5], atol=1e-15)
    with pytest.raises(DimensionMismatch):
        decompose(np.eye(3) / 3, build_basis(2))


@pytest.mark.parametrize("d", range(2, 9))
def test_round_trip(d):
    rng = np.random.default_rng(d)
    basis = default_basis(d)
    for _ in range(100 if d <= 6 else 20):
        rho = random_density_matrix(d, rng)
        c = decompose(rho, basis)
        assert abs(c.coeffs[0] - 1 / d) < 1e-12
        assert np.all(np.abs(c.coeffs.real) <= 1)
        assert np.max(np.abs(c.recompose(basis) - rho.matrix)) < 1e-10


def test_pauli_coefficients_are_real():
    rng = np.random.default_rng(0)
    c = decompose(random_density_matrix(2, rng), build_basis(2, PAULI))
    assert np.max(np.abs(c.coeffs.imag)) < 1e-15


@pytest.mark.parametrize(
    "d,eps,expected",
    [
        (3, 0.0, 0.0),
        # 2^3 * 3 * (0.005 + sqrt(0.04))^2 = 24 * 0.205^2
        (2, 0.01, 1.0086),
        # 27 * 8 * (0.05 + sqrt(0.6))^2
        (3, 0.1, 27 * 8 * (0.05 + 0.7745966692414834) ** 2),
    ],
)
def test_fact1_bound_values(d, eps, expected):
    assert fact1_deviation_bound(d, eps) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_fact1_bound_monotone_on_grid():
    eps_grid = np.round(np.arange(0, 0.1001, 0.001), 6)
    table = np.array([[fact1_deviation_bound(d, e) for e in eps_grid] for d in range(2, 11)])
    assert np.all(np.diff(table, axis=1) > 0)
    assert np.all(np.diff(table[:, 1:], axis=0) > 0)


def test_zero_error_reconstructs_exactly():
    rng = np.random.default_rng(1)
    for d in (2, 3, 5):
        rho = random_density_matrix(d, rng)
        out = imprecise_tomography(rho, perturb_basis(default_basis(d), 0.0, 0))
        assert np.max(np.abs(out.inferred_state.matrix - rho.matrix)) < 1e-12
        assert out.deviation < 1e-24 and out.fact1_bound == 0.0


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 5), eps=st.floats(1e-6, 0.3), seed=st.integers(0, 2**31))
def test_single_shot_bounds(d, eps, seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(d, rng)
    pb = perturb_basis(default_basis(d), eps, seed)
    out = imprecise_tomography(rho, pb)
    assert out.deviation <= out.fact1_bound
    assert out.coefficient_error <= coefficient_error_bound(d, out.epsilon_used)
    inf = out.inferred_state.matrix
    assert np.max(np.abs(inf - inf.conj().T)) < 1e-10
    assert abs(np.trace(inf) - 1) < 1e-10
    assert out.deviation == pytest.approx(hs_norm_sq(inf - rho.matrix), abs=1e-15)


@pytest.mark.parametrize("name", sorted(kernels.implementations()))
def test_kernel_matches_loop_oracle(name):
    impl = kernels.implementations()[name]
    rng = np.random.default_rng(9)
    for d in (2, 3, 4):
        basis = default_basis(d)
        rhos, taus = [], []
        for s in range(4):
            rhos.append(random_density_matrix(d, rng).matrix)
            taus.append(perturb_basis(basis, 0.05, s).actual)
        inferred, dev, *_ = impl.fact1_statistics(np.array(rhos), basis.elements, np.array(taus))
        for n in range(4):
            ref = naive_infer(rhos[n], basis.elements, taus[n])
            assert np.max(np.abs(inferred[n] - ref)) < 1e-13
            assert dev[n] == pytest.approx(np.sum(np.abs(ref - rhos[n]) ** 2), abs=1e-14)


def test_backends_agree_on_statistics():
    impls = kernels.implementations()
    if len(impls) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(4)
    d = 4
    basis = default_basis(d)
    rhos = np.array([random_density_matrix(d, rng).matrix for _ in range(6)])
    taus = np.array([perturb_basis(basis, 0.1, s).actual for s in range(6)])
    for a, b in zip(
        impls["python"].fact1_statistics(rhos, basis.elements, taus),
        impls["compiled"].fact1_statistics(rhos, basis.elements, taus),
    ):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


def test_experiment_zero_error():
    s = run_fact1_experiment(3, 0.0, 10, 0)
    assert s.max_dev < 1e-24 and s.violations == 0 and s.bound == 0.0


def test_experiment_qubit():
    s = run_fact1_experiment(2, 0.01, 1000, 1)
    assert s.violations == 0
    assert s.rel1_violations == 0 and s.rel2_violations == 0 and s.coefficient_violations == 0
    assert 0 < s.slack_ratio < 1
    assert len(s.deviations) == 1000


def test_experiment_independent_of_threads_and_chunks():
    a = run_fact1_experiment(3, 0.02, 60, 5, threads=1, chunk=7)
    b = run_fact1_experiment(3, 0.02, 60, 5, threads=3, chunk=25)
    assert np.array_equal(a.deviations, b.deviations)


def test_mean_deviation_grows_with_epsilon():
    means = [run_fact1_experiment(3, e, 200, 0).mean_dev for e in (1e-4, 1e-3, 1e-2, 5e-2, 1e-1)]
    assert np.all(np.diff(means) > 0)
