"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from steertrust import bd_family, steering, tomography, trust
from steertrust.operators import build_basis, hs_norm_sq, random_density_matrix

from oracles import brute_lhs_qubit, random_qubit_functional

DATA = Path(__file__).resolve().parent.parent / "data"
DIMS = (2, 3, 4, 5)
EPSILONS = (1e-4, 1e-3, 1e-2, 5e-2, 1e-1)


@pytest.fixture(scope="module")
def fact1_grid():
    start = time.perf_counter()
    summaries = {
        (d, e): tomography.run_fact1_experiment(d, e, 1000, rng_seed=1000 * d)
        for d in DIMS
        for e in EPSILONS
    }
    return summaries, time.perf_counter() - start


def test_c01_qubit_local_bound(criterion):
    with criterion("C1 qubit local bound 1+1/sqrt(2) within 1e-9, runtime < 1 s"):
        start = time.perf_counter()
        f = steering.reference_qubit_functional()
        res = steering.lhs_bound(f)
        w = steering.evaluate(f, steering.reference_qubit_assemblage())
        elapsed = time.perf_counter() - start
        assert abs(res.beta_L - 1.707106781) <= 1e-9
        assert abs(res.beta_L - (1 + 1 / math.sqrt(2))) <= 1e-9
        assert abs(w - 1.707106781) <= 1e-9
        assert elapsed < 1.0


def test_c02_fact1_dominance(fact1_grid, criterion):
    summaries, elapsed = fact1_grid
    with criterion(f"C2 tomography bound holds on 4x5 grid x 1000 samples ({elapsed:.1f} s < 300 s)"):
        for (d, e), s in summaries.items():
            assert s.n_samples == 1000
            assert s.bound == pytest.approx(d**3 * (d * d - 1) * (e / 2 + math.sqrt(2 * d * e)) ** 2, rel=1e-14)
            assert s.violations == 0, f"d={d} eps={e}: {s.violations} violations"
            assert s.max_dev <= s.bound
        assert elapsed < 300


def test_c03_intermediate_inequalities(fact1_grid, criterion):
    summaries, _ = fact1_grid
    with criterion("C3 Re Tr(s_i t_i^dag) >= d - eps/2 and |Re Tr(t_i s_j^dag)| <= eps/2 + sqrt(2 d eps)"):
        for (d, e), s in summaries.items():
            assert s.rel1_violations == 0, f"d={d} eps={e}"
            assert s.rel2_violations == 0, f"d={d} eps={e}"
            assert s.min_self_overlap >= d - e / 2 - 1e-12
            assert s.max_cross_overlap <= e / 2 + math.sqrt(2 * d * e) + 1e-12


def test_c04_fact2_dominance(criterion):
    with criterion("C4 empirical corrected bound <= beta_L + N d^2 sqrt(d)(eps/2+sqrt(2 d eps)); 4.02642 at eps=0.01"):
        f = steering.reference_qubit_functional()
        a = steering.reference_qubit_assemblage()
        assert steering.normalization_constant(f, a) == pytest.approx(2.0, abs=1e-12)
        beta = 1 + 1 / math.sqrt(2)
        for e in (0.001, 0.01, 0.05):
            r = steering.empirical_corrected_bound(f, a, e, 2000, rng_seed=17)
            analytic = beta + 2 * 4 * math.sqrt(2) * (e / 2 + math.sqrt(4 * e))
            assert r.beta_L_corr == pytest.approx(analytic, abs=1e-12)
            assert r.violations == 0
            assert r.empirical_max <= analytic
        assert abs(steering.corrected_local_bound(f, 0.01).beta_L_corr - 4.02642) <= 1e-5


def test_c05_bd_closed_forms(criterion):
    with criterion("C5 B_d beta_L = sqrt(2)(d-1), beta_Q = 2(d-1) for d <= 64; ratio(eps=0) = 1/sqrt(2) within 1e-12"):
        for d in range(2, 65):
            b = bd_family.bd_bounds(d, 0.0)
            assert b.beta_L == math.sqrt(2) * (d - 1)
            assert b.beta_Q == 2 * (d - 1)
            assert b.beta_L_corr == b.beta_L
            assert abs(b.ratio - 1 / math.sqrt(2)) <= 1e-12
            # the written value 0.707106781 carries 9 decimals
            assert abs(b.ratio - 0.707106781) <= 5e-10


def test_c06a_fig2_thresholds(criterion):
    with criterion("C6a trust thresholds 0.965685 (d=5), 0.982843 (d=10), 0.991421 (d=20) within 1e-6"):
        for d, want in ((5, 0.965685), (10, 0.982843), (20, 0.991421)):
            assert abs(bd_family.bd_trust_threshold(d) - want) <= 1e-6
        assert bd_family.bd_trust_threshold(5) > 0.95
        assert bd_family.bd_trust_threshold(10) > 0.98
        assert bd_family.bd_trust_threshold(20) > 0.99


def test_c06b_raw_ratio_exceeds_one(criterion):
    with criterion("C6b raw ratio at (d=10, gamma=0.98) exceeds 1"):
        row = bd_family.bd_curve([10], [0.98])[0]
        assert row.ratio_raw > 1 and row.ratio_clamped == 1.0


def test_c06c_raw_ratio_stated_value(criterion):
    with criterion("C6c raw ratio at (d=10, gamma=0.98) equals 1.02338 within 1e-5"):
        row = bd_family.bd_curve([10], [0.98])[0]
        assert abs(row.ratio_raw - 1.02338) <= 1e-5, f"ratio_raw = {row.ratio_raw:.7f}"


def test_c07_trust_quantifier(criterion):
    with criterion("C7 trust = 1 on identical bases, 0 for {Z,X,Y}->{X,Y,Z}, fidelity 0.96 -> mean deviation 0.16"):
        for d in range(2, 9):
            b = build_basis(d)
            assert trust.trust_from_deviations(b, b.elements).gamma == 1.0
        p = build_basis(2, "pauli").elements
        x, y, z = p[1], p[2], p[3]
        assert abs(trust.trust_from_deviations([z, x, y], [x, y, z], k=3).gamma) <= 1e-12
        assert abs(trust.trust_from_fidelity(0.96, 2).epsilon - 0.16) <= 1e-12


def test_c08_oracle_equivalence(criterion):
    with criterion("C8 lhs_bound == grid brute force (10^4 points per level x 4 strategies) within 1e-6 on 50 functionals, < 60 s"):
        rng = np.random.default_rng(2024)
        sc = steering.SteeringScenario(2, 2, 2)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(50):
            F = random_qubit_functional(rng)
            exact = steering.lhs_bound(steering.SteeringFunctional(sc, F)).beta_L
            worst = max(worst, abs(exact - brute_lhs_qubit(F, points=100)))
        assert worst <= 1e-6, f"worst gap {worst:.3g}"
        assert time.perf_counter() - start < 60


def _no_signaling_assemblage(d, n_in, n_out, rng):
    """Random assemblage with a hidden-state model, hence no-signaling."""
    members = np.zeros((n_in, n_out, d, d), dtype=complex)
    weights = rng.dirichlet(np.ones(6))
    for q in weights:
        state = random_density_matrix(d, rng).matrix
        resp = rng.dirichlet(np.ones(n_out), size=n_in)
        members += q * resp[:, :, None, None] * state
    return steering.Assemblage(steering.SteeringScenario(d, n_in, n_out), members)


def test_c09_property_suite(criterion):
    with criterion("C9 orthogonality, ||s_j - s_i|| = 2d, zero-error round trip, no-signaling preserved, d <= 8"):
        rng = np.random.default_rng(9)
        for d in range(2, 9):
            basis = tomography.default_basis(d)
            els = basis.elements
            gram = np.einsum("iab,jab->ij", els, els.conj())
            assert np.max(np.abs(gram - d * np.eye(d * d))) <= 1e-10
            for i in range(0, d * d, max(1, d // 2)):
                for j in range(d * d):
                    if i != j:
                        assert abs(hs_norm_sq(els[j] - els[i]) - 2 * d) <= 1e-10
            exact = trust.perturb_basis(basis, 0.0, 0)
            for _ in range(10):
                rho = random_density_matrix(d, rng)
                out = tomography.imprecise_tomography(rho, exact)
                assert np.max(np.abs(out.inferred_state.matrix - rho.matrix)) <= 1e-10
            a = _no_signaling_assemblage(d, 3, 2, rng)
            device = trust.perturb_basis(basis, 0.05, d)
            inferred = tomography.infer_operators(
                a.members.reshape(-1, d, d), basis, device.actual
            ).reshape(a.members.shape)
            assert steering.no_signaling_error(inferred) <= 1e-10


CLI_RUNS = [
    ["tomography", "--dim", "3", "--epsilon", "0.02", "--samples", "200", "--seed", "11"],
    ["tomography", "--dim", "2", "--epsilon", "0.01", "--samples", "50", "--seed", "3", "--format", "csv"],
    ["lhs-bound", "--functional", str(DATA / "qubit_functional.json")],
    ["corrected-bound", "--functional", str(DATA / "qubit_functional.json"), "--epsilon", "0.01"],
    ["empirical-bound", "--functional", str(DATA / "qubit_functional.json"), "--gamma", "0.99",
     "--samples", "200", "--seed", "5"],
    ["bd-curve", "--dims", "2,5,10,20", "--gamma", "0.90:1.00:0.001"],
    ["bd-threshold", "--dims", "2:30"],
    ["trust", "--dim", "3", "--epsilon", "0.1", "--seed", "9"],
]


def test_c10_reproducibility(criterion, tmp_path):
    with criterion("C10 identical CLI invocations produce byte-identical output"):
        for n, argv in enumerate(CLI_RUNS):
            blobs = []
            for rep in range(2):
                target = tmp_path / f"run{n}_{rep}.out"
                proc = subprocess.run(
                    [sys.executable, "-m", "steertrust", *argv, "--out", str(target)],
                    capture_output=True,
                )
                assert proc.returncode == 0, proc.stderr.decode()
                blobs.append(target.read_bytes())
            assert blobs[0] == blobs[1] and blobs[0], " ".join(argv)
