"""Qudit state tomography with ideal and imprecise unitary observables.

A state is expanded as ``rho = sum_i r_i sigma_i`` with
``r_i = Tr(rho sigma_i^dagger) / d``. A device that measures ``tau_i``
instead of ``sigma_i`` reports ``q_i = Tr(rho tau_i^dagger) / d``, and the
experimenter, believing the ideal basis was used, infers
``rho_inf = sum_i q_i sigma_i``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, OutOfRange
from .operators import (
    HEISENBERG_WEYL,
    PAULI,
    DensityMatrix,
    HermitianUnitTrace,
    UnitaryBasis,
    build_basis,
    random_density_matrix,
)
from .trust import PerturbedBasis, sample_actual

# absolute slack for floating-point noise when checking analytic inequalities
CHECK_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    dim: int
    coeffs: np.ndarray
    basis_label: str

    def recompose(self, basis: UnitaryBasis) -> np.ndarray:
        return np.einsum("i,iab->ab", self.coeffs, basis.elements)


@dataclass(frozen=True, eq=False)
class TomographyOutcome:
    true_state: DensityMatrix
    inferred_state: HermitianUnitTrace
    deviation: float
    fact1_bound: float
    epsilon_used: float
    coefficient_error: float = 0.0


def default_basis(d: int) -> UnitaryBasis:
    """Pauli basis for qubits, Heisenberg-Weyl otherwise."""
    return build_basis(d, PAULI if d == 2 else HEISENBERG_WEYL)


def decompose(rho, basis: UnitaryBasis) -> CoefficientVector:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if m.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"state has shape {m.shape}, basis has d = {basis.dim}")
    coeffs = np.einsum("ab,iab->i", m, basis.elements.conj()) / basis.dim
    return CoefficientVector(basis.dim, coeffs, basis.label)


def coefficient_gap(d: int, epsilon: float) -> float:
    """``eps/2 + sqrt(2 d eps)``: bound on ``|Re Tr(tau_i sigma_j^dagger)|``, ``i != j``."""
    return epsilon / 2.0 + math.sqrt(2.0 * d * epsilon)


def coefficient_error_bound(d: int, epsilon: float) -> float:
    """Bound on ``|Re r_i - Re q_i|`` for every coefficient."""
    return d * coefficient_gap(d, epsilon)


def fact1_deviation_bound(d: int, epsilon: float) -> float:
    """Upper bound on ``||rho_inf - rho||``: ``d^3 (d^2-1) (eps/2 + sqrt(2 d eps))^2``."""
    if epsilon < 0:
        raise OutOfRange(f"epsilon must be nonnegative, got {epsilon}")
    if d < 2:
        raise OutOfRange(f"dimension must be >= 2, got {d}")
    return d**3 * (d * d - 1) * coefficient_gap(d, epsilon) ** 2


def infer_operators(ops, basis: UnitaryBasis, actual) -> np.ndarray:
    """Reconstruct each operator in `ops` (shape ``(n, d, d)``) from one device.

    The reconstruction is linear, so subnormalized assemblage members can be
    passed directly: ``infer(p rho) = p infer(rho)``.
    """
    ops = np.asarray(ops, dtype=np.complex128)
    taus = np.broadcast_to(np.asarray(actual), (ops.shape[0],) + basis.elements.shape)
    return kernels.fact1_statistics(ops, basis.elements, taus)[0]


def imprecise_tomography(rho: DensityMatrix, pb: PerturbedBasis) -> TomographyOutcome:
    if rho.dim != pb.dim:
        raise DimensionMismatch(f"state has d = {rho.dim}, device has d = {pb.dim}")
    inferred, dev, coef, *_ = kernels.fact1_statistics(
        rho.matrix[None], pb.ideal.elements, pb.actual[None]
    )
    eps = float(np.max(pb.deviations))
    return TomographyOutcome(
        true_state=rho,
        inferred_state=HermitianUnitTrace(inferred[0]),
        deviation=float(dev[0]),
        fact1_bound=fact1_deviation_bound(pb.dim, eps),
        epsilon_used=eps,
        coefficient_error=float(coef[0]),
    )


@dataclass
class Fact1Summary:
    d: int
    epsilon: float
    n_samples: int
    seed: int
    max_dev: float
    mean_dev: float
    bound: float
    violations: int
    slack_ratio: float
    coefficient_violations: int = 0
    rel1_violations: int = 0
    rel2_violations: int = 0
    max_coefficient_error: float = 0.0
    min_self_overlap: float = 0.0
    max_cross_overlap: float = 0.0
    deviations: np.ndarray = field(default=None, repr=False)

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "deviations"}
        return out


def _draw_samples(d, epsilon, basis, seeds):
    rhos = np.empty((len(seeds), d, d), dtype=np.complex128)
    taus = np.empty((len(seeds),) + basis.elements.shape, dtype=np.complex128)
    for n, s in enumerate(seeds):
        rng = np.random.default_rng(s)
        rhos[n] = random_density_matrix(d, rng).matrix
        taus[n] = sample_actual(basis, epsilon, rng)
    return rhos, taus


def run_fact1_experiment(
    d: int,
    epsilon: float,
    n_samples: int,
    rng_seed: int = 0,
    basis: UnitaryBasis | None = None,
    threads: int = 1,
    chunk: int = 250,
) -> Fact1Summary:
    """Monte-Carlo check of the tomography deviation bound.

    Sample ``n`` uses the generator seeded with ``rng_seed + n`` to draw a
    Hilbert-Schmidt random state and then the perturbed device, so results do
    not depend on `threads` or `chunk`.
    """
    if n_samples < 1:
        raise OutOfRange("n_samples must be >= 1")
    basis = basis or default_basis(d)
    if basis.dim != d:
        raise DimensionMismatch("basis dimension differs from d")
    seeds = [rng_seed + n for n in range(n_samples)]
    blocks = [seeds[i:i + chunk] for i in range(0, n_samples, chunk)]

    def work(block):
        rhos, taus = _draw_samples(d, epsilon, basis, block)
        return kernels.fact1_statistics(rhos, basis.elements, taus)[1:]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    dev, coef, smin, smax, cross = (np.concatenate(p) for p in zip(*parts))

    bound = fact1_deviation_bound(d, epsilon)
    gap = coefficient_gap(d, epsilon)
    rel1 = (smin < d - epsilon / 2 - CHECK_SLACK) | (smax > d + CHECK_SLACK)
    max_dev = float(dev.max())
    return Fact1Summary(
        d=d,
        epsilon=float(epsilon),
        n_samples=n_samples,
        seed=rng_seed,
        max_dev=max_dev,
        mean_dev=float(dev.mean()),
        bound=bound,
        violations=int(np.sum(dev > bound + CHECK_SLACK)),
        slack_ratio=max_dev / bound if bound > 0 else 0.0,
        coefficient_violations=int(np.sum(coef > d * gap + CHECK_SLACK)),
        rel1_violations=int(np.sum(rel1)),
        rel2_violations=int(np.sum(cross > gap + CHECK_SLACK)),
        max_coefficient_error=float(coef.max()),
        min_self_overlap=float(smin.min()),
        max_cross_overlap=float(cross.max()),
        deviations=dev,
    )
