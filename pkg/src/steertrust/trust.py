"""Trust in the characterized party's measurement device.

The trust parameter compares the observables Alice intends to measure with
those her device actually performs::

    gamma = 1 - sum_i ||sigma_i - tau_i|| / (2 d k)

where ``||A|| = Tr(A A^dagger)``. The samplers here produce unitary
"actual" observables at a prescribed deviation for Monte-Carlo studies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, LengthMismatch, OutOfRange, TargetUnreachable
from .operators import (
    UnitaryBasis,
    as_square_matrix,
    dagger,
    hs_norm_sq,
    is_unitary,
    matrix_to_json,
)


@dataclass(frozen=True)
class TrustReport:
    dim: int
    k: int
    epsilon: float
    gamma: float
    f_avg: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k": self.k,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "f_avg": self.f_avg,
        }


def gamma_from_epsilon(epsilon: float, d: int) -> float:
    """Trust for a uniform per-observable deviation: ``1 - eps / (2d)``."""
    return 1.0 - epsilon / (2.0 * d)


def epsilon_from_gamma(gamma: float, d: int) -> float:
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma must lie in [0, 1], got {gamma}")
    return 2.0 * d * (1.0 - gamma)


def trust_from_deviations(ideal, actual, k: Optional[int] = None) -> TrustReport:
    """Trust parameter from the realized deviations of a device.

    `k` defaults to the number of observables. The result is clamped to
    ``[0, 1]``; ``epsilon`` is the largest single deviation.
    """
    ideal = list(ideal.elements if isinstance(ideal, UnitaryBasis) else ideal)
    actual = list(actual)
    if len(ideal) != len(actual):
        raise LengthMismatch(f"{len(ideal)} ideal observables but {len(actual)} actual ones")
    if not ideal:
        raise LengthMismatch("need at least one observable")
    d = as_square_matrix(ideal[0]).shape[0]
    devs = []
    for s, t in zip(ideal, actual):
        s = as_square_matrix(s)
        t = as_square_matrix(t)
        if s.shape != (d, d) or t.shape != (d, d):
            raise DimensionMismatch("all observables must share one dimension")
        devs.append(hs_norm_sq(s - t))
    if k is None:
        k = len(ideal)
    if k < 1:
        raise OutOfRange(f"k must be positive, got {k}")
    gamma = 1.0 - sum(devs) / (2.0 * d * k)
    return TrustReport(d, int(k), float(max(devs)), float(min(1.0, max(0.0, gamma))))


def trust_from_fidelity(f_avg: float, d: int, k: int = 1) -> TrustReport:
    """Trust from an average measurement fidelity.

    The mean deviation per observable is ``2 d (1 - f_avg)`` and the trust
    parameter equals ``f_avg``; the mean deviation is stored as ``epsilon``.
    """
    if not 0.0 <= f_avg <= 1.0:
        raise OutOfRange(f"f_avg must lie in [0, 1], got {f_avg}")
    return TrustReport(int(d), int(k), 2.0 * d * (1.0 - f_avg), float(f_avg), float(f_avg))


def _random_directions(count: int, d: int, rng: np.random.Generator):
    """Eigen-decomposed GUE directions normalized to unit Frobenius norm."""
    g = rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))
    h = 0.5 * (g + dagger(g))
    h /= np.sqrt(np.sum(np.abs(h) ** 2, axis=(1, 2)))[:, None, None]
    return np.linalg.eigh(h)


def _perturb_many(us: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Apply ``exp(i theta H)`` on the left of every unitary in `us`.

    ``||U - exp(i theta H) U|| = sum_k 4 sin^2(theta h_k / 2)`` for the
    eigenvalues ``h_k`` of ``H``, so ``theta`` is calibrated on that scalar
    function. Directions whose monotone branch cannot reach `epsilon` fall
    back to a global phase, which reaches every value up to ``4d``.
    """
    count, d, _ = us.shape
    if epsilon == 0.0 or count == 0:
        return us.copy()
    w, vecs = _random_directions(count, d, rng)
    theta = kernels.calibrate_angles(w, np.full(count, float(epsilon)))
    stuck = np.isnan(theta)
    if np.any(stuck):
        w[stuck] = 1.0 / np.sqrt(d)
        vecs[stuck] = np.eye(d)
        theta[stuck] = kernels.calibrate_angles(w[stuck], np.full(int(stuck.sum()), float(epsilon)))
    phases = np.exp(1j * theta[:, None] * w)
    v = np.einsum("nak,nk,nbk->nab", vecs, phases, vecs.conj())
    return v @ us


def perturb_unitary(u, epsilon_target: float, rng_seed: int) -> np.ndarray:
    """Unitary ``tau`` with ``||U - tau||`` in ``[0.999 eps, eps]``.

    Deterministic for a given seed. Raises :class:`TargetUnreachable` when
    the target exceeds ``4d``, the largest distance between two unitaries.
    """
    u = as_square_matrix(u)
    d = u.shape[0]
    if epsilon_target < 0 or epsilon_target > 4 * d:
        raise TargetUnreachable(f"epsilon {epsilon_target} outside [0, {4 * d}] for d = {d}")
    rng = np.random.default_rng(rng_seed)
    return _perturb_many(u[None], float(epsilon_target), rng)[0]


@dataclass(frozen=True, eq=False)
class PerturbedBasis:
    """Ideal basis with the observables a device actually measures."""

    ideal: UnitaryBasis
    actual: np.ndarray
    deviations: np.ndarray
    epsilon: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        act = np.asarray(self.actual, dtype=np.complex128)
        if act.shape != self.ideal.elements.shape:
            raise DimensionMismatch(f"actual observables have shape {act.shape}")
        if np.any(act[0] != self.ideal.elements[0]):
            raise DimensionMismatch("identity observable must be implemented exactly")
        act.setflags(write=False)
        object.__setattr__(self, "actual", act)

    @property
    def dim(self) -> int:
        return self.ideal.dim

    def trust(self, k: Optional[int] = None) -> TrustReport:
        return trust_from_deviations(self.ideal, self.actual, k)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "label": self.ideal.label,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "ideal": [matrix_to_json(m) for m in self.ideal.elements],
            "actual": [matrix_to_json(m) for m in self.actual],
            "deviations": [float(x) for x in self.deviations],
        }


def sample_actual(basis: UnitaryBasis, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Perturb every non-identity element of `basis` at `epsilon`; array form."""
    d = basis.dim
    if epsilon < 0 or epsilon > 4 * d:
        raise TargetUnreachable(f"epsilon {epsilon} outside [0, {4 * d}] for d = {d}")
    out = np.array(basis.elements)
    out[1:] = _perturb_many(basis.elements[1:], float(epsilon), rng)
    return out


def perturb_basis(basis: UnitaryBasis, epsilon: float, rng_seed: int) -> PerturbedBasis:
    rng = np.random.default_rng(rng_seed)
    actual = sample_actual(basis, epsilon, rng)
    devs = np.array([hs_norm_sq(s - t) for s, t in zip(basis.elements, actual)])
    return PerturbedBasis(basis, actual, devs, float(epsilon), rng_seed)


def perturbed_basis_from_actual(basis: UnitaryBasis, actual: Sequence) -> PerturbedBasis:
    """Wrap externally supplied observables; each must be unitary."""
    actual = np.asarray(actual, dtype=np.complex128)
    for t in actual:
        if not is_unitary(t):
            raise DimensionMismatch("actual observable is not unitary")
    devs = np.array([hs_norm_sq(s - t) for s, t in zip(basis.elements, actual)])
    return PerturbedBasis(basis, actual, devs, float(devs.max()), None)
