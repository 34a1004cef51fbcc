"""Dense operator primitives: norms, eigenvalues, states and unitary bases.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` indexed
``A[row, column]``. The Hilbert-Schmidt "norm" used throughout the package
is the *squared* Frobenius norm ``Tr(A A^dagger)``; :func:`frobenius_norm`
is its square root.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NonHermitianInput,
    UnsupportedDimension,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_SLACK = 1e-10
CONSTRUCTION_TOL = 1e-10

PAULI = "pauli"
HEISENBERG_WEYL = "heisenberg-weyl"
BASIS_LABELS = (PAULI, HEISENBERG_WEYL)


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a complex ``(d, d)`` array with ``d >= 2``."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 2:
        raise UnsupportedDimension(f"{name} has dimension {m.shape[0]}; need d >= 2")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermiticity_error(a: np.ndarray) -> float:
    """Max entrywise ``|A - A^dagger|``."""
    return float(np.max(np.abs(a - dagger(a))))


def hs_norm_sq(a) -> float:
    """``Tr(A A^dagger)``, the squared Frobenius norm."""
    m = np.asarray(a, dtype=np.complex128)
    return float(np.sum(m.real**2 + m.imag**2))


def frobenius_norm(a) -> float:
    return float(np.sqrt(hs_norm_sq(a)))


def hs_inner(a, b) -> complex:
    """``Tr(A B^dagger)``."""
    return complex(np.vdot(np.asarray(b), np.asarray(a)))


def max_eigenvalue(a, tol: float = CONSTRUCTION_TOL) -> float:
    """Largest eigenvalue of a Hermitian matrix.

    The input is symmetrized as ``(A + A^dagger) / 2`` before diagonalization;
    inputs further than `tol` from Hermitian raise :class:`NonHermitianInput`.
    """
    m = as_square_matrix(a)
    err = hermiticity_error(m)
    if err > tol:
        raise NonHermitianInput(f"matrix is not Hermitian (max |A - A^dagger| = {err:.3g})")
    return float(np.linalg.eigvalsh(0.5 * (m + dagger(m)))[-1])


def top_eigenvector(a) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its unit eigenvector with a fixed phase.

    The phase is chosen so the first component of magnitude above 1e-12 is
    real and positive, which makes the vector reproducible across LAPACK builds.
    """
    m = as_square_matrix(a)
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    vec = v[:, -1]
    pivot = np.flatnonzero(np.abs(vec) > 1e-12)[0]
    vec = vec * (np.abs(vec[pivot]) / vec[pivot])
    return float(w[-1]), vec


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square_matrix(self.matrix, "density matrix")
        err = hermiticity_error(m)
        if err > HERMITIAN_TOL:
            raise InvalidState(f"density matrix not Hermitian (error {err:.3g})")
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"density matrix trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PSD_SLACK:
            raise InvalidState(f"density matrix has negative eigenvalue {lo:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, vec) -> "DensityMatrix":
        return cls(projector(vec))


@dataclass(frozen=True, eq=False)
class HermitianUnitTrace:
    """Hermitian unit-trace operator that may fail to be positive.

    Imprecise tomography produces these: the inferred operator keeps
    Hermiticity and normalization but not necessarily positivity.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_square_matrix(self.matrix, "operator")
        err = hermiticity_error(m)
        if err > HERMITIAN_TOL:
            raise InvalidState(f"operator not Hermitian (error {err:.3g})")
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1.0) > CONSTRUCTION_TOL:
            raise InvalidState(f"operator trace is {tr!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def random_density_matrix(d: int, rng: np.random.Generator) -> DensityMatrix:
    """Sample from the Hilbert-Schmidt measure: ``G G^dagger / Tr(G G^dagger)``."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def is_unitary(u, tol: float = CONSTRUCTION_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u @ dagger(u) - np.eye(u.shape[0]))) <= tol)


@dataclass(frozen=True, eq=False)
class UnitaryBasis:
    """Tomographically complete, Hilbert-Schmidt orthogonal unitary basis.

    ``elements`` has shape ``(d*d, d, d)``; ``elements[0]`` is the identity
    and ``Tr(elements[i] elements[j]^dagger) = d * delta_ij``.
    """

    dim: int
    elements: np.ndarray
    label: str

    def __post_init__(self):
        d = self.dim
        els = np.asarray(self.elements, dtype=np.complex128)
        if els.shape != (d * d, d, d):
            raise DimensionMismatch(f"expected {d * d} elements of size {d}x{d}, got {els.shape}")
        if np.max(np.abs(els[0] - np.eye(d))) > CONSTRUCTION_TOL:
            raise InvalidState("first basis element must be the identity")
        for u in els:
            if not is_unitary(u):
                raise InvalidState("basis element is not unitary")
        gram = np.einsum("iab,jab->ij", els, els.conj())
        if np.max(np.abs(gram - d * np.eye(d * d))) > CONSTRUCTION_TOL:
            raise InvalidState("basis is not Hilbert-Schmidt orthogonal")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.elements[i]


@dataclass(frozen=True, eq=False)
class ClockShiftPair:
    """Clock ``Z = sum_i w^i |i><i|`` and shift ``X = sum_i |i+1><i|``."""

    dim: int
    Z: np.ndarray
    X: np.ndarray
    omega: complex


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise UnsupportedDimension(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def build_clock_shift(d: int) -> ClockShiftPair:
    d = _check_dim(d)
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)
    z.setflags(write=False)
    x.setflags(write=False)
    return ClockShiftPair(d, z, x, complex(omega))


def build_basis(d: int, label: str = HEISENBERG_WEYL) -> UnitaryBasis:
    """Pauli basis ``(I, X, Y, Z)`` for ``d = 2`` or Heisenberg-Weyl ``X^a Z^b``.

    Heisenberg-Weyl elements are ordered by ``(a, b)`` lexicographically, so
    ``(0, 0)``, the identity, comes first.
    """
    d = _check_dim(d)
    if label == PAULI:
        if d != 2:
            raise UnsupportedDimension("the Pauli basis exists only for d = 2")
        els = np.array(
            [[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
            dtype=np.complex128,
        )
    elif label == HEISENBERG_WEYL:
        cs = build_clock_shift(d)
        xp = [np.linalg.matrix_power(cs.X, a) for a in range(d)]
        zp = [np.linalg.matrix_power(cs.Z, b) for b in range(d)]
        els = np.array([xp[a] @ zp[b] for a in range(d) for b in range(d)])
    else:
        raise UnsupportedDimension(f"unknown basis label {label!r}; choose from {BASIS_LABELS}")
    return UnitaryBasis(d, els, label)


def matrix_to_json(a) -> dict:
    """Row-major ``{"dim": d, "entries": [[[re, im], ...], ...]}``."""
    m = np.asarray(a, dtype=np.complex128)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        d = int(obj["dim"])
        entries = np.asarray(obj["entries"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed matrix object: {exc}") from exc
    if entries.shape != (d, d, 2):
        raise DimensionMismatch(f"matrix entries have shape {entries.shape}, expected ({d}, {d}, 2)")
    return as_square_matrix(entries[..., 0] + 1j * entries[..., 1])


def check_same_dims(mats: Sequence[np.ndarray], d: int, what: str = "operator") -> None:
    for m in mats:
        if np.shape(m) != (d, d):
            raise DimensionMismatch(f"{what} has shape {np.shape(m)}, expected ({d}, {d})")
