"""Steering scenarios, functionals, local bounds and their trust corrections.

Assemblage members and functional coefficients are stored as arrays of
shape ``(n_inputs, n_outcomes, d, d)`` indexed ``[y, b]``; the accessors
take ``(b, y)`` in the usual order. Outcomes and inputs are 0-based.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    InvalidState,
    NonHermitianInput,
    NonRealValue,
    OutOfRange,
    ScenarioMismatch,
    SteeringError,
)
from .operators import (
    CONSTRUCTION_TOL,
    DensityMatrix,
    UnitaryBasis,
    dagger,
    matrix_from_json,
    matrix_to_json,
    projector,
    top_eigenvector,
)
from .tomography import coefficient_gap, default_basis, infer_operators
from .trust import sample_actual

MAX_STRATEGIES = 10**7
TIE_TOL = 1e-12


class FormatError(SteeringError):
    """Malformed functional or assemblage document."""


@dataclass(frozen=True)
class SteeringScenario:
    d_alice: int
    n_inputs: int
    n_outcomes: int

    def __post_init__(self):
        if self.d_alice < 2 or self.n_outcomes < 2 or self.n_inputs < 1:
            raise OutOfRange(f"invalid scenario {self}")

    @property
    def shape(self) -> tuple:
        return (self.n_inputs, self.n_outcomes, self.d_alice, self.d_alice)

    def as_dict(self) -> dict:
        return {"d_alice": self.d_alice, "n_inputs": self.n_inputs, "n_outcomes": self.n_outcomes}


def _stack(scenario: SteeringScenario, ops, what: str) -> np.ndarray:
    arr = np.asarray(ops, dtype=np.complex128)
    if arr.shape != scenario.shape:
        raise ScenarioMismatch(f"{what} has shape {arr.shape}, scenario needs {scenario.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class SteeringFunctional:
    scenario: SteeringScenario
    coefficients: np.ndarray

    def __post_init__(self):
        f = _stack(self.scenario, self.coefficients, "functional")
        err = np.max(np.abs(f - dagger(f)))
        if err > CONSTRUCTION_TOL:
            raise NonHermitianInput(f"coefficient matrices are not Hermitian (error {err:.3g})")
        f = 0.5 * (f + dagger(f))
        f.setflags(write=False)
        object.__setattr__(self, "coefficients", f)

    def F(self, b: int, y: int) -> np.ndarray:
        return self.coefficients[y, b]

    @classmethod
    def from_dict(cls, scenario: SteeringScenario, entries: dict) -> "SteeringFunctional":
        return cls(scenario, _fill(scenario, entries))


@dataclass(frozen=True, eq=False)
class Assemblage:
    """Subnormalized Alice-side states ``sigma_{b|y}``.

    Construction checks Hermiticity, positivity, per-input normalization and
    no-signaling, each within 1e-10.
    """

    scenario: SteeringScenario
    members: np.ndarray

    def __post_init__(self):
        s = _stack(self.scenario, self.members, "assemblage")
        err = np.max(np.abs(s - dagger(s)))
        if err > CONSTRUCTION_TOL:
            raise InvalidState(f"assemblage members are not Hermitian (error {err:.3g})")
        s = 0.5 * (s + dagger(s))
        if np.min(np.linalg.eigvalsh(s)) < -CONSTRUCTION_TOL:
            raise InvalidState("assemblage member is not positive semidefinite")
        check_normalization(s)
        check_no_signaling(s)
        s.setflags(write=False)
        object.__setattr__(self, "members", s)

    def sigma(self, b: int, y: int) -> np.ndarray:
        return self.members[y, b]

    def probabilities(self) -> np.ndarray:
        """``p[y, b] = Tr(sigma_{b|y})``."""
        return np.einsum("ybaa->yb", self.members).real

    def reduced_state(self) -> np.ndarray:
        return self.members[0].sum(axis=0)

    @classmethod
    def from_dict(cls, scenario: SteeringScenario, entries: dict) -> "Assemblage":
        return cls(scenario, _fill(scenario, entries))


def check_normalization(members, tol: float = CONSTRUCTION_TOL) -> None:
    traces = np.einsum("ybaa->y", np.asarray(members)).real
    if np.max(np.abs(traces - 1.0)) > tol:
        raise InvalidState(f"sum_b Tr(sigma_b|y) = {traces} is not 1 for every y")


def no_signaling_error(members) -> float:
    marg = np.asarray(members).sum(axis=1)
    return float(np.max(np.abs(marg - marg[0])))


def check_no_signaling(members, tol: float = CONSTRUCTION_TOL) -> None:
    err = no_signaling_error(members)
    if err > tol:
        raise InvalidState(f"assemblage signals: marginals differ by {err:.3g}")


def _fill(scenario: SteeringScenario, entries: dict) -> np.ndarray:
    out = np.zeros(scenario.shape, dtype=np.complex128)
    for (b, y), m in entries.items():
        if not (0 <= b < scenario.n_outcomes and 0 <= y < scenario.n_inputs):
            raise ScenarioMismatch(f"index (b={b}, y={y}) outside the scenario")
        m = np.asarray(m, dtype=np.complex128)
        if m.shape != (scenario.d_alice, scenario.d_alice):
            raise DimensionMismatch(f"entry (b={b}, y={y}) has shape {m.shape}")
        out[y, b] = m
    return out


@dataclass(frozen=True)
class DeterministicStrategy:
    """Response function ``y -> b``; ``outcomes[y]`` is Bob's answer to input ``y``."""

    outcomes: tuple

    def index(self, n_outcomes: int) -> int:
        idx = 0
        for b in self.outcomes:
            idx = idx * n_outcomes + b
        return idx

    @classmethod
    def from_index(cls, idx: int, n_inputs: int, n_outcomes: int) -> "DeterministicStrategy":
        digits = []
        for _ in range(n_inputs):
            idx, b = divmod(idx, n_outcomes)
            digits.append(b)
        return cls(tuple(reversed(digits)))

    def operator(self, f: SteeringFunctional) -> np.ndarray:
        return sum(f.F(b, y) for y, b in enumerate(self.outcomes))


def _members_of(a) -> np.ndarray:
    return a.members if isinstance(a, Assemblage) else np.asarray(a, dtype=np.complex128)


def evaluate(f: SteeringFunctional, a) -> float:
    """``W = sum_{b,y} Tr(F_{b|y} sigma_{b|y})``.

    `a` is an :class:`Assemblage` or a raw member array (inferred assemblages
    need not be positive).
    """
    members = _members_of(a)
    if isinstance(a, Assemblage) and a.scenario != f.scenario:
        raise ScenarioMismatch("functional and assemblage scenarios differ")
    if members.shape != f.scenario.shape:
        raise ScenarioMismatch(f"assemblage shape {members.shape} != {f.scenario.shape}")
    w = np.einsum("ybij,ybji->", f.coefficients, members)
    if abs(w.imag) > 1e-9:
        raise NonRealValue(f"functional value has imaginary part {w.imag:.3g}")
    return float(w.real)


@dataclass(frozen=True, eq=False)
class LocalBoundResult:
    beta_L: float
    optimal_strategy: DeterministicStrategy
    optimal_state: DensityMatrix
    attaining_assemblage: Assemblage

    def as_dict(self) -> dict:
        return {"beta_L": self.beta_L, "strategy": list(self.optimal_strategy.outcomes)}


def strategy_values(f: SteeringFunctional) -> np.ndarray:
    """Top eigenvalue of every deterministic strategy operator, lexicographic order."""
    sc = f.scenario
    if sc.n_outcomes**sc.n_inputs > MAX_STRATEGIES:
        raise EnumerationTooLarge(
            f"{sc.n_outcomes}^{sc.n_inputs} strategies exceed the limit of {MAX_STRATEGIES}"
        )
    return kernels.strategy_values(f.coefficients)


def lhs_bound(f: SteeringFunctional, tie_tol: float = TIE_TOL) -> LocalBoundResult:
    """Exact local-hidden-state bound by deterministic-strategy enumeration.

    ``beta_L = max_f lambda_max(sum_y F_{f(y)|y})``. Among strategies within
    `tie_tol` of the maximum the lexicographically smallest one is returned,
    together with its top eigenvector as hidden state and the assemblage
    ``sigma_{b|y} = delta_{b, f(y)} |psi><psi|`` that attains the bound.
    """
    sc = f.scenario
    values = strategy_values(f)
    best = float(values.max())
    idx = int(np.flatnonzero(values >= best - tie_tol)[0])
    strategy = DeterministicStrategy.from_index(idx, sc.n_inputs, sc.n_outcomes)
    _, vec = top_eigenvector(strategy.operator(f))
    state = DensityMatrix.from_vector(vec)
    members = np.zeros(sc.shape, dtype=np.complex128)
    for y, b in enumerate(strategy.outcomes):
        members[y, b] = state.matrix
    return LocalBoundResult(best, strategy, state, Assemblage(sc, members))


def normalization_constant(f: SteeringFunctional, a) -> float:
    """``N = sum_{b,y} p(b|y) ||F_{b|y}||_F`` with ``p(b|y) = Tr(sigma_{b|y})``."""
    members = _members_of(a)
    if members.shape != f.scenario.shape:
        raise ScenarioMismatch(f"assemblage shape {members.shape} != {f.scenario.shape}")
    p = np.einsum("ybaa->yb", members).real
    norms = np.sqrt(np.sum(np.abs(f.coefficients) ** 2, axis=(2, 3)))
    return float(np.sum(p * norms))


def fact2_correction(f: SteeringFunctional, a, epsilon: float, sharp: bool = False) -> float:
    """Inflation of the local bound under measurement deviation `epsilon`.

    Returns ``N d^2 sqrt(d) (eps/2 + sqrt(2 d eps))``. With ``sharp=True`` the
    factor ``d^2`` is replaced by ``d sqrt(d^2 - 1)``, which the tomography
    bound also supports.
    """
    if epsilon < 0:
        raise OutOfRange(f"epsilon must be nonnegative, got {epsilon}")
    d = f.scenario.d_alice
    factor = d * math.sqrt(d * d - 1) if sharp else d * d
    return normalization_constant(f, a) * factor * math.sqrt(d) * coefficient_gap(d, epsilon)


@dataclass(frozen=True)
class CorrectedBound:
    beta_L: float
    beta_L_corr: float
    correction: float
    normalization: float
    strategy: tuple
    epsilon: float

    def as_dict(self) -> dict:
        return {
            "beta_L": self.beta_L,
            "strategy": list(self.strategy),
            "epsilon": self.epsilon,
            "normalization": self.normalization,
            "correction": self.correction,
            "beta_L_corr": self.beta_L_corr,
        }


def corrected_local_bound(
    f: SteeringFunctional,
    epsilon: float,
    assemblage: Optional[Assemblage] = None,
    sharp: bool = False,
) -> CorrectedBound:
    """``beta_L`` and ``beta_L + correction``.

    The probabilities entering the correction come from `assemblage` when
    given, otherwise from the attaining assemblage found by :func:`lhs_bound`.
    """
    local = lhs_bound(f)
    a = assemblage if assemblage is not None else local.attaining_assemblage
    corr = fact2_correction(f, a, epsilon, sharp)
    return CorrectedBound(
        beta_L=local.beta_L,
        beta_L_corr=local.beta_L + corr,
        correction=corr,
        normalization=normalization_constant(f, a),
        strategy=local.optimal_strategy.outcomes,
        epsilon=float(epsilon),
    )


@dataclass
class EmpiricalBound:
    epsilon: float
    n_samples: int
    seed: int
    beta_ideal: float
    empirical_max: float
    empirical_mean: float
    correction: float
    beta_L_corr: float
    violations: int
    max_no_signaling_error: float
    values: np.ndarray = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "values"}


def empirical_corrected_bound(
    f: SteeringFunctional,
    a: Assemblage,
    epsilon: float,
    n_samples: int,
    rng_seed: int = 0,
    basis: Optional[UnitaryBasis] = None,
    threads: int = 1,
    chunk: int = 250,
) -> EmpiricalBound:
    """Largest functional value Alice can infer from `a` with an imprecise device.

    Each sample draws one perturbed device (generator seeded ``rng_seed + n``),
    reconstructs every member ``sigma_{b|y}`` with it and evaluates ``W``.
    The maximum is a lower estimate of the tight corrected bound and never
    exceeds ``W(a) + fact2_correction``.
    """
    if n_samples < 1:
        raise OutOfRange("n_samples must be >= 1")
    sc = f.scenario
    if a.scenario != sc:
        raise ScenarioMismatch("functional and assemblage scenarios differ")
    d = sc.d_alice
    basis = basis or default_basis(d)
    if basis.dim != d:
        raise DimensionMismatch("basis dimension differs from d_alice")
    flat = a.members.reshape(-1, d, d)

    def work(seeds):
        values = np.empty(len(seeds))
        ns_err = 0.0
        for n, s in enumerate(seeds):
            actual = sample_actual(basis, epsilon, np.random.default_rng(s))
            inferred = infer_operators(flat, basis, actual).reshape(sc.shape)
            values[n] = evaluate(f, inferred)
            ns_err = max(ns_err, no_signaling_error(inferred))
        return values, ns_err

    seeds = [rng_seed + n for n in range(n_samples)]
    blocks = [seeds[i:i + chunk] for i in range(0, n_samples, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    values = np.concatenate([p[0] for p in parts])
    ns_err = max(p[1] for p in parts)

    beta = evaluate(f, a)
    corr = fact2_correction(f, a, epsilon)
    return EmpiricalBound(
        epsilon=float(epsilon),
        n_samples=n_samples,
        seed=rng_seed,
        beta_ideal=beta,
        empirical_max=float(values.max()),
        empirical_mean=float(values.mean()),
        correction=corr,
        beta_L_corr=beta + corr,
        violations=int(np.sum(values > beta + corr + 1e-12)),
        max_no_signaling_error=ns_err,
        values=values,
    )


def reference_qubit_functional() -> SteeringFunctional:
    """Two inputs, two outcomes: ``F_{b|0}`` the Z basis, ``F_{b|1}`` the X basis."""
    ket0, ket1 = np.array([1, 0]), np.array([0, 1])
    plus, minus = (ket0 + ket1) / np.sqrt(2), (ket0 - ket1) / np.sqrt(2)
    sc = SteeringScenario(2, 2, 2)
    return SteeringFunctional.from_dict(
        sc,
        {
            (0, 0): projector(ket0),
            (1, 0): projector(ket1),
            (0, 1): projector(plus),
            (1, 1): projector(minus),
        },
    )


def reference_qubit_assemblage() -> Assemblage:
    """``sigma_{0|0} = sigma_{0|1} = |v><v|`` with ``|v> = cos(pi/8)|0> + sin(pi/8)|1>``."""
    v = projector([math.cos(math.pi / 8), math.sin(math.pi / 8)])
    zero = np.zeros((2, 2))
    sc = SteeringScenario(2, 2, 2)
    return Assemblage.from_dict(sc, {(0, 0): v, (1, 0): zero, (0, 1): v, (1, 1): zero})


def _parse_scenario(doc) -> SteeringScenario:
    try:
        sc = doc["scenario"]
        return SteeringScenario(int(sc["d_alice"]), int(sc["n_inputs"]), int(sc["n_outcomes"]))
    except KeyError as exc:
        raise FormatError(f"missing field {exc} in 'scenario'") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad 'scenario' object: {exc}") from exc


def _parse_entries(doc, key: str) -> dict:
    if key not in doc or not isinstance(doc[key], dict):
        raise FormatError(f"missing object field '{key}'")
    entries = {}
    for label, mat in doc[key].items():
        try:
            b, y = (int(x) for x in label.split(","))
        except ValueError as exc:
            raise FormatError(f"field '{key}.{label}': key must look like 'b,y'") from exc
        try:
            entries[(b, y)] = matrix_from_json(mat)
        except SteeringError as exc:
            raise FormatError(f"field '{key}.{label}': {exc}") from exc
    return entries


def _dump_entries(arr: np.ndarray) -> dict:
    return {
        f"{b},{y}": matrix_to_json(arr[y, b])
        for y, b in itertools.product(range(arr.shape[0]), range(arr.shape[1]))
    }


def functional_from_json(doc) -> SteeringFunctional:
    sc = _parse_scenario(doc)
    try:
        return SteeringFunctional.from_dict(sc, _parse_entries(doc, "F"))
    except FormatError:
        raise
    except SteeringError as exc:
        raise FormatError(f"field 'F': {exc}") from exc


def functional_to_json(f: SteeringFunctional) -> dict:
    return {"scenario": f.scenario.as_dict(), "F": _dump_entries(f.coefficients)}


def assemblage_from_json(doc) -> Assemblage:
    sc = _parse_scenario(doc)
    try:
        return Assemblage.from_dict(sc, _parse_entries(doc, "sigma"))
    except FormatError:
        raise
    except SteeringError as exc:
        raise FormatError(f"field 'sigma': {exc}") from exc


def assemblage_to_json(a: Assemblage) -> dict:
    return {"scenario": a.scenario.as_dict(), "sigma": _dump_entries(a.members)}
