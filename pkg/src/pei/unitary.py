"""Locating a faulty rotation gate with entangled, permutation-symmetric probes.

The faulty gate applies ``U(phi) = exp(i phi/2 sigma_y)``.  Symmetric probe
states are expanded in Dicke states taken in the eigenbasis of the
generator ``sigma_y``; in that basis the overlaps between the N rotated
hypotheses depend only on the Dicke weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import discrimination as disc
from .qcore import QubitCapError, StateVector, apply_op_to_vector, dicke_state, probe_layout
from .source import SourceProblem, normalize_angle, ps_star

ORACLE_CAP = 12
CERTIFY_MAX_N = 6

# columns are the sigma_y eigenvectors |+i>, |-i>
Y_BASIS = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)


def rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


@dataclass(frozen=True)
class UnitaryProblem:
    n: int
    phi: float

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError("unitary position finding needs N >= 2")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "phi", normalize_angle(self.phi))

    @property
    def half_weight(self) -> int:
        return ceil(self.n / 2)


@dataclass(frozen=True)
class SymmetricInput:
    """Weights ``c_m`` of ``sum_m sqrt(c_m) |N, m>``; real non-negative amplitudes only."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if np.any(c < -1e-12) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError("coefficients must be non-negative and sum to one")
        object.__setattr__(self, "coefficients", np.clip(c, 0.0, None))

    @property
    def n(self) -> int:
        return self.coefficients.size - 1

    @classmethod
    def single(cls, n: int, m: int) -> "SymmetricInput":
        c = np.zeros(n + 1)
        c[m] = 1.0
        return cls(c)

    def support(self) -> dict[int, float]:
        return {m: float(c) for m, c in enumerate(self.coefficients) if c > 0}


def overlap_deficit(n: int, m: int, phi: float) -> float:
    """``1 - b_m(phi)``, evaluated without cancellation for small angles."""
    if not 0 <= m <= n:
        raise ValueError(f"weight m={m} out of range for n={n}")
    return 4.0 * m * (n - m) * np.sin(phi / 2) ** 2 / (n * (n - 1))


def overlap_coefficient(n: int, m: int, phi: float) -> float:
    """Off-diagonal overlap contributed by Dicke weight ``m``."""
    return 1.0 - overlap_deficit(n, m, phi)


def phi_min(n: int) -> float:
    """Smallest angle at which the half-weight Dicke probe gives orthogonal hypotheses."""
    if n < 2:
        raise ValueError("phi_min needs N >= 2")
    return float(np.arccos(-1.0 + 1.0 / ceil(n / 2)))


def circulant_ps(n: int, offdiag: float, deficit: float | None = None) -> float:
    """SRM success for unit-norm hypotheses with a constant real overlap ``offdiag``.

    ``deficit = 1 - offdiag`` may be passed when it is known more
    accurately than the overlap itself.
    """
    d = 1.0 - float(offdiag) if deficit is None else float(deficit)
    lam1 = max(n - (n - 1) * d, 0.0)
    lam2 = max(d, 0.0)
    return (np.sqrt(lam1) + (n - 1) * np.sqrt(lam2)) ** 2 / n**2


def symmetric_offdiag(problem: UnitaryProblem, inp: SymmetricInput) -> float:
    if inp.n != problem.n:
        raise ValueError("input size does not match the problem")
    return float(sum(c * overlap_coefficient(problem.n, m, problem.phi)
                     for m, c in inp.support().items()))


def symmetric_input_ps(problem: UnitaryProblem, inp: SymmetricInput) -> float:
    """Success probability of a symmetric input from Dicke-weight data only."""
    d = sum(c * overlap_deficit(problem.n, m, problem.phi) for m, c in inp.support().items())
    return circulant_ps(problem.n, 1.0 - d, deficit=d)


def optimal_input(problem: UnitaryProblem) -> SymmetricInput:
    """Half-weight Dicke probe below the threshold, a two-weight superposition above it."""
    if problem.phi == 0.0:
        raise ValueError("phi = 0 makes all hypotheses identical")
    n, h = problem.n, problem.half_weight
    if problem.phi <= phi_min(n):
        return SymmetricInput.single(n, h)
    c_h = (2 * h - 1) / (2 * h * np.sin(problem.phi / 2) ** 2)
    c = np.zeros(n + 1)
    c[0] = 1.0 - c_h
    c[h] = c_h
    return SymmetricInput(c)


def ps_unitary(problem: UnitaryProblem) -> float:
    """Best success probability over symmetric probe states.

    Equals ``((cos(phi/2) + sqrt(N-1) sin(phi/2)) / sqrt(N))^2`` below the
    threshold for even N, and 1 above it.
    """
    if problem.phi == 0.0:
        return 1.0 / problem.n
    if problem.phi > phi_min(problem.n):
        return 1.0
    d = overlap_deficit(problem.n, problem.half_weight, problem.phi)
    return circulant_ps(problem.n, 1.0 - d, deficit=d)


def entanglement_advantage(problem: UnitaryProblem) -> float:
    return ps_unitary(problem) - ps_star(SourceProblem(problem.n, problem.phi))


def symmetric_basis_state(n: int, m: int) -> StateVector:
    """Dicke state |N, m> written in the sigma_y eigenbasis."""
    v = dicke_state(n, m).amplitudes
    for q in range(n):
        v = apply_op_to_vector(v, Y_BASIS, q)
    return StateVector(v, probe_layout(n))


def symmetric_input_state(inp: SymmetricInput) -> StateVector:
    n = inp.n
    amps = sum(np.sqrt(c) * symmetric_basis_state(n, m).amplitudes
               for m, c in inp.support().items())
    return StateVector(amps, probe_layout(n))


def unitary_states(problem: UnitaryProblem, probe: StateVector,
                   cap: int = ORACLE_CAP) -> disc.Ensemble:
    """Explicit hypotheses ``U(phi)`` applied to probe k of the input."""
    n = problem.n
    if n > cap:
        raise QubitCapError(f"{n} qubits exceed the oracle cap of {cap}")
    if probe.n_qubits != n:
        raise ValueError("probe state has the wrong number of qubits")
    u = rotation(problem.phi)
    return disc.Ensemble.uniform(
        [apply_op_to_vector(probe.amplitudes, u, k) for k in range(n)]
    )


@dataclass
class UnitaryOracleResult:
    srm: float
    fixed_point: float | None
    certificate_slack: float | None
    gram: disc.GramMatrix


def unitary_oracle(problem: UnitaryProblem, probe: SymmetricInput | StateVector,
                   certify: bool | None = None, cap: int = ORACLE_CAP) -> UnitaryOracleResult:
    """Success probability from explicit 2^N-dimensional rotated vectors.

    For N <= 6 (or when ``certify`` is set) the fixed-point solver and a
    dual certificate of the SRM are run as well.
    """
    if isinstance(probe, SymmetricInput):
        if probe.n > cap:
            raise QubitCapError(f"{probe.n} qubits exceed the oracle cap of {cap}")
        probe = symmetric_input_state(probe)
    ens = unitary_states(problem, probe, cap=cap)
    gram = disc.gram_of(ens)
    srm = disc.srm_success_probability(gram)
    certify = problem.n <= CERTIFY_MAX_N if certify is None else certify
    fp = slack = None
    if certify:
        fpovm = disc.fixed_point_optimal_povm(ens)
        fp = fpovm.success_probability
        srm_m = disc.srm_povm(ens, gram, allow_dependent=True)
        slack = disc.check_dual_certificate(ens, srm_m).slack
    return UnitaryOracleResult(srm, fp, slack, gram)


def dicke_overlap_oracle(n: int, m: int, phi: float) -> complex:
    """``<N,m| U_1^dag U_2 |N,m>`` computed on explicit vectors."""
    psi = symmetric_basis_state(n, m).amplitudes
    u = rotation(phi)
    return complex(np.vdot(apply_op_to_vector(psi, u, 0), apply_op_to_vector(psi, u, 1)))

