"""Locating a faulty state source among N otherwise identical ones."""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import discrimination as disc
from .qcore import QUBIT_CAP, QubitCapError, StateVector, probe_layout

ORACLE_CAP = 12


def normalize_angle(phi: float) -> float:
    """Map a fault angle to [0, pi]; only cos^2(phi/2) enters the problem."""
    phi = float(phi) % (2 * pi)
    return 2 * pi - phi if phi > pi else phi


@dataclass(frozen=True)
class SourceProblem:
    """N sources emitting |0>; the faulty one emits cos(phi/2)|0> + sin(phi/2)|1>."""

    n: int
    phi: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("need at least one source")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "phi", float(self.phi) % (2 * pi))

    @property
    def reduced_phi(self) -> float:
        return normalize_angle(self.phi)


def fault_state(phi: float) -> np.ndarray:
    return np.array([np.cos(phi / 2), np.sin(phi / 2)], dtype=complex)


def source_states(problem: SourceProblem, cap: int = QUBIT_CAP) -> disc.Ensemble:
    """``|psi_k> = |0>^(k-1) |phi> |0>^(N-k)`` with uniform priors."""
    n = problem.n
    if n > cap:
        raise QubitCapError(f"{n} sources exceed the cap of {cap} qubits")
    zero = np.array([1.0, 0.0], dtype=complex)
    bad = fault_state(problem.phi)
    states = []
    for k in range(n):
        v = np.ones(1, dtype=complex)
        for j in range(n):
            v = np.kron(v, bad if j == k else zero)
        states.append(StateVector(v, probe_layout(n)))
    return disc.Ensemble.uniform(states)


def source_gram_closed_form(problem: SourceProblem) -> disc.GramMatrix:
    """``G = sin^2(phi/2)/N * I + cos^2(phi/2) |1><1|`` with analytic spectrum."""
    n = problem.n
    c2 = np.cos(problem.phi / 2) ** 2
    s2 = np.sin(problem.phi / 2) ** 2
    entries = np.full((n, n), c2 / n, dtype=complex)
    entries[np.diag_indices(n)] = 1.0 / n
    lam1 = (1 + (n - 1) * c2) / n
    lam2 = s2 / n
    eig = np.sort(np.array([lam1] + [lam2] * (n - 1)))
    return disc.GramMatrix(entries, True, eig)


def ps_star(problem: SourceProblem) -> float:
    """Optimal success probability, attained by the square-root measurement."""
    n = problem.n
    half = problem.reduced_phi / 2
    return ((np.sqrt(1 + (n - 1) * np.cos(half) ** 2) + (n - 1) * np.sin(half)) / n) ** 2


def asymptotic_ps(n: int, phi: float) -> float:
    """Large-N expansion of :func:`ps_star` at fixed angle, remainder O(N^-2).

    ``sin^2(phi/2) + sin(phi)/sqrt(N) + (cos^2(phi/2) - 2 sin^2(phi/2))/N
    + (sin^3(phi/2)/cos(phi/2) - sin(phi))/N^(3/2)``.  The expansion is not
    uniform as phi approaches pi, where the exact value 1 is returned.
    """
    phi = normalize_angle(phi)
    s, c = np.sin(phi / 2), np.cos(phi / 2)
    if c < 1e-12:
        return 1.0
    return float(s**2 + np.sin(phi) / np.sqrt(n) + (c**2 - 2 * s**2) / n
                 + (s**3 / c - np.sin(phi)) / n**1.5)


@dataclass
class SourceReport:
    problem: SourceProblem
    closed: float
    srm: float
    fixed_point: float
    certificate_slack: float
    fixed_point_converged: bool

    @property
    def max_disagreement(self) -> float:
        return max(abs(self.closed - self.srm), abs(self.closed - self.fixed_point))


def verify_source(problem: SourceProblem, max_iter: int = 10000, tol: float = 1e-9,
                  cap: int = ORACLE_CAP) -> SourceReport:
    """Compare the closed form with SRM and fixed-point solutions on explicit states."""
    ens = source_states(problem, cap=cap)
    gram = disc.gram_of(ens)
    srm = disc.srm_povm(ens, gram, allow_dependent=True)
    fp = disc.fixed_point_optimal_povm(ens, max_iter=max_iter, tol=tol)
    cert = disc.check_dual_certificate(ens, srm)
    return SourceReport(
        problem,
        ps_star(problem),
        srm.success_probability,
        fp.success_probability,
        min(cert.slack, fp.certificate.slack),
        fp.converged,
    )
