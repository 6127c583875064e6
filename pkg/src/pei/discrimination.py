"""Minimum-error discrimination of N hypotheses.

Two independent routes to the optimum are provided: the square-root
measurement built from the weighted Gram matrix, and an iterative
fixed-point solver for general (mixed) ensembles.  Either can be checked
against the Holevo-Yuen optimality conditions with
:func:`check_dual_certificate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import StateVector, eigh_psd, hermitian_sqrt

CIRCULANT_TOL = 1e-12
CERTIFICATE_TOL = 1e-8
DEPENDENCE_TOL = 1e-10
SUPPORT_TOL = 1e-12


class LinearlyDependentError(ValueError):
    """The pure states do not span an N-dimensional space."""


class NonPureEnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class Ensemble:
    """Hypothesis states with prior weights.

    Pure states are stored as 1-D amplitude vectors, mixed ones as density
    matrices.
    """

    states: tuple[np.ndarray, ...]
    priors: np.ndarray
    factors: tuple[np.ndarray, ...] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        states = []
        for s in self.states:
            if isinstance(s, StateVector):
                s = s.amplitudes
            states.append(np.asarray(s, dtype=complex))
        priors = np.asarray(self.priors, dtype=float).reshape(-1)
        if len(states) == 0 or len(states) != priors.size:
            raise ValueError("need one prior per state and at least one state")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be non-negative and sum to one")
        dims = {s.shape[0] for s in states}
        if len(dims) != 1:
            raise ValueError("all states must share one dimension")
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "priors", priors)

    @classmethod
    def uniform(cls, states: Sequence) -> "Ensemble":
        n = len(states)
        return cls(tuple(states), np.full(n, 1.0 / n))

    @classmethod
    def from_factors(cls, factors: Sequence[np.ndarray]) -> "Ensemble":
        """Uniform ensemble of ``rho_k = F_k F_k^dag`` with each ``F_k`` of shape (dim, r)."""
        factors = tuple(np.asarray(f, dtype=complex) for f in factors)
        states = [f @ f.conj().T for f in factors]
        return cls(tuple(states), np.full(len(states), 1.0 / len(states)), factors)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def is_pure(self) -> bool:
        return all(s.ndim == 1 for s in self.states)

    def density(self, k: int) -> np.ndarray:
        s = self.states[k]
        return np.outer(s, s.conj()) if s.ndim == 1 else s

    def weighted_operators(self) -> list[np.ndarray]:
        return [p * self.density(k) for k, p in enumerate(self.priors)]

    def support_basis(self) -> np.ndarray:
        """Isometry onto the joint support of the weighted hypotheses."""
        if self.is_pure:
            cols = np.stack([np.sqrt(p) * s for p, s in zip(self.priors, self.states)], axis=1)
            u, sv, _ = np.linalg.svd(cols, full_matrices=False)
            keep = sv > np.sqrt(SUPPORT_TOL) * max(sv.max(initial=0.0), 1e-300)
            return u[:, keep]
        if self.factors is not None:
            cols = np.concatenate(
                [np.sqrt(p) * f for p, f in zip(self.priors, self.factors)], axis=1
            )
            u, sv, _ = np.linalg.svd(cols, full_matrices=False)
            keep = sv > np.sqrt(SUPPORT_TOL) * max(sv.max(initial=0.0), 1e-300)
            return u[:, keep]
        total = sum(self.weighted_operators())
        w, v = np.linalg.eigh(0.5 * (total + total.conj().T))
        keep = w > SUPPORT_TOL * max(w.max(initial=0.0), 1e-300)
        return v[:, keep]


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    is_circulant: bool
    eigenvalues: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DualCertificate:
    gamma: np.ndarray
    slack: float
    objective: float

    @property
    def valid(self) -> bool:
        return self.slack >= -CERTIFICATE_TOL


@dataclass
class POVM:
    """Measurement elements, optionally expressed on a support subspace.

    When ``support`` is an isometry ``B`` (dim x r) the elements are r x r
    and complete on ``range(B)``; :meth:`full_elements` lifts them and
    assigns the orthogonal complement to the first outcome.
    """

    elements: list[np.ndarray]
    success_probability: float
    support: np.ndarray | None = None
    converged: bool = True
    iterations: int = 0
    certificate: DualCertificate | None = field(default=None, repr=False)

    def full_elements(self) -> list[np.ndarray]:
        if self.support is None:
            return list(self.elements)
        b = self.support
        full = [b @ m @ b.conj().T for m in self.elements]
        full[0] = full[0] + np.eye(b.shape[0]) - b @ b.conj().T
        return full

    def completeness_error(self) -> float:
        total = sum(self.elements)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] for m in self.elements))


def gram_from_entries(entries: np.ndarray) -> GramMatrix:
    g = np.asarray(entries, dtype=complex)
    g = 0.5 * (g + g.conj().T)
    n = g.shape[0]
    circulant = all(
        np.max(np.abs(g[k] - np.roll(g[0], k))) <= CIRCULANT_TOL for k in range(1, n)
    )
    return GramMatrix(g, circulant, np.linalg.eigvalsh(g))


def gram_of(ensemble: Ensemble) -> GramMatrix:
    """Prior-weighted overlap matrix ``sqrt(p_k p_l) <psi_k|psi_l>``."""
    if not ensemble.is_pure:
        raise NonPureEnsembleError("Gram construction needs pure states")
    psi = np.stack(ensemble.states, axis=1) * np.sqrt(ensemble.priors)
    return gram_from_entries(psi.conj().T @ psi)


def srm_success_probability(gram: GramMatrix | np.ndarray) -> float:
    """Success probability of the square-root measurement, ``sum_k |S_kk|^2``.

    Optimal when the Gram matrix is circulant; a lower bound otherwise.
    """
    g = gram.entries if isinstance(gram, GramMatrix) else np.asarray(gram)
    s = hermitian_sqrt(g)
    return float(np.sum(np.abs(np.diag(s)) ** 2))


def success_probability(ensemble: Ensemble, povm: POVM) -> float:
    ops = _reduced_operators(ensemble, povm.support)
    return float(sum(np.trace(a @ m).real for a, m in zip(ops, povm.elements)))


def _reduced_operators(ensemble: Ensemble, basis: np.ndarray | None) -> list[np.ndarray]:
    if basis is None:
        return ensemble.weighted_operators()
    bh = basis.conj().T
    if ensemble.factors is not None:
        out = []
        for p, f in zip(ensemble.priors, ensemble.factors):
            c = bh @ f
            out.append(p * (c @ c.conj().T))
        return out
    if ensemble.is_pure:
        out = []
        for p, s in zip(ensemble.priors, ensemble.states):
            c = bh @ s
            out.append(p * np.outer(c, c.conj()))
        return out
    return [bh @ a @ basis for a in ensemble.weighted_operators()]


def srm_povm(
    ensemble: Ensemble,
    gram: GramMatrix | None = None,
    allow_dependent: bool = False,
) -> POVM:
    """Square-root measurement ``|m_k> = rho^{-1/2} sqrt(p_k) |psi_k>``.

    Built in the span of the states; raises ``LinearlyDependentError`` for
    dependent states unless ``allow_dependent`` is set, in which case the
    pseudo-inverse on the support is used.
    """
    gram = gram if gram is not None else gram_of(ensemble)
    if gram.eigenvalues[0] <= DEPENDENCE_TOL and not allow_dependent:
        raise LinearlyDependentError(
            f"minimum Gram eigenvalue {gram.eigenvalues[0]:.3e} indicates dependent states"
        )
    basis = ensemble.support_basis()
    coords = [np.sqrt(p) * (basis.conj().T @ s) for p, s in zip(ensemble.priors, ensemble.states)]
    rho = sum(np.outer(c, c.conj()) for c in coords)
    w, v = eigh_psd(rho)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    vecs = [inv_sqrt @ c for c in coords]
    elements = [np.outer(m, m.conj()) for m in vecs]
    povm = POVM(elements, 0.0, support=basis)
    povm.success_probability = success_probability(ensemble, povm)
    return povm


def _inv_sqrt_on_support(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    keep = w > SUPPORT_TOL * max(w.max(initial=0.0), 1e-300)
    vk = v[:, keep]
    return (vk / np.sqrt(w[keep])) @ vk.conj().T, vk @ vk.conj().T


def _certificate(ops: Sequence[np.ndarray], elements: Sequence[np.ndarray]) -> DualCertificate:
    gamma = sum(a @ m for a, m in zip(ops, elements))
    gamma = 0.5 * (gamma + gamma.conj().T)
    slack = min(np.linalg.eigvalsh(gamma - a)[0] for a in ops)
    return DualCertificate(gamma, float(slack), float(np.trace(gamma).real))


def check_dual_certificate(ensemble: Ensemble, povm: POVM) -> DualCertificate:
    """Holevo-Yuen test: ``Gamma = sym(sum_k p_k rho_k M_k)`` must dominate every ``p_k rho_k``.

    Evaluated on the POVM's support subspace when it has one.
    """
    return _certificate(_reduced_operators(ensemble, povm.support), povm.elements)


def fixed_point_optimal_povm(
    ensemble: Ensemble,
    max_iter: int = 10000,
    tol: float = 1e-9,
    initial: Sequence[np.ndarray] | None = None,
) -> POVM:
    """Iterative maximum-success measurement for arbitrary ensembles.

    Uses the update ``M_k <- R^{-1/2} A_k M_k A_k R^{-1/2}`` with
    ``A_k = p_k rho_k`` and ``R = sum_k A_k M_k A_k``, restricted to the
    joint support of the hypotheses.  Starts from ``M_k = I/N`` unless an
    initial full-space POVM is given.  Stops when the success probability
    changes by less than ``tol``; the best iterate is returned, flagged
    non-converged if ``max_iter`` was hit.
    """
    n = len(ensemble)
    basis = ensemble.support_basis()
    ops = _reduced_operators(ensemble, basis)
    r = basis.shape[1]
    if initial is None:
        m = [np.eye(r, dtype=complex) / n for _ in range(n)]
    else:
        bh = basis.conj().T
        m = [bh @ np.asarray(e) @ basis for e in initial]

    def value(elems):
        return float(sum(np.trace(a @ e).real for a, e in zip(ops, elems)))

    best, best_val = m, value(m)
    prev = best_val
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        t = [a @ e @ a for a, e in zip(ops, m)]
        inv_sqrt, proj = _inv_sqrt_on_support(sum(t))
        m = [inv_sqrt @ x @ inv_sqrt for x in t]
        m[0] = m[0] + np.eye(r) - proj
        m = [0.5 * (e + e.conj().T) for e in m]
        cur = value(m)
        if cur > best_val:
            best, best_val = m, cur
        if abs(cur - prev) < tol:
            converged = True
            break
        prev = cur
    povm = POVM(best, best_val, support=basis, converged=converged, iterations=it)
    povm.certificate = _certificate(ops, best)
    return povm
