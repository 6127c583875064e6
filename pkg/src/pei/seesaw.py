"""Alternating state/measurement optimization for channel position finding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discrimination import POVM, Ensemble, fixed_point_optimal_povm
from .qcore import (
    KrausSet,
    StateVector,
    _check_cap,
    apply_adjoint_at,
    apply_op_to_vector,
    probe_layout,
)

SEESAW_QUBIT_CAP = 10


@dataclass
class RestartTrace:
    seed: tuple[int, int]
    history: list[float]
    converged: bool


@dataclass
class SeesawResult:
    state: StateVector
    povm: POVM
    value: float
    restarts: list[RestartTrace] = field(default_factory=list)

    def __iter__(self):
        # allows ``state, povm, value = seesaw_optimize(...)``
        return iter((self.state, self.povm, self.value))

    @property
    def converged(self) -> bool:
        return any(r.converged for r in self.restarts)


def _as_kraus(channel) -> KrausSet:
    if isinstance(channel, KrausSet):
        return channel
    return channel.kraus_set()


def hypothesis_ensemble(kraus: KrausSet, state: StateVector, n: int) -> Ensemble:
    """The N output states, the channel acting on probe k in hypothesis k."""
    factors = []
    for k in range(1, n + 1):
        q = state.qubit_index(f"p{k}")
        factors.append(np.stack(
            [apply_op_to_vector(state.amplitudes, op, q) for op in kraus.operators], axis=1
        ))
    return Ensemble.from_factors(factors)


def _pullback(kraus: KrausSet, elements, layout, n: int) -> np.ndarray:
    q = sum(apply_adjoint_at(m, kraus, k + 1, layout) for k, m in enumerate(elements))
    q = q / n
    return 0.5 * (q + q.conj().T)


def _single_run(kraus, n, layout, rng, tol, max_outer, inner_iter):
    dim = 2 ** len(layout)
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    state = StateVector(amps / np.linalg.norm(amps), layout)
    elements = None
    value = -np.inf
    history: list[float] = []
    converged = False
    povm = None
    for _ in range(max_outer):
        ens = hypothesis_ensemble(kraus, state, n)
        cand = fixed_point_optimal_povm(ens, max_iter=inner_iter, tol=tol * 1e-2, initial=elements)
        full = cand.full_elements()
        if elements is not None:
            warm = sum(np.trace(a @ m).real for a, m in zip(ens.weighted_operators(), elements))
            if warm > cand.success_probability:
                # the inner solver is not guaranteed monotone; keep the warm start
                full = elements
                cand = POVM(list(elements), warm, converged=cand.converged, iterations=cand.iterations)
        elements, povm = full, cand
        q = _pullback(kraus, elements, layout, n)
        w, v = np.linalg.eigh(q)
        new_value = float(w[-1])
        state = StateVector(v[:, -1], layout)
        history.append(new_value)
        if new_value - value < tol:
            converged = True
            value = max(value, new_value)
            break
        value = new_value
    povm.success_probability = value
    return state, povm, value, history, converged


def seesaw_optimize(
    channel,
    n: int,
    use_ancilla: bool = False,
    restarts: int = 8,
    tol: float = 1e-9,
    seed: int = 0,
    max_outer: int = 500,
    inner_iter: int = 500,
    cap: int = SEESAW_QUBIT_CAP,
) -> SeesawResult:
    """Maximize the position-finding success probability over inputs and measurements.

    Each sweep fixes the input and solves for the measurement, then fixes
    the measurement and takes the top eigenvector of the pulled-back
    operator ``(1/N) sum_k E_k^dag(M_k)``.  Restart ``j`` draws its random
    initial state from ``default_rng([seed, j])``; the best restart wins,
    ties going to the lowest index.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    kraus = _as_kraus(channel)
    layout = probe_layout(n, ancilla=use_ancilla)
    _check_cap(len(layout), cap)

    best = None
    traces = []
    for j in range(restarts):
        rng = np.random.default_rng([seed, j])
        state, povm, value, history, converged = _single_run(
            kraus, n, layout, rng, tol, max_outer, inner_iter
        )
        traces.append(RestartTrace((seed, j), history, converged))
        if best is None or value > best[2]:
            best = (state, povm, value)
    return SeesawResult(best[0], best[1], best[2], traces)
