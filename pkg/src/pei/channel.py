"""Locating a faulty noisy channel among N identity channels.

Covers the Pauli family (closed forms and bounds by rank) and amplitude
damping (product-probe bound, flagged-ancilla strategy and its large-N
expansion).  All closed forms come with an explicit-state route that can
be used to check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import discrimination as disc
from .qcore import (
    KrausSet,
    QubitCapError,
    StateVector,
    apply_op_to_vector,
    double_dicke_state,
    probe_layout,
)
from .seesaw import hypothesis_ensemble

ZERO_TOL = 1e-12
ORACLE_CAP = 12

PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# +1 eigenvector of each Pauli, with its orthogonal partner
EIGENBASIS = {
    "X": ("|+>", np.array([1, 1], dtype=complex) / np.sqrt(2),
          np.array([1, -1], dtype=complex) / np.sqrt(2)),
    "Y": ("|+i>", np.array([1, 1j], dtype=complex) / np.sqrt(2),
          np.array([1, -1j], dtype=complex) / np.sqrt(2)),
    "Z": ("|0>", np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
}


@dataclass(frozen=True)
class PauliChannel:
    p0: float
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        p = self.probabilities
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("Pauli probabilities must be non-negative and sum to one")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3], dtype=float)

    @property
    def p_star(self) -> float:
        return float(min(self.p1, self.p2, self.p3))

    def kraus_set(self) -> KrausSet:
        ops = [np.sqrt(p) * PAULIS[name]
               for p, name in zip(self.probabilities, "IXYZ") if p > ZERO_TOL]
        return KrausSet(tuple(ops))


@dataclass(frozen=True)
class AmplitudeDampingChannel:
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")

    def kraus_set(self) -> KrausSet:
        g = self.gamma
        k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
        k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
        return KrausSet((k0, k1))


@dataclass
class StrategyReport:
    kind: str  # product-separable | ancilla-assisted | seesaw-numeric
    input: str
    success_probability: float
    bound: str  # exact | lower | upper
    measurement: str = ""
    details: dict = field(default_factory=dict)


def pauli_rank(channel: PauliChannel) -> int:
    """Number of non-identity Paulis applied with nonzero probability."""
    return int(sum(p > ZERO_TOL for p in (channel.p1, channel.p2, channel.p3)))


def _flip_strategy_value(flip: float, n: int) -> float:
    # the faulty position is seen with prob ``flip``, otherwise guessed
    return flip + (1.0 - flip) / n


def _probe_axis(channel: PauliChannel) -> str:
    """Pauli whose eigenstates serve as product probes for a rank-1/2 channel."""
    active = [name for p, name in zip((channel.p1, channel.p2, channel.p3), "XYZ") if p > ZERO_TOL]
    if len(active) == 2:
        return next(a for a in "XYZ" if a not in active)
    return "X" if active[0] == "Z" else "Z"


def pauli_rank12_value(channel: PauliChannel, n: int) -> StrategyReport:
    """Exact optimum ``p0/N + 1 - p0`` for rank-1 and rank-2 Pauli faults.

    Every probe is prepared in an eigenstate of a Pauli that anticommutes
    with all the active error Paulis, so any error flips it to the
    orthogonal state; each probe is then measured in that basis.
    """
    rank = pauli_rank(channel)
    if rank not in (1, 2):
        raise ValueError(f"channel has rank {rank}, expected 1 or 2")
    axis = _probe_axis(channel)
    label = EIGENBASIS[axis][0]
    return StrategyReport(
        "product-separable",
        f"{label}^(x){n}",
        channel.p0 / n + 1.0 - channel.p0,
        "exact",
        f"each probe in the sigma_{axis.lower()} eigenbasis; report the flipped probe, "
        "guess uniformly if none flipped",
        {"axis": axis, "rank": rank},
    )


def pauli_rank3_bounds(channel: PauliChannel, n: int,
                       use_ancilla: bool = False) -> tuple[StrategyReport, StrategyReport]:
    """Product-probe lower bound and ancilla-assisted value for rank-3 Pauli faults.

    The lower bound probes along the least likely Pauli, which then leaves
    the probe unchanged.  With one ancilla per probe the four Bell states
    are perfectly distinguishable, giving ``p0/N + 1 - p0``; without
    ancillas that value is only an upper bound.
    """
    if pauli_rank(channel) != 3:
        raise ValueError("channel is not rank 3")
    probs = {"X": channel.p1, "Y": channel.p2, "Z": channel.p3}
    axis = min("XYZ", key=lambda a: probs[a])
    blind = channel.p0 + channel.p_star
    lower = StrategyReport(
        "product-separable",
        f"{EIGENBASIS[axis][0]}^(x){n}",
        _flip_strategy_value(1.0 - blind, n),
        "lower",
        f"each probe in the sigma_{axis.lower()} eigenbasis",
        {"axis": axis, "p_star": channel.p_star},
    )
    upper = StrategyReport(
        "ancilla-assisted",
        f"|Phi+>^(x){n} (probe k paired with ancilla k)",
        channel.p0 / n + 1.0 - channel.p0,
        "exact" if use_ancilla else "upper",
        "Bell-basis measurement on each probe-ancilla pair",
    )
    return lower, upper


def branch_vectors(kraus_op: np.ndarray, state: StateVector, n: int) -> list[np.ndarray]:
    """Unnormalized ``K^(k)|psi>`` for every probe position k."""
    return [apply_op_to_vector(state.amplitudes, kraus_op, state.qubit_index(f"p{k}"))
            for k in range(1, n + 1)]


def branch_success(vectors: list[np.ndarray]) -> float:
    """Optimal identification of which position a single Kraus branch acted on.

    Uses the SRM on the unnormalized weighted Gram when it is circulant and
    the fixed-point solver otherwise.
    """
    n = len(vectors)
    psi = np.stack(vectors, axis=1)
    gram = disc.gram_from_entries(psi.conj().T @ psi / n)
    weight = float(np.trace(gram.entries).real)
    if weight <= ZERO_TOL:
        return 0.0
    if gram.is_circulant:
        return disc.srm_success_probability(gram)
    norms = np.linalg.norm(psi, axis=0)
    live = norms > np.sqrt(ZERO_TOL)
    priors = norms[live] ** 2 / np.sum(norms[live] ** 2)
    ens = disc.Ensemble(tuple(psi[:, live].T / norms[live][:, None]), priors / priors.sum())
    return weight * disc.fixed_point_optimal_povm(ens).success_probability


def kraus_branch_bound(channel, state: StateVector, n: int | None = None) -> float:
    """Sum over Kraus branches of the optimal branch-identification probability.

    Upper-bounds every single-query strategy that uses ``state`` as input.
    """
    kraus = channel if isinstance(channel, KrausSet) else channel.kraus_set()
    n = n if n is not None else sum(lbl.startswith("p") for lbl in state.layout)
    return float(sum(branch_success(branch_vectors(op, state, n)) for op in kraus.operators))


def conditional_states(channel, state: StateVector, n: int | None = None,
                       cap: int = ORACLE_CAP) -> disc.Ensemble:
    """The N hypothesis density operators (channel on probe k), uniform priors."""
    if state.n_qubits > cap:
        raise QubitCapError(f"{state.n_qubits} qubits exceed the oracle cap of {cap}")
    kraus = channel if isinstance(channel, KrausSet) else channel.kraus_set()
    n = n if n is not None else sum(lbl.startswith("p") for lbl in state.layout)
    return hypothesis_ensemble(kraus, state, n)


def flip_povm(basis: tuple[np.ndarray, np.ndarray], n: int) -> list[np.ndarray]:
    """Separable measurement: every probe in ``basis``; outcome k if only probe k flipped.

    The all-unflipped pattern is split evenly over the N outcomes and any
    multi-flip pattern goes to the first one.
    """
    keep, flip = basis
    dim = 2**n
    elems = [np.zeros((dim, dim), dtype=complex) for _ in range(n)]
    for pattern in range(dim):
        bits = [(pattern >> (n - 1 - q)) & 1 for q in range(n)]
        v = np.ones(1, dtype=complex)
        for b in bits:
            v = np.kron(v, flip if b else keep)
        proj = np.outer(v, v.conj())
        flipped = [q for q, b in enumerate(bits) if b]
        if not flipped:
            for e in elems:
                e += proj / n
        elif len(flipped) == 1:
            elems[flipped[0]] += proj
        else:
            elems[0] += proj
    return elems


def product_strategy_oracle(channel, qubit: np.ndarray, basis, n: int) -> float:
    """Exact success of a product probe and flip measurement from explicit states."""
    state = StateVector(_power(qubit, n), probe_layout(n))
    ens = conditional_states(channel, state, n)
    return float(sum(np.trace(a @ m).real
                     for a, m in zip(ens.weighted_operators(), flip_povm(basis, n))))


def _power(q: np.ndarray, n: int) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for _ in range(n):
        v = np.kron(v, q)
    return v


# --- amplitude damping ---------------------------------------------------


def ad_product_lower_bound(channel: AmplitudeDampingChannel, n: int) -> StrategyReport:
    """All probes in |1>, each measured in z; a decay reveals the faulty position."""
    return StrategyReport(
        "product-separable",
        f"|1>^(x){n}",
        _flip_strategy_value(channel.gamma, n),
        "lower",
        "each probe in the z basis; report the probe found in |0>, guess if none",
    )


def ad_opt_coefficient(gamma: float, n: int) -> float:
    """Weight ``c_N`` of the two-term flagged input; ``c_{N-1} = 1 - c_N``."""
    r = np.sqrt(1.0 - gamma)
    return (r * (3 * n - 2) + 2) / (r * (4 * n - 2) + 2)


def ad_two_weight_coefficients(gamma: float, n: int) -> np.ndarray:
    c = np.zeros(n + 1)
    p = ad_opt_coefficient(gamma, n)
    c[n] = p
    c[n - 1] += 1.0 - p
    return c


def ad_input_state(coefficients: np.ndarray) -> StateVector:
    """``sum_m sqrt(c_m) |N, m>_pa`` over double-Dicke states."""
    c = np.asarray(coefficients, dtype=float)
    n = c.size - 1
    amps = sum(np.sqrt(cm) * double_dicke_state(n, m).amplitudes
               for m, cm in enumerate(c) if cm > 0)
    return StateVector(amps, probe_layout(n, ancilla=True))


def ad_branch_values(gamma: float, n: int, coefficients: np.ndarray) -> tuple[float, float]:
    """(decay branch, no-decay branch) success for a double-Dicke input, from weight data.

    The decay branch leaves probe k in |0> with its flag ancilla in |1>,
    so those outcomes are orthogonal and contribute ``gamma <m> / N``.  The
    no-decay branch has a Gram matrix ``((a-b) I + b J) / N`` whose entries
    follow from counting excited pairs.
    """
    c = np.asarray(coefficients, dtype=float)
    if c.size != n + 1:
        raise ValueError("need N+1 coefficients")
    m = np.arange(n + 1)
    mean_m = float(np.sum(c * m))
    decay = gamma * mean_m / n
    if n == 1:
        # a single hypothesis is identified with certainty
        return decay, 1.0 - decay
    r = np.sqrt(1.0 - gamma)
    diag = float(np.sum(c * (1.0 - gamma * m / n)))
    # diag - off, written without cancellation; off itself counts the excited
    # pairs, ((n-m)(n-m-1) + 2m(n-m) r + m(m-1)(1-gamma)) / (n(n-1))
    gap = float(np.sum(c * m * (n - m))) * gamma**2 / ((1.0 + r) ** 2 * n * (n - 1))
    lam1 = max(n * diag - (n - 1) * gap, 0.0) / n
    lam2 = max(gap, 0.0) / n
    keep = (np.sqrt(lam1) + (n - 1) * np.sqrt(lam2)) ** 2 / n
    return decay, keep


def ad_value(gamma: float, n: int, coefficients: np.ndarray) -> float:
    return float(sum(ad_branch_values(gamma, n, coefficients)))


def ad_explicit_value(channel: AmplitudeDampingChannel, coefficients: np.ndarray,
                      cap: int = ORACLE_CAP) -> dict:
    """Branch bound and exact optimum for a double-Dicke input from explicit 2N-qubit states."""
    c = np.asarray(coefficients, dtype=float)
    n = c.size - 1
    if 2 * n > cap:
        raise QubitCapError(f"{2 * n} qubits exceed the oracle cap of {cap}")
    state = ad_input_state(c)
    kraus = channel.kraus_set()
    branches = [branch_success(branch_vectors(op, state, n)) for op in kraus.operators]
    exact = disc.fixed_point_optimal_povm(conditional_states(kraus, state, n, cap=cap))
    return {
        "branch_bound": float(sum(branches)),
        "branches": branches,
        "exact": exact.success_probability,
        "certificate_slack": exact.certificate.slack,
    }


def ad_ancilla_strategy(channel: AmplitudeDampingChannel, n: int, verify: bool = True,
                        cap: int = ORACLE_CAP) -> StrategyReport:
    """Flagged-ancilla strategy with input ``sqrt(p)|N,N>_pa + sqrt(1-p)|N,N-1>_pa``."""
    gamma = channel.gamma
    if n == 1:
        return StrategyReport("ancilla-assisted", "any", 1.0, "exact",
                              details={"p": 1.0, "verified": True})
    c = ad_two_weight_coefficients(gamma, n)
    decay, keep = ad_branch_values(gamma, n, c)
    value = decay + keep
    details = {"p": ad_opt_coefficient(gamma, n), "decay_branch": decay,
               "no_decay_branch": keep, "verified": False}
    if verify and 2 * n <= cap:
        check = ad_explicit_value(channel, c, cap=cap)
        details["oracle"] = check["exact"]
        details["branch_bound"] = check["branch_bound"]
        details["verified"] = abs(check["exact"] - value) <= 1e-9
    return StrategyReport(
        "ancilla-assisted",
        f"sqrt(p)|{n},{n}>_pa + sqrt(1-p)|{n},{n - 1}>_pa",
        value,
        "exact",
        "flag-parity test, then square-root measurement on the no-decay branch",
        details,
    )


def ad_asymptotic_value(channel: AmplitudeDampingChannel, n: int) -> float:
    """Large-N expansion of the flagged-ancilla optimum through order 1/N^2."""
    g = channel.gamma
    r = np.sqrt(1.0 - g)
    return g + r * (r + 1.0) / (2 * n) - g / (4 * n**2)


def ad_optimize_coefficients(gamma: float, n: int, starts: int = 6,
                             seed: int = 0) -> tuple[np.ndarray, float]:
    """Maximize over every double-Dicke weight vector (cross-check of the two-weight form)."""
    if n > 5:
        raise ValueError("full coefficient search is limited to N <= 5")
    rng = np.random.default_rng(seed)

    def neg(x):
        w = np.exp(x - x.max())
        return -ad_value(gamma, n, w / w.sum())

    best_x, best_v = None, -np.inf
    for _ in range(starts):
        res = minimize(neg, rng.normal(size=n + 1), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        if -res.fun > best_v:
            best_x, best_v = res.x, -res.fun
    w = np.exp(best_x - best_x.max())
    return w / w.sum(), float(best_v)

