"""Dense qubit-register primitives shared by every solver in the package.

Qubit 0 is the most significant bit of a basis index, matching ``np.kron``
ordering.  Registers carry a layout tuple of labels ``"p1", "a1", ...``
naming probe ``k`` and its ancilla ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

QUBIT_CAP = 24
EIG_CLAMP = 1e-10
NON_PSD_TOL = 1e-8
KRAUS_TOL = 1e-10


class QubitCapError(ValueError):
    """Raised when a dense construction would exceed the qubit cap."""


class NotPSDError(ValueError):
    pass


class KrausCompletenessError(ValueError):
    pass


def _check_cap(n_qubits: int, cap: int | None = None) -> None:
    cap = QUBIT_CAP if cap is None else cap
    if n_qubits > cap:
        raise QubitCapError(f"{n_qubits} qubits exceeds the cap of {cap}")


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def probe_layout(n: int, ancilla: bool = False) -> tuple[str, ...]:
    """Register layout for ``n`` probes, each followed by its ancilla if requested."""
    if ancilla:
        return tuple(lbl for k in range(1, n + 1) for lbl in (f"p{k}", f"a{k}"))
    return tuple(f"p{k}" for k in range(1, n + 1))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    layout: tuple[str, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if len(self.layout) != n_qubits_of(amps.size):
            raise ValueError("layout length does not match the number of qubits")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {norm:.3e})")

    @property
    def n_qubits(self) -> int:
        return len(self.layout)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def qubit_index(self, label: str) -> int:
        return self.layout.index(label)


@dataclass(frozen=True)
class KrausSet:
    """Single-qubit channel in operator-sum form."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops or any(k.shape != (2, 2) for k in ops):
            raise ValueError("Kraus operators must be a non-empty list of 2x2 matrices")
        total = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(total - np.eye(2)))
        if err > KRAUS_TOL:
            raise KrausCompletenessError(f"sum K^dag K deviates from identity by {err:.3e}")
        object.__setattr__(self, "operators", ops)

    @property
    def rank(self) -> int:
        return len(self.operators)

    @classmethod
    def identity(cls) -> "KrausSet":
        return cls((np.eye(2),))

    def kraus_set(self) -> "KrausSet":
        return self


def computational_state(bits: Sequence[int], layout: Sequence[str] | None = None) -> StateVector:
    n = len(bits)
    _check_cap(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[int("".join(str(int(b)) for b in bits) or "0", 2)] = 1.0
    return StateVector(amps, tuple(layout) if layout else probe_layout(n))


def product_state(qubit: np.ndarray, n: int) -> StateVector:
    """``|q>^{(x) n}`` over an ``n``-probe layout."""
    _check_cap(n)
    q = np.asarray(qubit, dtype=complex)
    q = q / np.linalg.norm(q)
    amps = np.ones(1, dtype=complex)
    for _ in range(n):
        amps = np.kron(amps, q)
    return StateVector(amps, probe_layout(n))


def tensor_product(a, b, cap: int | None = None):
    """Kronecker product of two states or two operators.

    State layouts are concatenated in argument order.  Raises
    ``QubitCapError`` when the result would exceed ``cap`` qubits.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        _check_cap(a.n_qubits + b.n_qubits, cap)
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.layout + b.layout)
    a = np.asarray(a)
    b = np.asarray(b)
    n = n_qubits_of(a.shape[0]) + n_qubits_of(b.shape[0])
    _check_cap(n, cap)
    return np.kron(a, b)


def _apply_to_axis(op: np.ndarray, tensor: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(op, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def apply_op_to_vector(vec: np.ndarray, op: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 operator to one qubit of a state vector (no normalization)."""
    vec = np.asarray(vec)
    n = n_qubits_of(vec.size)
    t = _apply_to_axis(op, vec.reshape((2,) * n), qubit)
    return t.reshape(-1)


def conjugate_by_op(rho: np.ndarray, op: np.ndarray, qubit: int) -> np.ndarray:
    """``O rho O^dag`` with ``O`` acting on ``qubit`` of a density matrix."""
    n = n_qubits_of(rho.shape[0])
    t = rho.reshape((2,) * (2 * n))
    t = _apply_to_axis(op, t, qubit)
    t = _apply_to_axis(op.conj(), t, n + qubit)
    return t.reshape(rho.shape)


def _resolve_qubit(position: int, layout: Sequence[str] | None, n: int) -> int:
    layout = tuple(layout) if layout is not None else probe_layout(n)
    if len(layout) != n:
        raise ValueError("layout does not match the operator dimension")
    label = f"p{position}"
    if label not in layout:
        raise ValueError(f"position {position} out of range for layout {layout}")
    return layout.index(label)


def apply_kraus_at(
    rho: np.ndarray,
    kraus: KrausSet,
    position: int,
    layout: Sequence[str] | None = None,
) -> np.ndarray:
    """Apply a single-qubit channel to probe ``position`` (1-based) of ``rho``.

    Without a layout the register is taken to be probes only.
    """
    if not isinstance(kraus, KrausSet):
        kraus = KrausSet(tuple(kraus))
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho.shape[0])
    q = _resolve_qubit(position, layout, n)
    return sum(conjugate_by_op(rho, k, q) for k in kraus.operators)


def apply_adjoint_at(
    op: np.ndarray,
    kraus: KrausSet,
    position: int,
    layout: Sequence[str] | None = None,
) -> np.ndarray:
    """Heisenberg-picture action ``sum_i K_i^dag X K_i`` on probe ``position``."""
    n = n_qubits_of(op.shape[0])
    q = _resolve_qubit(position, layout, n)
    return sum(conjugate_by_op(op, k.conj().T, q) for k in kraus.operators)


def eigh_psd(m: np.ndarray, *, clamp: float = NON_PSD_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian PSD matrix with round-off clamping."""
    m = np.asarray(m)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    if w.size and w[0] < -clamp:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} below -{clamp:g}")
    return np.clip(w, 0.0, None), v


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    """Unique PSD square root of a Hermitian PSD matrix."""
    w, v = eigh_psd(m)
    # eigenvalues at round-off level would be inflated by the square root
    if w.size:
        w = np.where(w > 16 * np.finfo(float).eps * w.size * abs(w[-1]), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def dicke_state(n: int, m: int) -> StateVector:
    """Equal superposition of all ``n``-qubit strings of Hamming weight ``m``."""
    if not 0 <= m <= n:
        raise ValueError(f"weight m={m} out of range for n={n}")
    _check_cap(n)
    amps = np.zeros(2**n, dtype=complex)
    for ones in itertools.combinations(range(n), m):
        amps[sum(1 << (n - 1 - q) for q in ones)] = 1.0
    amps /= np.sqrt(comb(n, m))
    return StateVector(amps, probe_layout(n))


def double_dicke_state(n: int, m: int) -> StateVector:
    """Symmetrized probe-ancilla pairs, ``m`` pairs in ``|11>`` and the rest in ``|00>``.

    The layout interleaves each probe with its flag ancilla.
    """
    if not 0 <= m <= n:
        raise ValueError(f"weight m={m} out of range for n={n}")
    _check_cap(2 * n)
    nq = 2 * n
    amps = np.zeros(2**nq, dtype=complex)
    for pairs in itertools.combinations(range(n), m):
        idx = 0
        for k in pairs:
            idx |= (1 << (nq - 1 - 2 * k)) | (1 << (nq - 2 - 2 * k))
        amps[idx] = 1.0
    amps /= np.sqrt(comb(n, m))
    return StateVector(amps, probe_layout(n, ancilla=True))


def superpose(components: dict[int, complex], basis) -> StateVector:
    """``sum_m a_m |basis(m)>`` for orthonormal basis states sharing one layout."""
    states = {m: basis(m) for m in components}
    layout = next(iter(states.values())).layout
    amps = sum(a * states[m].amplitudes for m, a in components.items())
    return StateVector(amps / np.linalg.norm(amps), layout)
