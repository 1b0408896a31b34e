"""Statevector storage and exact gate / imperfection kernels.

Basis convention: index ``x`` stores qubit ``k`` as bit ``k`` of ``x``
(qubit 0 is the least significant bit). ``sigma_z |0> = +|0>``.

The hot loops live in ``gyrosim._kernels`` (Cython). When the extension is
not built, or ``GYROSIM_BACKEND=python`` is set, the numpy implementation
in ``gyrosim._kernels_py`` is used instead.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from gyrosim import _kernels_py

if os.environ.get("GYROSIM_BACKEND", "").lower() == "python":
    _k = _kernels_py
else:
    try:
        from gyrosim import _kernels as _k  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _k = _kernels_py

BACKEND = "cython" if _k is not _kernels_py else "python"

_SQ2 = 1.0 / math.sqrt(2.0)


class NumericFault(FloatingPointError):
    """A kernel produced a non-finite amplitude."""


class GateKind(enum.Enum):
    HADAMARD = "H"
    PAULI_X = "X"
    PHASE = "PHASE"
    CPHASE = "CPHASE"
    CNOT = "CNOT"
    SWAP = "SWAP"

    @property
    def arity(self) -> int:
        return 1 if self in (GateKind.HADAMARD, GateKind.PAULI_X, GateKind.PHASE) else 2


# kinds whose nominal form carries no angle; an explicit angle means the
# gate is the rotation-angle-perturbed version (nominal angle pi)
FIXED_KINDS = frozenset({GateKind.HADAMARD, GateKind.PAULI_X, GateKind.CNOT, GateKind.SWAP})


@dataclass(frozen=True)
class ElementaryGate:
    """One- or two-qubit gate.

    For ``PHASE``/``CPHASE`` the angle is the phase put on ``|1>``/``|11>``.
    For the fixed kinds ``angle=None`` is the exact gate; a float angle is the
    rotation angle of the equivalent rotation (pi reproduces the exact gate).
    For ``CNOT`` the targets are ``(control, target)``.
    """

    kind: GateKind
    targets: tuple
    angle: Optional[float] = None

    def __post_init__(self):
        if len(self.targets) != self.kind.arity:
            raise ValueError(f"{self.kind.value} acts on {self.kind.arity} qubit(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"gate targets must be distinct, got {self.targets}")
        if any(int(t) != t or t < 0 for t in self.targets):
            raise ValueError(f"gate targets must be non-negative integers, got {self.targets}")
        if self.kind in (GateKind.PHASE, GateKind.CPHASE) and self.angle is None:
            raise ValueError(f"{self.kind.value} requires an angle")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValueError(f"gate angle must be finite, got {self.angle}")

    def with_targets(self, targets: Sequence[int]) -> "ElementaryGate":
        return ElementaryGate(self.kind, tuple(int(t) for t in targets), self.angle)

    def matrix(self) -> np.ndarray:
        """Dense unitary on the gate's own qubits.

        Local index bit j corresponds to ``targets[j]``.
        """
        k = self.kind
        if k is GateKind.HADAMARD:
            return _h_matrix(self.angle)
        if k is GateKind.PAULI_X:
            return _x_matrix(self.angle)
        if k is GateKind.PHASE:
            return np.diag([1.0, np.exp(1j * self.angle)])
        if k is GateKind.CPHASE:
            return np.diag([1.0, 1.0, 1.0, np.exp(1j * self.angle)])
        if k is GateKind.CNOT:
            return _controlled(_x_matrix(self.angle), 0, 1)
        # swap as three CNOTs: (0->1), (1->0), (0->1)
        x = _x_matrix(self.angle)
        a = _controlled(x, 0, 1)
        b = _controlled(x, 1, 0)
        return a @ b @ a

    def __str__(self) -> str:
        parts = [self.kind.value, *map(str, self.targets)]
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


def _h_matrix(angle):
    if angle is None:
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    # i * exp(-i angle/2 (X+Z)/sqrt2)
    return np.array([[1j * c + s * _SQ2, s * _SQ2], [s * _SQ2, 1j * c - s * _SQ2]])


def _x_matrix(angle):
    if angle is None:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[1j * c, s], [s, 1j * c]])


def _controlled(u, ctrl, tgt):
    m = np.eye(4, dtype=complex)
    cbit, tbit = 1 << ctrl, 1 << tgt
    idx = [cbit, cbit | tbit]
    m[np.ix_(idx, idx)] = u
    return m


class StateVector:
    """``2**n_tot`` complex amplitudes over the physical register."""

    __slots__ = ("n_tot", "amps")

    def __init__(self, n_tot: int, amps: Optional[np.ndarray] = None):
        if n_tot < 1:
            raise ValueError(f"n_tot must be >= 1, got {n_tot}")
        self.n_tot = int(n_tot)
        if amps is None:
            amps = np.zeros(1 << self.n_tot, dtype=np.complex128)
            amps[0] = 1.0
        else:
            amps = np.ascontiguousarray(amps, dtype=np.complex128)
            if amps.shape != (1 << self.n_tot,):
                raise ValueError(f"expected {1 << self.n_tot} amplitudes, got shape {amps.shape}")
        self.amps = amps

    @classmethod
    def basis(cls, n_tot: int, index: int) -> "StateVector":
        sv = cls(n_tot)
        sv.amps[0] = 0.0
        sv.amps[index] = 1.0
        return sv

    def copy(self) -> "StateVector":
        return StateVector(self.n_tot, self.amps.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return self.amps.real ** 2 + self.amps.imag ** 2

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.amps)):
            raise NumericFault("non-finite amplitude in state vector")

    def __repr__(self) -> str:
        return f"StateVector(n_tot={self.n_tot})"


def _check_targets(state: StateVector, targets) -> None:
    for t in targets:
        if t >= state.n_tot:
            raise IndexError(f"qubit {t} out of range for {state.n_tot}-qubit state")


def apply_gate(state: StateVector, gate: ElementaryGate) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return it."""
    _check_targets(state, gate.targets)
    apply_raw(state.amps, gate.kind, gate.targets, gate.angle)
    return state


def apply_raw(amps: np.ndarray, kind: GateKind, targets, angle) -> None:
    """Unchecked gate application on a raw amplitude array (hot path)."""
    if kind is GateKind.CPHASE:
        _k.apply_cphase(amps, targets[0], targets[1], complex(math.cos(angle), math.sin(angle)))
    elif kind is GateKind.PHASE:
        _k.apply_1q(amps, targets[0], 1.0, 0.0, 0.0, complex(math.cos(angle), math.sin(angle)))
    elif kind is GateKind.CNOT:
        c, t = targets
        if angle is None:
            _k.apply_cnot(amps, c, t)
        else:
            m = _x_matrix(angle)
            _k.apply_c1q(amps, c, t, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    elif kind is GateKind.SWAP:
        a, b = targets
        if angle is None:
            _k.apply_swap(amps, a, b)
        else:
            m = _x_matrix(angle)
            args = (m[0, 0], m[0, 1], m[1, 0], m[1, 1])
            _k.apply_c1q(amps, a, b, *args)
            _k.apply_c1q(amps, b, a, *args)
            _k.apply_c1q(amps, a, b, *args)
    else:
        m = _h_matrix(angle) if kind is GateKind.HADAMARD else _x_matrix(angle)
        _k.apply_1q(amps, targets[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def z_field_diagonal(n_tot: int, a: Sequence[float]) -> np.ndarray:
    """Diagonal of exp(-i sum_k a_k sigma_z^(k)) in the computational basis."""
    a = np.asarray(a, dtype=float)
    if a.shape != (n_tot,):
        raise ValueError(f"expected {n_tot} z-field coefficients, got shape {a.shape}")
    return _kernels_py.z_field_diagonal(n_tot, a)


def apply_diagonal(state: StateVector, diag: np.ndarray) -> StateVector:
    """Multiply amplitudes elementwise by a precomputed diagonal."""
    _k.apply_diagonal(state.amps, diag)
    return state


def apply_diagonal_raw(amps: np.ndarray, diag: np.ndarray) -> None:
    _k.apply_diagonal(amps, diag)


def apply_diagonal_z_field(state: StateVector, a: Sequence[float]) -> StateVector:
    """Apply exp(-i sum_k a_k sigma_z^(k)) in place."""
    return apply_diagonal(state, z_field_diagonal(state.n_tot, a))


def apply_xx_coupling(state: StateVector, b: Sequence[float], pairs: Sequence[tuple]) -> StateVector:
    """Apply prod_(ij) exp(-i b_ij sigma_x^(i) sigma_x^(j)) in place.

    The factors commute, so the product is the exact exponential of the sum.
    """
    b = np.asarray(b, dtype=float)
    if len(b) != len(pairs):
        raise ValueError(f"{len(b)} couplings for {len(pairs)} pairs")
    ii = np.empty(len(pairs), dtype=np.int64)
    jj = np.empty(len(pairs), dtype=np.int64)
    for p, (i, j) in enumerate(pairs):
        if i == j:
            raise ValueError(f"coupling pair ({i}, {j}) has overlapping indices")
        _check_targets(state, (i, j))
        ii[p], jj[p] = i, j
    apply_xx_arrays(state.amps, ii, jj, b)
    return state


def apply_xx_arrays(amps: np.ndarray, ii: np.ndarray, jj: np.ndarray, b: np.ndarray) -> None:
    """Unchecked xx couplings; ``ii``/``jj`` are int64 pair endpoints."""
    _k.apply_xx_many(amps, ii, jj, np.cos(b), np.sin(b))


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b> = sum_x conj(a[x]) b[x]."""
    if a.n_tot != b.n_tot:
        raise ValueError(f"overlap of {a.n_tot}- and {b.n_tot}-qubit states")
    return complex(np.vdot(a.amps, b.amps))
