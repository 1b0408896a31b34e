"""Static imperfections and random gate errors.

Between gates every qubit feels a detuning ``a_i sigma_z`` and every coupled
pair an ``b_ij sigma_x sigma_x`` interaction; one *slice* is the unitary
``exp(-i sum a_i sigma_z) exp(-i sum b_ij sigma_x sigma_x)`` (both factors
exact, z-field applied first). Coefficients are uniform on ``[-eps, eps]``.

Modes:

``NONE``         ideal evolution
``STATIC``       one frozen set of coefficients, the same slice after every gate
``FLUCTUATING``  coefficients redrawn for every slice
``GATE_ANGLE``   no slice; each gate's rotation angle is shifted by U(-eps, eps)
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from gyrosim import qstate
from gyrosim.qstate import ElementaryGate, GateKind, StateVector

TOPOLOGIES = ("ring", "chain", "all")


class Mode(enum.Enum):
    NONE = "none"
    STATIC = "static"
    FLUCTUATING = "fluctuating"
    GATE_ANGLE = "gate_angle"


def coupling_pairs(n_tot: int, topology: str = "ring") -> list:
    if topology == "ring":
        return [(i, (i + 1) % n_tot) for i in range(n_tot)]
    if topology == "chain":
        return [(i, i + 1) for i in range(n_tot - 1)]
    if topology == "all":
        return [(i, j) for i in range(n_tot) for j in range(i + 1, n_tot)]
    raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


@dataclass(frozen=True)
class DisorderRealization:
    """Frozen detunings ``a`` and couplings ``b`` for one disorder sample."""

    a: np.ndarray
    b: np.ndarray
    epsilon: float
    seed: int
    topology: str = "ring"

    @property
    def n_tot(self) -> int:
        return len(self.a)

    @property
    def pairs(self) -> list:
        return coupling_pairs(self.n_tot, self.topology)

    def to_text(self) -> str:
        lines = [
            f"# n_tot={self.n_tot}",
            f"# epsilon={float(self.epsilon)!r}",
            f"# seed={self.seed}",
            f"# topology={self.topology}",
        ]
        lines += [f"a {float(x)!r}" for x in self.a]
        lines += [f"b {float(x)!r}" for x in self.b]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DisorderRealization":
        header, a, b = {}, [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
                continue
            tag, val = line.split()
            (a if tag == "a" else b).append(float(val))
        real = cls(
            a=np.array(a), b=np.array(b), epsilon=float(header["epsilon"]),
            seed=int(header["seed"]), topology=header.get("topology", "ring"),
        )
        if real.n_tot != int(header["n_tot"]) or len(b) != len(real.pairs):
            raise ValueError("disorder file inconsistent with its header")
        return real


def sample_static_disorder(n_tot: int, epsilon: float, seed: int, topology: str = "ring") -> DisorderRealization:
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    rng = np.random.default_rng(seed)
    npairs = len(coupling_pairs(n_tot, topology))
    a = rng.uniform(-epsilon, epsilon, n_tot)
    b = rng.uniform(-epsilon, epsilon, npairs)
    return DisorderRealization(a=a, b=b, epsilon=float(epsilon), seed=int(seed), topology=topology)


@dataclass
class ErrorModel:
    mode: Mode = Mode.NONE
    epsilon: float = 0.0
    realization: Optional[DisorderRealization] = None
    topology: str = "ring"
    # GYQEC swaps are treated as ideal by default; True also perturbs them
    slice_after_swaps: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.mode is Mode.STATIC:
            if self.realization is None:
                raise ValueError("static mode needs a disorder realization")
            self.epsilon = self.realization.epsilon
            self.topology = self.realization.topology

    @classmethod
    def static(cls, n_tot, epsilon, seed, topology="ring", **kw):
        return cls(Mode.STATIC, realization=sample_static_disorder(n_tot, epsilon, seed, topology), **kw)

    def _static_parts(self, n_tot):
        parts = self._cache.get(n_tot)
        if parts is None:
            real = self.realization
            if real.n_tot != n_tot:
                raise ValueError(f"realization is for {real.n_tot} qubits, state has {n_tot}")
            ii, jj = _pair_arrays(real.pairs)
            parts = (qstate.z_field_diagonal(n_tot, real.a), ii, jj, np.asarray(real.b, dtype=float))
            self._cache[n_tot] = parts
        return parts

    def slice_function(self, n_tot: int, rng: Optional[np.random.Generator] = None):
        """Return ``f(amps)`` applying one slice in place, or None if there is none."""
        if self.mode is Mode.STATIC:
            diag, ii, jj, b = self._static_parts(n_tot)

            def static_slice(amps):
                qstate.apply_diagonal_raw(amps, diag)
                qstate.apply_xx_arrays(amps, ii, jj, b)
            return static_slice
        if self.mode is Mode.FLUCTUATING:
            if rng is None:
                raise ValueError("fluctuating mode needs a random stream")
            eps = self.epsilon
            ii, jj = _pair_arrays(coupling_pairs(n_tot, self.topology))

            def fluctuating_slice(amps):
                a = rng.uniform(-eps, eps, n_tot)
                b = rng.uniform(-eps, eps, len(ii))
                qstate.apply_diagonal_raw(amps, qstate.z_field_diagonal(n_tot, a))
                qstate.apply_xx_arrays(amps, ii, jj, b)
            return fluctuating_slice
        return None


def _pair_arrays(pairs):
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def apply_slice(state: StateVector, a, b, pairs) -> StateVector:
    """One slice with explicit coefficients."""
    qstate.apply_diagonal_z_field(state, a)
    return qstate.apply_xx_coupling(state, b, pairs)


def apply_imperfection_slice(state: StateVector, model: ErrorModel, rng: Optional[np.random.Generator] = None) -> StateVector:
    """Apply one slice per ``model`` in place; a no-op for NONE and GATE_ANGLE."""
    fn = model.slice_function(state.n_tot, rng)
    if fn is not None:
        fn(state.amps)
    return state


def perturb_gate(gate: ElementaryGate, epsilon: float, rng: np.random.Generator) -> ElementaryGate:
    """Shift the gate's rotation angle by an independent U(-eps, eps) draw.

    Fixed gates are rotations by pi (Hadamard about (x+z)/sqrt2, X and CNOT
    about x, SWAP as three CNOTs sharing one draw) and get angle pi + delta.
    """
    if epsilon == 0:
        return gate
    delta = rng.uniform(-epsilon, epsilon)
    base = math.pi if gate.angle is None and gate.kind in qstate.FIXED_KINDS else gate.angle
    return ElementaryGate(gate.kind, gate.targets, base + delta)
