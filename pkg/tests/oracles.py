"""Brute-force dense references, built independently of the kernels.

Everything here works with explicit 2^n x 2^n matrices assembled from
Kronecker products, so it is only usable for a handful of qubits.
"""
import math
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def embed(n, ops):
    """Kronecker product with ``ops[k]`` on qubit k (identity elsewhere).

    Qubit k is bit k of the basis index, so the highest qubit is the
    leftmost factor.
    """
    return reduce(np.kron, [ops.get(k, I2) for k in reversed(range(n))])


def rotation(axis, angle):
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * axis


HX_AXIS = (PX + PZ) / math.sqrt(2)


def one_qubit_matrix(kind, angle):
    if kind == "H":
        return HX_AXIS.copy() if angle is None else 1j * rotation(HX_AXIS, angle)
    if kind == "X":
        return PX.copy() if angle is None else 1j * rotation(PX, angle)
    if kind == "PHASE":
        return np.diag([1, np.exp(1j * angle)])
    raise ValueError(kind)


def dense_gate(n, kind, targets, angle=None):
    if kind in ("H", "X", "PHASE"):
        return embed(n, {targets[0]: one_qubit_matrix(kind, angle)})
    a, b = targets
    if kind == "CPHASE":
        return np.eye(2 ** n) + (np.exp(1j * angle) - 1) * embed(n, {a: P1, b: P1})
    if kind == "CNOT":
        u = one_qubit_matrix("X", angle)
        return embed(n, {a: P0}) + embed(n, {a: P1, b: u})
    if kind == "SWAP":
        u = one_qubit_matrix("X", angle)
        cab = embed(n, {a: P0}) + embed(n, {a: P1, b: u})
        cba = embed(n, {b: P0}) + embed(n, {b: P1, a: u})
        return cab @ cba @ cab
    raise ValueError(kind)


def dense_z_field(n, a):
    h = sum(a[k] * embed(n, {k: PZ}) for k in range(n))
    return np.diag(np.exp(-1j * np.diag(h)))


def dense_xx(n, b, pairs):
    u = np.eye(2 ** n, dtype=complex)
    for bij, (i, j) in zip(b, pairs):
        xx = embed(n, {i: PX, j: PX})
        u = (math.cos(bij) * np.eye(2 ** n) - 1j * math.sin(bij) * xx) @ u
    return u


def dense_slice(n, a, b, pairs):
    """exp(-i sum a sigma_z) applied first, then the xx couplings."""
    return dense_xx(n, b, pairs) @ dense_z_field(n, a)


def grover_iteration_matrix(n_q, target):
    """Oracle then inversion about the mean, on the register only."""
    n = 2 ** n_q
    oracle = np.eye(n)
    oracle[target, target] = -1
    s = np.full(n, 1 / math.sqrt(n))
    diffusion = 2 * np.outer(s, s) - np.eye(n)
    return diffusion @ oracle


def permute_qubits(amps, perm):
    """Logical-frame amplitudes from physical ones, ``perm[logical] = physical``."""
    n = len(perm)
    out = np.empty_like(amps)
    for x in range(2 ** n):
        y = 0
        for logical, phys in enumerate(perm):
            if (x >> logical) & 1:
                y |= 1 << phys
        out[x] = amps[y]
    return out
