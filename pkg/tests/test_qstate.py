import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gyrosim import _kernels_py, qstate
from gyrosim.qstate import ElementaryGate, GateKind, NumericFault, StateVector, apply_gate

from oracles import dense_gate, dense_slice, dense_xx, dense_z_field

KINDS_1Q = [GateKind.HADAMARD, GateKind.PAULI_X, GateKind.PHASE]
KINDS_2Q = [GateKind.CPHASE, GateKind.CNOT, GateKind.SWAP]


def random_state(n, rng):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(n, v / np.linalg.norm(v))


def random_gate(n, rng, perturbed=False):
    kind = rng.choice(KINDS_1Q + (KINDS_2Q if n > 1 else []))
    targets = tuple(int(q) for q in rng.choice(n, kind.arity, replace=False))
    angle = None
    if kind in (GateKind.PHASE, GateKind.CPHASE) or perturbed:
        angle = float(rng.uniform(-4, 4))
    return ElementaryGate(kind, targets, angle)


def dense(n, g):
    return dense_gate(n, g.kind.value, g.targets, g.angle)


def test_basis_state_default():
    sv = StateVector(3)
    assert sv.amps[0] == 1 and sv.norm() == 1


def test_hadamard_on_zero():
    sv = apply_gate(StateVector(1), ElementaryGate(GateKind.HADAMARD, (0,)))
    np.testing.assert_allclose(sv.amps, [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_cnot_flips_target_when_control_set():
    # control 0 set: |01> (index 1) -> |11> (index 3)
    sv = apply_gate(StateVector.basis(2, 1), ElementaryGate(GateKind.CNOT, (0, 1)))
    assert abs(sv.amps[3]) == 1


def test_swap_moves_excitation():
    sv = apply_gate(StateVector.basis(3, 0b001), ElementaryGate(GateKind.SWAP, (0, 2)))
    assert abs(sv.amps[0b100]) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gates_match_dense_oracle(n):
    rng = np.random.default_rng(n)
    for _ in range(60):
        g = random_gate(n, rng, perturbed=rng.random() < 0.5)
        sv = random_state(n, rng)
        expect = dense(n, g) @ sv.amps
        apply_gate(sv, g)
        np.testing.assert_allclose(sv.amps, expect, atol=1e-12)


def test_three_qubit_sequence_matches_dense_product():
    rng = np.random.default_rng(7)
    gates = [random_gate(3, rng) for _ in range(25)]
    u = np.eye(8, dtype=complex)
    sv = random_state(3, rng)
    start = sv.amps.copy()
    for g in gates:
        u = dense(3, g) @ u
        apply_gate(sv, g)
    np.testing.assert_allclose(sv.amps, u @ start, atol=1e-10)


@pytest.mark.parametrize("kind", list(GateKind))
def test_gate_matrix_is_unitary(kind):
    targets = (0,) if kind.arity == 1 else (0, 1)
    for angle in ([None, 0.3, math.pi + 0.01] if kind in qstate.FIXED_KINDS else [0.3, -2.0]):
        m = ElementaryGate(kind, targets, angle).matrix()
        np.testing.assert_allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-12)


@pytest.mark.parametrize("kind", sorted(qstate.FIXED_KINDS, key=lambda k: k.value))
def test_rotation_angle_pi_reproduces_fixed_gate(kind):
    targets = (0,) if kind.arity == 1 else (0, 1)
    exact = ElementaryGate(kind, targets).matrix()
    rot = ElementaryGate(kind, targets, math.pi).matrix()
    np.testing.assert_allclose(rot, exact, atol=1e-12)


def test_invalid_gates_rejected():
    with pytest.raises(ValueError):
        ElementaryGate(GateKind.CNOT, (1, 1))
    with pytest.raises(ValueError):
        ElementaryGate(GateKind.HADAMARD, (0, 1))
    with pytest.raises(ValueError):
        ElementaryGate(GateKind.PHASE, (0,))
    with pytest.raises(ValueError):
        ElementaryGate(GateKind.PHASE, (0,), float("nan"))


def test_target_out_of_range():
    with pytest.raises(IndexError):
        apply_gate(StateVector(2), ElementaryGate(GateKind.HADAMARD, (2,)))


def test_wrong_amplitude_count():
    with pytest.raises(ValueError):
        StateVector(2, np.ones(3))


def test_check_finite_raises():
    sv = StateVector(2)
    sv.amps[1] = np.nan
    with pytest.raises(NumericFault):
        sv.check_finite()


def test_gate_dump_format():
    assert str(ElementaryGate(GateKind.CPHASE, (0, 3), 0.5)) == "CPHASE 0 3 0.5"
    assert str(ElementaryGate(GateKind.HADAMARD, (2,))) == "H 2"


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_z_field_matches_dense(n):
    rng = np.random.default_rng(11 + n)
    a = rng.uniform(-1, 1, n)
    np.testing.assert_allclose(qstate.z_field_diagonal(n, a), np.diag(dense_z_field(n, a)), atol=1e-13)


def test_z_field_on_basis_state_phase():
    # sigma_z|0> = +|0>: all-zero state picks up exp(-i sum a)
    a = [0.1, 0.2, 0.3]
    sv = qstate.apply_diagonal_z_field(StateVector(3), a)
    assert abs(sv.amps[0] - np.exp(-0.6j)) < 1e-14


@pytest.mark.parametrize("n", [2, 3, 4])
def test_xx_coupling_matches_dense(n):
    rng = np.random.default_rng(n)
    pairs = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
    b = rng.uniform(-1, 1, len(pairs))
    sv = random_state(n, rng)
    expect = dense_xx(n, b, pairs) @ sv.amps
    qstate.apply_xx_coupling(sv, b, pairs)
    np.testing.assert_allclose(sv.amps, expect, atol=1e-12)


def test_xx_rejects_overlapping_pair():
    with pytest.raises(ValueError):
        qstate.apply_xx_coupling(StateVector(2), [0.1], [(1, 1)])


def test_slice_matches_dense():
    rng = np.random.default_rng(3)
    n = 3
    pairs = [(0, 1), (1, 2), (2, 0)]
    a, b = rng.uniform(-0.5, 0.5, n), rng.uniform(-0.5, 0.5, 3)
    sv = random_state(n, rng)
    expect = dense_slice(n, a, b, pairs) @ sv.amps
    qstate.apply_diagonal_z_field(sv, a)
    qstate.apply_xx_coupling(sv, b, pairs)
    np.testing.assert_allclose(sv.amps, expect, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_swap_is_involution(n, data):
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda x: x != i))
    sv = random_state(n, np.random.default_rng(n * 31 + i))
    before = sv.amps.copy()
    g = ElementaryGate(GateKind.SWAP, (i, j))
    apply_gate(apply_gate(sv, g), g)
    np.testing.assert_allclose(sv.amps, before, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.floats(-3, 3), st.floats(-3, 3), st.data())
def test_xx_terms_commute(n, b1, b2, data):
    p1 = tuple(data.draw(st.permutations(range(n)))[:2])
    p2 = tuple(data.draw(st.permutations(range(n)))[:2])
    rng = np.random.default_rng(n)
    s1, s2 = random_state(n, rng), None
    s2 = s1.copy()
    qstate.apply_xx_coupling(s1, [b1, b2], [p1, p2])
    qstate.apply_xx_coupling(s2, [b2, b1], [p2, p1])
    np.testing.assert_allclose(s1.amps, s2.amps, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_gates_preserve_norm(n, seed):
    rng = np.random.default_rng(seed)
    sv = random_state(n, rng)
    for _ in range(10):
        apply_gate(sv, random_gate(n, rng, perturbed=True))
    assert abs(sv.norm() - 1) < 1e-12


def test_overlap_conjugates_first_argument():
    a = StateVector(1, [1j, 0])
    b = StateVector(1, [1, 0])
    assert qstate.overlap(a, b) == -1j


def test_overlap_dimension_mismatch():
    with pytest.raises(ValueError):
        qstate.overlap(StateVector(1), StateVector(2))


@pytest.mark.skipif(qstate.BACKEND != "cython", reason="compiled kernels not built")
def test_compiled_kernels_match_numpy_fallback():
    from gyrosim import _kernels as ck

    rng = np.random.default_rng(5)
    n = 6
    for _ in range(50):
        v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        q, r = (int(x) for x in rng.choice(n, 2, replace=False))
        m = rng.normal(size=4) + 1j * rng.normal(size=4)
        c, s = math.cos(0.3), math.sin(0.3)
        calls = [
            ("apply_1q", (q, *m)),
            ("apply_c1q", (q, r, *m)),
            ("apply_cnot", (q, r)),
            ("apply_cphase", (q, r, complex(m[0]))),
            ("apply_swap", (q, r)),
            ("apply_xx", (q, r, c, s)),
        ]
        for name, args in calls:
            a, b = v.copy(), v.copy()
            getattr(ck, name)(a, *args)
            getattr(_kernels_py, name)(b, *args)
            np.testing.assert_allclose(a, b, atol=1e-12, err_msg=name)
