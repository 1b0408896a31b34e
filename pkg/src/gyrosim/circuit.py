"""Grover iteration compiler.

One Grover iteration on ``n_q`` register qubits (0 .. n_q-1) plus one ancilla
(qubit ``n_q``) is emitted as a flat list of one- and two-qubit gates.
The ancilla sits in ``|->`` between iterations.

Both reflections (oracle about ``|target>``, diffusion about ``|0..0>``
between Hadamard layers) are phase flips on a single register basis state,
``pi * prod_k [x_k == p_k]``. They are compiled by the same routine:

* ``n_q >= 4``: a compute / phase / uncompute ladder of Toffolis. The ancilla
  (turned into a clean ``|1>`` by a Hadamard) receives the first AND flag;
  every later flag is written into a register qubit that is known to be in a
  fixed basis state whenever the flags still pending are satisfied
  ("conditionally clean"). Each step retires one control, so ``n_q - 3``
  Toffolis bring the control set down to three, which get a doubly
  controlled phase.
* ``n_q in (2, 3)``: a Toffoli-network flip of the ``|->`` ancilla (phase
  kickback), using one register qubit as borrowed workspace for ``n_q = 3``.

Control polarities (which bits must be 0) never cost X gates: a Toffoli
whose controls are negated keeps its 5 two-qubit gates with different
phase angles, and the unconditional target flip left over is tracked as a
change of the flag's polarity. The final doubly controlled phase is always
6 gates, so the gate count depends on ``n_q`` only.

Gate count per iteration, with ``n = n_q``::

    n = 2       -> 16
    n = 3       -> 42
    n >= 4      -> 30 n - 76
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from gyrosim.qstate import ElementaryGate, GateKind, StateVector, apply_gate

PI = math.pi
HALF_PI = PI / 2

MAX_QUBITS = 20


def H(q):
    return ElementaryGate(GateKind.HADAMARD, (q,))


def X(q):
    return ElementaryGate(GateKind.PAULI_X, (q,))


def PHASE(q, angle):
    return ElementaryGate(GateKind.PHASE, (q,), _wrap(angle))


def CP(a, b, angle):
    return ElementaryGate(GateKind.CPHASE, (a, b), _wrap(angle))


def CNOT(c, t):
    return ElementaryGate(GateKind.CNOT, (c, t))


def _wrap(angle):
    # into (-pi, pi]
    a = math.remainder(angle, 2 * PI)
    return PI if a == -PI else a


@dataclass(frozen=True)
class GateProgram:
    """One compiled Grover iteration."""

    gates: tuple
    n_q: int
    target: int

    @property
    def n_tot(self) -> int:
        return self.n_q + 1

    @property
    def ancilla(self) -> int:
        return self.n_q

    @property
    def n_g(self) -> int:
        return len(self.gates)

    def dump(self) -> str:
        """One gate per line: ``KIND q_i [q_j] [angle]``."""
        return "\n".join(str(g) for g in self.gates)


@dataclass(frozen=True)
class GroverSchedule:
    t_G: int
    t_max: int


def count_gates(program: GateProgram | Sequence[ElementaryGate]) -> int:
    gates = program.gates if isinstance(program, GateProgram) else program
    return len(gates)


def grover_angle(n_q: int) -> float:
    return math.asin(2.0 ** (-n_q / 2))


def ideal_w_G(n_q: int, t) -> float:
    """Closed-form searched-state probability after ``t`` ideal iterations."""
    return math.sin((2 * t + 1) * grover_angle(n_q)) ** 2


def ideal_t_G(n_q: int) -> int:
    """Integer iteration count maximising the ideal searched-state probability."""
    if n_q < 2:
        raise ValueError(f"n_q must be >= 2, got {n_q}")
    theta = grover_angle(n_q)
    guess = round(PI / (4 * theta) - 0.5)
    cands = [t for t in (guess - 1, guess, guess + 1) if t >= 0]
    return max(cands, key=lambda t: (ideal_w_G(n_q, t), -t))


def default_schedule(n_q: int, horizon_factor: float = 3.0) -> GroverSchedule:
    t_G = ideal_t_G(n_q)
    return GroverSchedule(t_G=t_G, t_max=int(math.ceil(horizon_factor * t_G)))


def preparation_gates(n_q: int) -> List[ElementaryGate]:
    """|0..0> -> uniform register superposition with the ancilla in |->."""
    return [H(q) for q in range(n_q)] + [X(n_q), H(n_q)]


def start_state(n_q: int) -> StateVector:
    sv = StateVector(n_q + 1)
    for g in preparation_gates(n_q):
        apply_gate(sv, g)
    return sv


# --------------------------------------------------------------------------
# polarity-aware building blocks


def _ccz_core(c1, q1, c2, q2, t):
    """Five-gate diagonal: phase pi * t * y1 * y2, minus its t-linear part.

    ``y_k = x_k`` for ``q_k == 0`` and ``1 - x_k`` for ``q_k == 1``. The
    expansion's ``pi * q1 * q2 * t`` term is left out; callers account for it.
    """
    s1, s2 = 1 - 2 * q1, 1 - 2 * q2
    # phase = t * [(alpha+beta) c2 + (gamma+beta) c1 - 2 beta c1 c2]
    beta = -HALF_PI * s1 * s2
    alpha = PI * q1 * s2 - beta
    gamma = PI * q2 * s1 - beta
    return [CP(c2, t, alpha), CNOT(c1, c2), CP(c2, t, beta), CNOT(c1, c2), CP(c1, t, gamma)]


def _toffoli(c1, q1, c2, q2, t, flip=False):
    """Polarity Toffoli onto ``t`` followed by ``X(t)**d``.

    ``d = q1*q2 XOR flip``; ``flip`` costs one extra PHASE gate.
    """
    gates = [H(t)] + _ccz_core(c1, q1, c2, q2, t)
    if flip:
        gates.append(PHASE(t, PI))
    gates.append(H(t))
    return gates, (q1 & q2) ^ int(flip)


def _inverse(gates: Sequence[ElementaryGate]) -> List[ElementaryGate]:
    out = []
    for g in reversed(gates):
        if g.kind in (GateKind.PHASE, GateKind.CPHASE):
            out.append(ElementaryGate(g.kind, g.targets, _wrap(-g.angle)))
        else:
            out.append(g)
    return out


def _final_phase(trio, flipped):
    """Phase ``pi * prod y_k`` on three controls.

    ``trio`` holds (qubit, q) with q = 1 for a negated control. Without a
    flipped flag in the ladder this costs 6 gates (1 or 2 positives), with one
    it costs 5 (2 or 3 positives), keeping the reflection size fixed.
    """
    pos = [e for e in trio if e[1] == 0]
    neg = [e for e in trio if e[1] == 1]
    if flipped:
        (t, _), (a, qa), (b, qb) = pos[0], *(pos[1:] + neg)
        return _ccz_core(a, qa, b, qb, t)
    if len(pos) == 1:
        (t, _), (a, qa), (b, qb) = pos[0], neg[0], neg[1]
        return _ccz_core(a, qa, b, qb, t) + [PHASE(t, PI)]
    # pi xA xB (1 - xT) = pi xA xB - pi xA xB xT
    (a, _), (b, _), (t, _) = pos[0], pos[1], neg[0]
    return [CP(a, b, PI)] + _ccz_core(a, 0, b, 0, t)


def _trio_ok(controls, flipped):
    k = sum(1 for _, q in controls if q == 0)
    return k in ((2, 3) if flipped else (1, 2))


def _ladder_plan(leaves, anc):
    """Find a compute ladder whose final trio fits the fixed-size phase.

    Returns (compute_gates, trio, flipped).
    """
    res = _search(list(leaves), {anc: (1, frozenset())}, [], False, False)
    if res is None:  # pragma: no cover - checked for every target up to n_q = 12
        raise RuntimeError("no ladder plan found")
    return res


def _search(C, pool, gates, allow_flip, flipped):
    # C: pending controls [(qubit, q)]; pool: qubit -> (known value, deps)
    if len(C) == 3:
        return (gates, C, flipped) if _trio_ok(C, flipped) else None
    options = []
    n = len(C)
    for i in range(n):
        for j in range(i + 1, n):
            (c1, q1), (c2, q2) = C[i], C[j]
            seen = set()
            for w, (v, deps) in pool.items():
                if c1 in deps or c2 in deps or (v, deps) in seen:
                    continue
                seen.add((v, deps))
                for flip in ((0, 1) if allow_flip and not flipped else (0,)):
                    new_q = v ^ (q1 & q2) ^ flip
                    options.append((new_q, flip, len(deps), i, j, w))
    # positive flags first, then unflipped, then targets with few dependencies
    options.sort(key=lambda o: o[:3])
    tried = set()
    for new_q, flip, _, i, j, w in options:
        (c1, q1), (c2, q2) = C[i], C[j]
        # controls differing only in qubit label lead to equivalent subtrees
        sig = (new_q, flip, q1, q2, pool[w][0], len(pool[w][1]))
        if sig in tried:
            continue
        tried.add(sig)
        v, wdeps = pool[w]
        tgates, _ = _toffoli(c1, q1, c2, q2, w, flip=bool(flip))
        repl = frozenset({w}) | wdeps
        new_pool = {}
        for p, (pv, pdeps) in pool.items():
            if p == w:
                continue
            if c1 in pdeps or c2 in pdeps:
                pdeps = (pdeps - {c1, c2}) | repl
            new_pool[p] = (pv, pdeps)
        # a consumed control is known to hold its satisfying value
        new_pool[c1] = (1 - q1, repl)
        new_pool[c2] = (1 - q2, repl)
        rest = [c for k, c in enumerate(C) if k not in (i, j)]
        res = _search(rest + [(w, new_q)], new_pool, gates + tgates, allow_flip, flipped or bool(flip))
        if res is not None:
            return res
    return None


def _reflection_small(leaves, anc):
    n = len(leaves)
    if n == 2:
        # Toffoli onto the |-> ancilla: the flip becomes a phase. With both
        # controls negated the leftover X on |-> is a global sign only.
        (c1, q1), (c2, q2) = leaves
        return _toffoli(c1, q1, c2, q2, anc)[0]
    # n == 3: AND two leaves into the ancilla, then a three-control phase on
    # (flag, third leaf, one consumed leaf); the consumed leaf is redundant
    # but lets every polarity pattern use the same 6-gate phase
    for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        (c1, q1), (c2, q2) = leaves[i], leaves[j]
        tgates, _ = _toffoli(c1, q1, c2, q2, anc)
        flag = (anc, 1 ^ (q1 & q2))
        for extra in (leaves[i], leaves[j]):
            trio = [flag, leaves[k], extra]
            if _trio_ok(trio, False):
                compute = [H(anc)] + tgates
                return compute + _final_phase(trio, False) + _inverse(compute)
    raise RuntimeError("no plan for 3-qubit reflection")  # pragma: no cover


def reflection_gates(n_q: int, pattern: int) -> List[ElementaryGate]:
    """Gates putting phase -1 on register state ``|pattern>`` (ancilla in |->).

    The ancilla is returned to ``|->``; other register states are untouched
    (for ``n_q = 2`` and ``pattern = 0`` the whole map carries a global sign).
    """
    anc = n_q
    leaves = [(q, 1 - ((pattern >> q) & 1)) for q in range(n_q)]
    if n_q <= 3:
        return _cancel_hadamards(_reflection_small(leaves, anc))
    compute, trio, _ = _ladder_plan(leaves, anc)
    compute = [H(anc)] + compute
    return _cancel_hadamards(compute + _final_phase(trio, False) + _inverse(compute))


def _cancel_hadamards(gates: Sequence[ElementaryGate]) -> List[ElementaryGate]:
    """Drop pairs of Hadamards on a qubit with no other gate on it in between."""
    out: List[Optional[ElementaryGate]] = []
    last: dict = {}  # qubit -> index in out of the latest gate touching it
    for g in gates:
        if g.kind is GateKind.HADAMARD and g.angle is None:
            q = g.targets[0]
            idx = last.get(q)
            if idx is not None and out[idx] is not None and out[idx].kind is GateKind.HADAMARD \
                    and out[idx].angle is None:
                out[idx] = None
                del last[q]
                continue
        out.append(g)
        for q in g.targets:
            last[q] = len(out) - 1
    return [g for g in out if g is not None]


def compile_grover_iteration(n_q: int, target: int) -> GateProgram:
    """Compile oracle (phase flip on ``target``) followed by inversion about the mean."""
    if not 2 <= n_q <= MAX_QUBITS:
        raise ValueError(f"n_q must be in [2, {MAX_QUBITS}], got {n_q}")
    if not 0 <= target < (1 << n_q):
        raise ValueError(f"target {target} out of range for n_q={n_q}")
    hlayer = [H(q) for q in range(n_q)]
    gates = reflection_gates(n_q, target) + hlayer + reflection_gates(n_q, 0) + hlayer
    return GateProgram(gates=tuple(_cancel_hadamards(gates)), n_q=n_q, target=target)


def expected_gate_count(n_q: int) -> int:
    """Documented gate count of one compiled iteration."""
    if n_q == 2:
        return 16
    if n_q == 3:
        return 42
    return 30 * n_q - 76
