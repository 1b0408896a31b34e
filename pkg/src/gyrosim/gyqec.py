"""Gyroscopic error correction: periodic random relabeling of qubits.

After every ``l_g`` algorithm gates a few random physical swaps are applied
and the logical -> physical map is updated, so later gates land on new
physical qubits. Static imperfections then act on a different logical pair
each time and average out like random noise.

``run_with_gyqec`` is also the general simulation loop: with
``GyqecConfig(enabled=False)`` it is a plain noisy run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from gyrosim import qstate
from gyrosim.circuit import GateProgram, ideal_t_G, start_state
from gyrosim.imperfections import ErrorModel, Mode
from gyrosim.observables import ObservableSeries, ideal_state, w_4, w_G
from gyrosim.qstate import ElementaryGate, GateKind, StateVector


@dataclass
class QubitMap:
    """``perm[logical] = physical``; ``inverse[physical] = logical``."""

    perm: np.ndarray
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=np.int64).copy()
        n = len(self.perm)
        if sorted(self.perm.tolist()) != list(range(n)):
            raise ValueError(f"not a permutation of 0..{n - 1}: {self.perm.tolist()}")
        self.inverse = np.empty(n, dtype=np.int64)
        self.inverse[self.perm] = np.arange(n)

    @classmethod
    def identity(cls, n_tot: int) -> "QubitMap":
        return cls(np.arange(n_tot))

    @property
    def n_tot(self) -> int:
        return len(self.perm)

    def copy(self) -> "QubitMap":
        return QubitMap(self.perm)

    def is_identity(self) -> bool:
        return bool(np.all(self.perm == np.arange(self.n_tot)))

    def swap_physical(self, a: int, b: int) -> None:
        """Record that the contents of physical qubits ``a`` and ``b`` were exchanged."""
        la, lb = self.inverse[a], self.inverse[b]
        self.perm[la], self.perm[lb] = b, a
        self.inverse[a], self.inverse[b] = lb, la

    def physical_indices(self) -> np.ndarray:
        """``idx[x_logical]`` = physical basis index holding logical index ``x``."""
        x = np.arange(1 << self.n_tot, dtype=np.int64)
        idx = np.zeros_like(x)
        for logical, phys in enumerate(self.perm):
            idx |= ((x >> logical) & 1) << int(phys)
        return idx

    def to_logical(self, amps: np.ndarray) -> np.ndarray:
        if self.is_identity():
            return amps.copy()
        return amps[self.physical_indices()]


@dataclass(frozen=True)
class GyqecConfig:
    l_g: int = 1
    swaps_per_event: Optional[int] = None  # None -> floor(n_tot / 2)
    enabled: bool = True

    def __post_init__(self):
        if int(self.l_g) != self.l_g or self.l_g < 1:
            raise ValueError(f"l_g must be an integer >= 1, got {self.l_g}")
        if self.enabled and self.swaps_per_event is not None and self.swaps_per_event < 1:
            raise ValueError(f"swaps_per_event must be >= 1, got {self.swaps_per_event}")

    @classmethod
    def disabled(cls) -> "GyqecConfig":
        return cls(enabled=False)

    def swaps_for(self, n_tot: int) -> int:
        return n_tot // 2 if self.swaps_per_event is None else int(self.swaps_per_event)


def logical_gate_to_physical(gate: ElementaryGate, qmap: QubitMap) -> ElementaryGate:
    return gate.with_targets([qmap.perm[t] for t in gate.targets])


def _random_pair(rng, n):
    a = int(rng.integers(n))
    b = int(rng.integers(n - 1))
    return a, b + (b >= a)


class _Engine:
    """Applies physical gates with the error model's perturbations and slices."""

    def __init__(self, n_tot, model: ErrorModel, noise_rng):
        self.model = model
        self.noise_rng = noise_rng
        self.slice = model.slice_function(n_tot, noise_rng)
        self.gate_eps = model.epsilon if model.mode is Mode.GATE_ANGLE else 0.0

    def gate(self, amps, kind, targets, angle, with_slice=True):
        if self.gate_eps:
            base = math.pi if angle is None else angle
            angle = base + self.noise_rng.uniform(-self.gate_eps, self.gate_eps)
        qstate.apply_raw(amps, kind, targets, angle)
        if with_slice and self.slice is not None:
            self.slice(amps)


def relabel_event(state: StateVector, qmap: QubitMap, config: GyqecConfig, model: ErrorModel,
                  rng: np.random.Generator, noise_rng: Optional[np.random.Generator] = None,
                  _engine: Optional[_Engine] = None) -> List[tuple]:
    """One relabeling event, in place on ``state`` and ``qmap``.

    ``rng`` draws the swap pairs; ``noise_rng`` (default ``rng``) feeds the
    error model. Returns the transpositions applied.
    """
    if not config.enabled:
        raise ValueError("relabel_event called with GYQEC disabled")
    n = state.n_tot
    if n < 2:
        raise ValueError("relabeling needs at least two qubits")
    if qmap.n_tot != n:
        raise ValueError(f"map is for {qmap.n_tot} qubits, state has {n}")
    engine = _engine or _Engine(n, model, noise_rng if noise_rng is not None else rng)
    perturb = model.slice_after_swaps
    swaps = []
    for _ in range(config.swaps_for(n)):
        a, b = _random_pair(rng, n)
        if perturb:
            engine.gate(state.amps, GateKind.SWAP, (a, b), None)
        else:
            qstate.apply_raw(state.amps, GateKind.SWAP, (a, b), None)
        qmap.swap_physical(a, b)
        swaps.append((a, b))
    return swaps


def run_streams(seed: int):
    """Independent (swap, noise) generators derived from one integer seed."""
    swap_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(swap_ss), np.random.default_rng(noise_ss)


def run_with_gyqec(program: GateProgram, iterations: int, config: GyqecConfig, model: ErrorModel,
                   seed: int, event_log: Optional[list] = None, snapshots=None,
                   stop_fidelity: Optional[float] = None) -> ObservableSeries:
    """Run ``iterations`` repetitions of ``program`` from the exact start state.

    Observables are recorded at t = 0..iterations in the logical frame.
    ``event_log`` (a list) receives one text line per relabel event;
    ``snapshots`` maps iteration numbers to None and is filled with the
    logical-frame StateVector at those iterations. With ``stop_fidelity``
    the run ends after the first iteration whose fidelity falls below it,
    and the series is truncated there.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    n_q, target, n = program.n_q, program.target, program.n_tot
    swap_rng, noise_rng = run_streams(seed)
    engine = _Engine(n, model, noise_rng)
    qmap = QubitMap.identity(n)
    state = start_state(n_q)
    amps = state.amps
    gates = [(g.kind, g.targets, g.angle) for g in program.gates]
    l_g = config.l_g
    count = 0

    ts = np.arange(iterations + 1)
    cols = {k: np.empty(iterations + 1) for k in ("w_G", "w_4", "fidelity", "norm_error")}

    def record(t):
        logical = StateVector(n, qmap.to_logical(state.amps))
        cols["w_G"][t] = w_G(logical, target, n_q)
        cols["w_4"][t] = w_4(logical, target, n_q)
        cols["fidelity"][t] = abs(np.vdot(ideal_state(n_q, target, t).amps, logical.amps)) ** 2
        cols["norm_error"][t] = abs(logical.norm() - 1.0)
        if snapshots is not None and t in snapshots:
            snapshots[t] = logical

    record(0)
    for t in range(1, iterations + 1):
        for kind, targets, angle in gates:
            if config.enabled:
                perm = qmap.perm
                targets = tuple(int(perm[q]) for q in targets)
            engine.gate(amps, kind, targets, angle)
            count += 1
            if config.enabled and count % l_g == 0:
                swaps = relabel_event(state, qmap, config, model, swap_rng, _engine=engine)
                if event_log is not None:
                    event_log.append(
                        f"step={count}\tswaps={' '.join(f'{a}-{b}' for a, b in swaps)}"
                        f"\tperm={','.join(map(str, qmap.perm.tolist()))}"
                    )
        state.check_finite()
        record(t)
        if stop_fidelity is not None and cols["fidelity"][t] < stop_fidelity:
            ts = ts[:t + 1]
            cols = {k: v[:t + 1] for k, v in cols.items()}
            break

    meta = {
        "n_q": n_q, "target": target, "n_g": program.n_g, "t_G": ideal_t_G(n_q), "iterations": iterations,
        "mode": model.mode.value, "epsilon": model.epsilon,
        "gyqec": config.enabled, "l_g": l_g if config.enabled else "",
        "seed": seed,
    }
    return ObservableSeries(ts, meta=meta, **cols)
