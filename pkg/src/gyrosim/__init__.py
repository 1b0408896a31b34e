"""Statevector simulation of Grover search under static imperfections,
random gate errors and gyroscopic (relabeling) error correction."""

__version__ = "0.1.0"

from gyrosim.qstate import BACKEND, ElementaryGate, GateKind, StateVector, apply_gate  # noqa: E402
from gyrosim.circuit import GateProgram, compile_grover_iteration, count_gates, ideal_t_G  # noqa: E402
from gyrosim.imperfections import DisorderRealization, ErrorModel, Mode, sample_static_disorder  # noqa: E402
from gyrosim.gyqec import GyqecConfig, QubitMap, run_with_gyqec  # noqa: E402
from gyrosim.observables import (  # noqa: E402
    DecayFit, HusimiGrid, ObservableSeries, epsilon_c, fidelity, fit_decay, gain_factor, husimi, w_4, w_G,
)

__all__ = [
    "BACKEND", "ElementaryGate", "GateKind", "StateVector", "apply_gate",
    "GateProgram", "compile_grover_iteration", "count_gates", "ideal_t_G",
    "DisorderRealization", "ErrorModel", "Mode", "sample_static_disorder",
    "GyqecConfig", "QubitMap", "run_with_gyqec",
    "DecayFit", "HusimiGrid", "ObservableSeries", "epsilon_c", "fidelity", "fit_decay",
    "gain_factor", "husimi", "w_4", "w_G",
]
