"""Observables of a Grover run: w_G, w_4, fidelity, Husimi density, fits.

All state arguments are in the logical frame: register qubits 0..n_q-1 and
the ancilla as qubit n_q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from gyrosim.qstate import StateVector, overlap


class FitDomainError(ValueError):
    """Non-positive values inside a log-linear fit window."""


class DegenerateBaselineError(ZeroDivisionError):
    """Gain factor requested against a vanishing baseline."""


def _amps(state):
    return state.amps if isinstance(state, StateVector) else np.asarray(state)


def _register_blocks(state, n_q):
    # rows: ancilla value, columns: register index
    return _amps(state).reshape(2, 1 << n_q)


def w_G(state, target: int, n_q: int) -> float:
    """Probability of the searched register state, ancilla traced out."""
    blk = _register_blocks(state, n_q)[:, target]
    return float(np.sum(blk.real ** 2 + blk.imag ** 2))


def w_4(state, target: int, n_q: int) -> float:
    """Probability inside span{|target>, |eta>} x {|0>, |1>}_ancilla.

    ``|eta>`` is the uniform superposition of all non-target register states.
    """
    blk = _register_blocks(state, n_q)
    n = 1 << n_q
    tau = blk[:, target]
    eta = (blk.sum(axis=1) - tau) / math.sqrt(n - 1)
    return float(np.sum(np.abs(tau) ** 2) + np.sum(np.abs(eta) ** 2))


def fidelity(ideal: StateVector, perturbed: StateVector) -> float:
    return abs(overlap(ideal, perturbed)) ** 2


def ideal_state(n_q: int, target: int, t: int) -> StateVector:
    """Ideal Grover state after ``t`` iterations, up to a global phase."""
    n = 1 << n_q
    theta = math.asin(n ** -0.5)
    reg = np.full(n, math.cos((2 * t + 1) * theta) / math.sqrt(n - 1), dtype=complex)
    reg[target] = math.sin((2 * t + 1) * theta)
    amps = np.concatenate((reg, -reg)) / math.sqrt(2)
    return StateVector(n_q + 1, amps)


def epsilon_c(n_g: int, n_tot: int) -> float:
    """Chaos border 1.7 / (n_g sqrt(n_tot))."""
    if n_g < 1 or n_tot < 1:
        raise ValueError("n_g and n_tot must be positive")
    return 1.7 / (n_g * math.sqrt(n_tot))


def gain_factor(with_gyqec: float, without: float) -> float:
    if without < 1e-12:
        raise DegenerateBaselineError(f"baseline w_G {without!r} too small for a gain factor")
    return with_gyqec / without


# --------------------------------------------------------------------------
# per-iteration series

SERIES_FIELDS = ("w_G", "w_4", "fidelity", "norm_error")


@dataclass
class ObservableSeries:
    t: np.ndarray
    w_G: np.ndarray
    w_4: np.ndarray
    fidelity: np.ndarray
    norm_error: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def max_w_G(self) -> float:
        return float(np.max(self.w_G))

    def argmax_w_G(self) -> int:
        return int(self.t[int(np.argmax(self.w_G))])

    def to_table(self) -> str:
        """Tab-separated table; metadata in ``# key=value`` header lines."""
        lines = [f"# {k}={v}" for k, v in self.meta.items()]
        lines.append("t\t" + "\t".join(SERIES_FIELDS))
        cols = [getattr(self, f) for f in SERIES_FIELDS]
        for i, t in enumerate(self.t):
            lines.append(f"{int(t)}\t" + "\t".join(repr(float(c[i])) for c in cols))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text: str) -> "ObservableSeries":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line and not line.startswith("t\t"):
                rows.append([float(x) for x in line.split("\t")])
        arr = np.array(rows).reshape(-1, 1 + len(SERIES_FIELDS))
        return cls(arr[:, 0].astype(int), *(arr[:, i + 1] for i in range(len(SERIES_FIELDS))), meta=meta)

    @classmethod
    def average(cls, series: Sequence["ObservableSeries"]) -> "ObservableSeries":
        """Elementwise mean over realizations (same time axis)."""
        first = series[0]
        out = {f: np.mean([getattr(s, f) for s in series], axis=0) for f in SERIES_FIELDS}
        meta = dict(first.meta)
        meta["realizations"] = len(series)
        return cls(first.t.copy(), meta=meta, **out)


@dataclass(frozen=True)
class DecayFit:
    Gamma: float
    r_squared: float
    window: tuple


def fit_decay(series, field: str = "w_4", window: Optional[tuple] = None) -> DecayFit:
    """Least-squares line through ln(value) vs t; ``Gamma = -slope``.

    ``series`` is an ObservableSeries or a ``(t, values)`` pair; ``window`` is
    an inclusive iteration range.
    """
    if isinstance(series, ObservableSeries):
        if field not in ("w_4", "fidelity"):
            raise ValueError(f"can only fit w_4 or fidelity, got {field!r}")
        t, y = series.t, getattr(series, field)
    else:
        t, y = (np.asarray(v, dtype=float) for v in series)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        lo, hi = window
        sel = (t >= lo) & (t <= hi)
        t, y = t[sel], y[sel]
    if len(t) < 2:
        raise ValueError("fit window holds fewer than two points")
    if np.any(y <= 0):
        raise FitDomainError("non-positive values in fit window; shrink the window")
    ly = np.log(y)
    slope, icpt = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return DecayFit(Gamma=float(-slope), r_squared=r2, window=(float(t[0]), float(t[-1])))


# --------------------------------------------------------------------------
# Husimi density on the (phase, position) torus


def default_sigma(n_q: int) -> float:
    return math.sqrt(2 ** n_q) / (2 * math.sqrt(math.pi))


@dataclass
class HusimiGrid:
    """Husimi density; ``grid[k, m]`` at phase ``2 pi k / n_theta`` and
    position ``m N / n_x`` with ``N = 2**n_q``."""

    grid: np.ndarray
    n_q: int
    sigma: float

    @property
    def n_theta(self) -> int:
        return self.grid.shape[0]

    @property
    def n_x(self) -> int:
        return self.grid.shape[1]

    @property
    def cell_area(self) -> float:
        return (2 * math.pi / self.n_theta) * ((1 << self.n_q) / self.n_x)

    def x_positions(self) -> np.ndarray:
        return np.arange(self.n_x) * ((1 << self.n_q) / self.n_x)

    def row_mass_fraction(self, x0: float, halfwidth: Optional[float] = None) -> float:
        """Share of the total mass at positions within ``halfwidth`` of ``x0``
        (periodic); default half-width is 3 sigma or half a cell, if larger."""
        n = 1 << self.n_q
        if halfwidth is None:
            halfwidth = max(3 * self.sigma, 0.5 * n / self.n_x)
        d = np.abs(self.x_positions() - x0)
        d = np.minimum(d, n - d)
        col = self.grid.sum(axis=0)
        return float(col[d <= halfwidth].sum() / col.sum())

    def to_text(self) -> str:
        n = 1 << self.n_q
        head = [
            f"# dims n_theta={self.n_theta} n_x={self.n_x}",
            f"# domain theta=[0,2pi) x=[0,{n})",
            f"# sigma={self.sigma!r}",
        ]
        body = ["\t".join(f"{v:.10e}" for v in row) for row in self.grid]
        return "\n".join(head + body) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HusimiGrid":
        n = sigma = None
        rows = []
        for ln in text.splitlines():
            if ln.startswith("# domain"):
                n = int(ln.split("x=[0,")[1].rstrip(")"))
            elif ln.startswith("# sigma="):
                sigma = float(ln.split("=", 1)[1])
            elif ln and not ln.startswith("#"):
                rows.append([float(v) for v in ln.split("\t")])
        if n is None or sigma is None:
            raise ValueError("Husimi text lacks its domain or sigma header line")
        return cls(grid=np.array(rows), n_q=n.bit_length() - 1, sigma=sigma)

    def to_pgm(self) -> bytes:
        """8-bit binary PGM; image row m is position cell m, columns are phase."""
        img = self.grid.T
        peak = img.max()
        scaled = np.zeros_like(img) if peak <= 0 else img / peak
        data = np.round(scaled * 255).astype(np.uint8)
        h, w = data.shape
        return f"P5\n{w} {h}\n255\n".encode("ascii") + data.tobytes()


def husimi(state, n_q: int, n_theta: int = 64, n_x: int = 64, sigma: Optional[float] = None) -> HusimiGrid:
    """Husimi density of the register, summed over the two ancilla values."""
    if sigma is None:
        sigma = default_sigma(n_q)
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    n = 1 << n_q
    blk = _register_blocks(state, n_q)
    pos = np.arange(n)
    centers = np.arange(n_x) * (n / n_x)
    d = np.abs(pos[None, :] - centers[:, None])
    d = np.minimum(d, n - d)
    window = np.exp(-d ** 2 / (4 * sigma ** 2))            # (n_x, n)
    # phases 2 pi k / n_theta only see n mod n_theta: fold, then FFT
    pad = (-n) % n_theta
    grid = np.zeros((n_theta, n_x))
    for a in range(2):
        w = window * blk[a][None, :]
        if pad:
            w = np.concatenate((w, np.zeros((n_x, pad))), axis=1)
        folded = w.reshape(n_x, -1, n_theta).sum(axis=1)
        spec = np.fft.fft(folded, axis=1)                    # exp(-2 pi i k r / n_theta)
        grid += (np.abs(spec) ** 2).T
    cell = (2 * math.pi / n_theta) * (n / n_x)
    total = grid.sum() * cell
    if total > 0:
        grid /= total
    return HusimiGrid(grid=grid, n_q=n_q, sigma=float(sigma))
