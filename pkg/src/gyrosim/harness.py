"""Experiment plumbing: configs, derived seeds, single runs, scans, Husimi output.

Seeds: every random stream of realization ``r`` comes from
``SeedSequence([base_seed, r, stream])`` with ``stream`` 0 for the static
disorder and 1 for the run (swap choices and fluctuating noise). The same
realization index therefore sees the same disorder in every cell of a scan,
with and without GYQEC, at every epsilon (rescaled).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import gyrosim
from gyrosim.circuit import compile_grover_iteration, ideal_t_G
from gyrosim.gyqec import GyqecConfig, run_with_gyqec
from gyrosim.imperfections import TOPOLOGIES, ErrorModel, Mode, sample_static_disorder
from gyrosim.observables import (
    DegenerateBaselineError, FitDomainError, ObservableSeries, fit_decay, gain_factor, husimi,
)

MODES = ("ideal", "static", "fluctuating", "gate_angle", "gyqec")
DISORDER_STREAM, RUN_STREAM = 0, 1


class ScanError(RuntimeError):
    """A child run failed; the message names its seed."""


def derive_seed(base_seed: int, realization: int, stream: int) -> int:
    words = np.random.SeedSequence([base_seed, realization, stream]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def _floats(v):
    if isinstance(v, str):
        return tuple(float(x) for x in v.split(",") if x.strip())
    if isinstance(v, (int, float)):
        return (float(v),)
    return tuple(float(x) for x in v)


def _ints(v):
    if isinstance(v, str):
        return tuple(int(x) for x in v.split(",") if x.strip())
    if isinstance(v, int):
        return (v,)
    return tuple(int(x) for x in v)


def _strs(v):
    if isinstance(v, str):
        return tuple(x.strip() for x in v.split(",") if x.strip())
    return tuple(v)


def _bool(v):
    if isinstance(v, str):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {v!r}")
    return bool(v)


def _opt(conv):
    def f(v):
        return None if v is None or v in ("", "none", "None") else conv(v)
    return f


_CONVERTERS = {
    "n_q": int, "target": int, "iterations": _opt(int), "epsilons": _floats, "modes": _strs,
    "l_g": _ints, "swaps_per_event": _opt(int), "realizations": int, "base_seed": _opt(int),
    "output_dir": _opt(str), "topology": str, "slice_after_swaps": _bool, "n_theta": int,
    "n_x": int, "sigma": _opt(float), "fit_window": _opt(_floats), "workers": int,
}


@dataclass
class ExperimentConfig:
    n_q: int = 11
    target: int = 0
    iterations: Optional[int] = None          # None -> 3 t_G
    epsilons: tuple = (0.002,)
    modes: tuple = ("ideal", "static")
    l_g: tuple = (10,)
    swaps_per_event: Optional[int] = None     # None -> floor(n_tot / 2)
    realizations: int = 1
    base_seed: Optional[int] = 0
    output_dir: Optional[str] = None
    topology: str = "ring"
    slice_after_swaps: bool = False
    n_theta: int = 64
    n_x: int = 64
    sigma: Optional[float] = None             # None -> sqrt(N) / (2 sqrt(pi))
    fit_window: Optional[tuple] = None        # None -> (t_G, 5 t_G)
    workers: int = 1

    def __post_init__(self):
        # accept strings (config files, CLI) and scalars where lists are expected
        for f in fields(self):
            v = getattr(self, f.name)
            setattr(self, f.name, None if v is None else _CONVERTERS[f.name](v))

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**values)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {n}: expected key=value, got {line!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            values[k] = v
        return cls.from_mapping(values)

    @property
    def t_G(self) -> int:
        return ideal_t_G(self.n_q)

    def validate(self) -> "ExperimentConfig":
        if not 2 <= self.n_q <= 20:
            raise ValueError(f"n_q must be in [2, 20], got {self.n_q}")
        if not 0 <= self.target < 2 ** self.n_q:
            raise ValueError(f"target {self.target} out of range for n_q={self.n_q}")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.epsilons or any(e < 0 or not math.isfinite(e) for e in self.epsilons):
            raise ValueError(f"epsilons must be a non-empty list of finite values >= 0, got {self.epsilons}")
        if not self.modes or any(m not in MODES for m in self.modes):
            raise ValueError(f"modes must be a non-empty subset of {MODES}, got {self.modes}")
        if not self.l_g or any(v < 1 for v in self.l_g):
            raise ValueError(f"l_g values must be >= 1, got {self.l_g}")
        if self.swaps_per_event is not None and self.swaps_per_event < 1:
            raise ValueError(f"swaps_per_event must be >= 1, got {self.swaps_per_event}")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.n_theta < 1 or self.n_x < 1:
            raise ValueError("Husimi grid sizes must be >= 1")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.fit_window is not None and (len(self.fit_window) != 2 or self.fit_window[0] >= self.fit_window[1]):
            raise ValueError(f"fit_window must be lo,hi with lo < hi, got {self.fit_window}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        return self

    def resolved(self) -> "ExperimentConfig":
        """Copy with every default materialized."""
        self.validate()
        d = asdict(self)
        t_G = self.t_G
        if d["iterations"] is None:
            d["iterations"] = 3 * t_G
        if d["swaps_per_event"] is None:
            d["swaps_per_event"] = (self.n_q + 1) // 2
        if d["sigma"] is None:
            d["sigma"] = math.sqrt(2 ** self.n_q) / (2 * math.sqrt(math.pi))
        if d["fit_window"] is None:
            d["fit_window"] = (float(t_G), float(5 * t_G))
        return ExperimentConfig(**d)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name}={'' if v is None else v}")
        return "\n".join(lines) + "\n"

    def header(self) -> str:
        return "".join(f"# {line}\n" for line in self.to_text().splitlines())

    def config_hash(self) -> str:
        return hashlib.sha256(self.resolved().to_text().encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    config: str
    seeds: Dict[str, int] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    outputs: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# single runs


@dataclass(frozen=True)
class Job:
    mode: str
    epsilon: float
    l_g: int            # 0 for modes without GYQEC
    realization: int


def _cell_label(mode, eps, l_g):
    if mode == "ideal":
        return "ideal"
    label = f"{mode}_eps{eps:g}"
    return f"{label}_lg{l_g}" if mode == "gyqec" else label


_compile = lru_cache(maxsize=16)(compile_grover_iteration)


def _run_job(cfg: ExperimentConfig, job: Job, snapshots=None) -> ObservableSeries:
    program = _compile(cfg.n_q, cfg.target)
    n_tot = cfg.n_q + 1
    dis_seed = derive_seed(cfg.base_seed, job.realization, DISORDER_STREAM)
    run_seed = derive_seed(cfg.base_seed, job.realization, RUN_STREAM)
    gy = GyqecConfig.disabled()
    if job.mode == "ideal":
        model = ErrorModel()
    elif job.mode in ("static", "gyqec"):
        real = sample_static_disorder(n_tot, job.epsilon, dis_seed, cfg.topology)
        model = ErrorModel(Mode.STATIC, realization=real, slice_after_swaps=cfg.slice_after_swaps)
        if job.mode == "gyqec":
            gy = GyqecConfig(job.l_g, cfg.swaps_per_event)
    elif job.mode == "fluctuating":
        model = ErrorModel(Mode.FLUCTUATING, job.epsilon, topology=cfg.topology)
    else:
        model = ErrorModel(Mode.GATE_ANGLE, job.epsilon)
    series = run_with_gyqec(program, cfg.iterations, gy, model, run_seed, snapshots=snapshots)
    series.meta.update({"t_G": cfg.t_G, "realization": job.realization,
                        "disorder_seed": dis_seed if job.mode in ("static", "gyqec") else "",
                        "run_seed": run_seed})
    return series


def _jobs(cfg: ExperimentConfig, realizations: Sequence[int]) -> List[Job]:
    jobs = []
    for mode in cfg.modes:
        if mode == "ideal":
            jobs.append(Job("ideal", 0.0, 0, 0))
            continue
        for eps in cfg.epsilons:
            for lg in (cfg.l_g if mode == "gyqec" else (0,)):
                jobs.extend(Job(mode, eps, lg, r) for r in realizations)
    return jobs


def _execute(cfg, jobs):
    def fail(job, exc):
        seed = derive_seed(cfg.base_seed, job.realization, RUN_STREAM)
        return ScanError(f"run {job} failed (run seed {seed}): {exc}")

    if cfg.workers == 1 or len(jobs) == 1:
        out = []
        for job in jobs:
            try:
                out.append(_run_job(cfg, job))
            except Exception as exc:
                raise fail(job, exc) from exc
        return out
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_run_job, cfg, job) for job in jobs]
        out = []
        for job, fut in zip(jobs, futures):
            try:
                out.append(fut.result())
            except Exception as exc:
                raise fail(job, exc) from exc
        return out


def _prepare_output(cfg):
    if cfg.output_dir is None:
        return None
    os.makedirs(cfg.output_dir, exist_ok=True)
    probe = os.path.join(cfg.output_dir, ".write_test")
    with open(probe, "w") as fh:
        fh.write("")
    os.remove(probe)
    return cfg.output_dir


def _write(outdir, name, text, manifest, mode="w"):
    path = os.path.join(outdir, name)
    with open(path, mode, encoding=None if "b" in mode else "utf-8") as fh:
        fh.write(text)
    manifest.outputs.append(name)
    return path


def _new_manifest(cfg):
    return RunManifest(config_hash=cfg.config_hash(), code_version=gyrosim.__version__, config=cfg.to_text())


def _finish_manifest(outdir, manifest, t0):
    manifest.wall_clock_s = round(time.time() - t0, 3)
    if outdir is not None:
        with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
            fh.write(manifest.to_json() + "\n")


def run_single(config: ExperimentConfig, realization: int = 0) -> Dict[str, ObservableSeries]:
    """One simulation per configured (mode, epsilon, l_g) cell, all with one realization."""
    cfg = config.resolved()
    t0 = time.time()
    outdir = _prepare_output(cfg)
    manifest = _new_manifest(cfg)
    jobs = _jobs(cfg, [realization])
    results = {}
    for job, series in zip(jobs, _execute(cfg, jobs)):
        label = _cell_label(job.mode, job.epsilon, job.l_g)
        results[label] = series
        manifest.seeds[label] = int(series.meta["run_seed"])
        if outdir is not None:
            _write(outdir, f"series_{label}.tsv", cfg.header() + series.to_table(), manifest)
    _finish_manifest(outdir, manifest, t0)
    return results


# --------------------------------------------------------------------------
# scans


SUMMARY_COLUMNS = ("mode", "epsilon", "l_g", "realizations", "max_w_G", "t_max", "gain", "Gamma_w4", "r2_w4")


@dataclass
class ScanResult:
    rows: List[dict]
    series: Dict[str, ObservableSeries]
    manifest: RunManifest

    def row(self, mode, epsilon=None, l_g=None) -> dict:
        for r in self.rows:
            if r["mode"] == mode and (epsilon is None or r["epsilon"] == epsilon) \
                    and (l_g is None or r["l_g"] == l_g):
                return r
        raise KeyError((mode, epsilon, l_g))

    def to_table(self) -> str:
        lines = ["\t".join(SUMMARY_COLUMNS)]
        for r in self.rows:
            lines.append("\t".join("" if r[c] is None else str(r[c]) for c in SUMMARY_COLUMNS))
        return "\n".join(lines) + "\n"


def scan(config: ExperimentConfig) -> ScanResult:
    """Disorder-averaged cells over epsilon x l_g with gain factors and w_4 decay fits.

    A ``gyqec`` cell's gain is taken against the ``static`` cell at the same
    epsilon, which is added to the scan when not requested explicitly.
    """
    cfg = config.resolved()
    if cfg.base_seed is None:
        raise ValueError("scan needs an explicit base seed")
    t0 = time.time()
    outdir = _prepare_output(cfg)
    manifest = _new_manifest(cfg)
    modes = list(cfg.modes)
    if "gyqec" in modes and "static" not in modes:
        modes.insert(modes.index("gyqec"), "static")
    cfg_run = ExperimentConfig(**{**asdict(cfg), "modes": tuple(modes)})
    jobs = _jobs(cfg_run, range(cfg.realizations))
    results = _execute(cfg_run, jobs)

    grouped: Dict[tuple, List[ObservableSeries]] = {}
    for job, series in zip(jobs, results):
        grouped.setdefault((job.mode, job.epsilon, job.l_g), []).append(series)
        manifest.seeds[f"{_cell_label(job.mode, job.epsilon, job.l_g)}_r{job.realization}"] = \
            int(series.meta["run_seed"])

    rows, averaged = [], {}
    for (mode, eps, lg), group in grouped.items():
        avg = ObservableSeries.average(group)
        label = _cell_label(mode, eps, lg)
        averaged[label] = avg
        row = {"mode": mode, "epsilon": eps, "l_g": lg if mode == "gyqec" else None,
               "realizations": len(group), "max_w_G": avg.max_w_G(), "t_max": avg.argmax_w_G(),
               "gain": None, "Gamma_w4": None, "r2_w4": None}
        try:
            fit = fit_decay(avg, "w_4", cfg.fit_window)
            row["Gamma_w4"], row["r2_w4"] = fit.Gamma, fit.r_squared
        except (FitDomainError, ValueError):
            pass
        rows.append(row)
        if outdir is not None:
            _write(outdir, f"series_{label}_avg.tsv", cfg.header() + avg.to_table(), manifest)
    for row in rows:
        if row["mode"] == "gyqec":
            base = next(r for r in rows if r["mode"] == "static" and r["epsilon"] == row["epsilon"])
            try:
                row["gain"] = gain_factor(row["max_w_G"], base["max_w_G"])
            except DegenerateBaselineError:
                row["gain"] = float("nan")
    res = ScanResult(rows=rows, series=averaged, manifest=manifest)
    if outdir is not None:
        _write(outdir, "summary.tsv", cfg.header() + res.to_table(), manifest)
    _finish_manifest(outdir, manifest, t0)
    return res


# --------------------------------------------------------------------------
# Husimi snapshots


def render_husimi(config: ExperimentConfig, t_star: Optional[int] = None) -> Dict[str, Tuple[object, int]]:
    """Husimi grids for the ideal run and each epsilon with GYQEC off and on.

    GYQEC runs use the first configured l_g. Without ``t_star`` each run is
    snapshotted at its own w_G maximum. Returns label -> (HusimiGrid, t).
    """
    cfg = config.resolved()
    if t_star is not None and not 0 <= t_star <= cfg.iterations:
        raise ValueError(f"t* = {t_star} outside simulated horizon [0, {cfg.iterations}]")
    t0 = time.time()
    outdir = _prepare_output(cfg)
    manifest = _new_manifest(cfg)
    jobs = [Job("ideal", 0.0, 0, 0)]
    for eps in cfg.epsilons:
        jobs += [Job("static", eps, 0, 0), Job("gyqec", eps, cfg.l_g[0], 0)]
    out = {}
    for job in jobs:
        snaps = {t: None for t in range(cfg.iterations + 1)} if t_star is None else {t_star: None}
        series = _run_job(cfg, job, snapshots=snaps)
        t = series.argmax_w_G() if t_star is None else t_star
        grid = husimi(snaps[t], cfg.n_q, cfg.n_theta, cfg.n_x, cfg.sigma)
        label = _cell_label(job.mode, job.epsilon, job.l_g)
        out[label] = (grid, t)
        manifest.seeds[label] = int(series.meta["run_seed"])
        if outdir is not None:
            _write(outdir, f"husimi_{label}_t{t}.txt", grid.to_text(), manifest)
            _write(outdir, f"husimi_{label}_t{t}.pgm", grid.to_pgm(), manifest, mode="wb")
    _finish_manifest(outdir, manifest, t0)
    return out
