"""Trajectory runs and parameter sweeps built on the block solvers."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import analytic
from .model import (AtomInitState, FieldSpec, SystemParams, init_wavefunction, preset)
from .observables import OBSERVABLES, ObservableSeries, detect_esd_intervals, observables_batch

SWEEP_PARAMS = ("lambda2", "j_ising", "delta", "nbar")
CHUNK = 512


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one trajectory.

    ``tau_steps`` is the number of grid points on ``[tau_min, tau_max]``.
    """

    init: Union[str, AtomInitState] = "bell_c"
    nbar: float = 100.0
    lambda2: float = 0.0
    j_ising: float = 0.0
    delta: float = 0.0
    tau_max: float = 50.0
    tau_steps: int = 5001
    tau_min: float = 0.0
    n_max: Optional[int] = None
    observables: tuple = OBSERVABLES + ("esd",)
    esd_tol: float = 1e-6
    min_duration: float = 0.5
    lambda1: float = 1.0

    def __post_init__(self):
        if self.tau_steps < 2:
            raise ValueError("tau_steps must be >= 2")
        if not self.tau_max > 0:
            raise ValueError("tau_max must be positive")
        if not 0 <= self.tau_min < self.tau_max:
            raise ValueError("need 0 <= tau_min < tau_max")
        if not self.nbar >= 0:
            raise ValueError("nbar must be non-negative")
        if not self.esd_tol > 0 or self.min_duration < 0:
            raise ValueError("esd_tol must be positive and min_duration non-negative")
        unknown = set(self.observables) - set(OBSERVABLES) - {"esd"}
        if unknown:
            raise ValueError(f"unknown observables: {sorted(unknown)}")
        self.atoms()  # validates the initial state

    def atoms(self) -> AtomInitState:
        return preset(self.init) if isinstance(self.init, str) else self.init

    def params(self) -> SystemParams:
        return SystemParams(lambda1=self.lambda1, lambda2=self.lambda2,
                            j_ising=self.j_ising, delta=self.delta, nbar=self.nbar)

    def field_spec(self) -> FieldSpec:
        return FieldSpec(nbar=self.nbar, n_max=self.n_max)

    def grid(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.tau_steps)


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    param: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"param must be one of {SWEEP_PARAMS}")
        if self.steps < 2:
            raise ValueError("sweep steps must be >= 2")
        if not self.start <= self.stop:
            raise ValueError("sweep range must satisfy from <= to")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


def resolve_threads(threads: Optional[int] = None) -> int:
    """``threads`` if given, else ``$ESDKIT_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("ESDKIT_THREADS", "")
        threads = int(env) if env.strip() else 1
    return max(1, int(threads))


def simulate(cfg: RunConfig, backend: Optional[str] = None, chunk: int = CHUNK,
             integrator=None, threads: Optional[int] = 1) -> ObservableSeries:
    """Evolve the configured state and collect the observables on its grid.

    The grid is processed in chunks of ``chunk`` points; with ``threads > 1``
    chunks run on a thread pool and are reassembled in grid order, so the
    result does not depend on the worker count.
    """
    params = cfg.params()
    psi0 = init_wavefunction(cfg.atoms(), cfg.field_spec())
    grid = cfg.grid()
    bp = analytic.plan(params, psi0)
    # Integrated blocks always start from tau=0, so solve them once for the whole grid.
    numeric = {}
    if bp.numeric.size:
        from .oracle import integrate_block_array
        for row in bp.numeric:
            if np.any(bp.init[row]):
                numeric[row] = integrate_block_array(params, row + analytic.N_MIN,
                                                     bp.init[row], grid, integrator, backend)

    def work(i):
        amps = analytic.evaluate(bp, grid[i:i + chunk], cfg=integrator, backend=backend,
                                 numeric={r: v[i:i + chunk] for r, v in numeric.items()})
        return observables_batch(amps)

    starts = range(0, grid.size, chunk)
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        parts = list(pool.map(work, starts))
    data = {k: np.concatenate([p[k] for p in parts]) for k in OBSERVABLES}
    series = ObservableSeries(tau=grid, **data)
    series.check_ranges()
    if "esd" in cfg.observables:
        series.esd_intervals = detect_esd_intervals(grid, series.concurrence, cfg.esd_tol,
                                                    cfg.min_duration)
    return series


def sweep(cfg: SweepConfig, threads: Optional[int] = None,
          backend: Optional[str] = None) -> list[tuple[float, ObservableSeries]]:
    """Run ``cfg.base`` once per swept value; results keep the sweep order."""
    values = cfg.values()
    runs = [replace(cfg.base, **{cfg.param: float(v)}) for v in values]
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        series = list(pool.map(lambda rc: simulate(rc, backend=backend, threads=1), runs))
    return list(zip((float(v) for v in values), series))


def window_max(series: ObservableSeries, lo: float, hi: float,
               name: str = "concurrence") -> float:
    sel = (series.tau >= lo) & (series.tau <= hi)
    return float(np.max(getattr(series, name)[sel]))


def window_mean(series: ObservableSeries, lo: float, hi: float,
                name: str = "sigma_z") -> float:
    sel = (series.tau >= lo) & (series.tau <= hi)
    return float(np.mean(getattr(series, name)[sel]))


def critical_coupling(results: Sequence[tuple[float, ObservableSeries]], lo: float,
                      hi: float, threshold: float = 1e-4) -> Optional[float]:
    """Smallest swept value whose window-max concurrence drops below ``threshold``."""
    for value, series in sorted(results, key=lambda r: r[0]):
        if window_max(series, lo, hi) < threshold:
            return value
    return None
