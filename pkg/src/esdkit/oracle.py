"""Direct numerical integration of the block equations.

The integrator works in the interaction picture with the explicit
``exp(+-i*delta*t)`` factors, so it shares nothing with the closed form
beyond the equations of motion.  It is both the reference for validating
the closed form and the solver for blocks the closed form does not cover.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .errors import InvalidState, ToleranceNotMet
from .model import N_MIN, BlockAmplitudes, SystemParams, WaveFunction


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.01
    max_steps: int = 20_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


DEFAULT_CONFIG = IntegratorConfig()


def _edge_mask(n: int) -> np.ndarray:
    """Which of (A, B, C, D) exist in block ``n``."""
    if n >= 0:
        return np.ones(4, dtype=bool)
    if n == -1:
        return np.array([False, True, True, True])
    if n == -2:
        return np.array([False, False, False, True])
    raise ValueError(f"block index must be >= {N_MIN}, got {n}")


def integrate_block_array(params: SystemParams, n: int, y0, grid,
                          cfg: Optional[IntegratorConfig] = None,
                          backend: str | None = None) -> np.ndarray:
    """Integrate block ``n`` from ``tau = 0``; returns a ``(len(grid), 4)`` array."""
    cfg = cfg or DEFAULT_CONFIG
    y0 = np.asarray(y0, dtype=complex)
    if np.any(y0[~_edge_mask(n)] != 0):
        raise InvalidState(f"block {n} has amplitude in a slot with negative photon number")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size and (grid[0] < 0 or np.any(np.diff(grid) < 0)):
        raise ValueError("grid must be ascending with tau >= 0")
    l2, J, D = params.scaled()
    alpha = float(np.sqrt(max(n + 1, 0)))
    beta = float(np.sqrt(max(n + 2, 0)))
    out, status, nsteps = _backend.get(backend).dp5_block(
        alpha, beta, l2, J, D, y0, grid, cfg.rel_tol, cfg.abs_tol, cfg.max_step,
        cfg.max_steps)
    if status == 1:
        raise ToleranceNotMet(f"block {n}: step budget of {cfg.max_steps} exhausted")
    if status == 2:
        raise ToleranceNotMet(f"block {n}: step size underflow after {nsteps} steps")
    return out


def integrate_block(params: SystemParams, n: int, block0: BlockAmplitudes, grid,
                    cfg: Optional[IntegratorConfig] = None,
                    backend: str | None = None) -> list[BlockAmplitudes]:
    """Sample block ``n`` on ``grid`` by adaptive Dormand-Prince 5(4)."""
    if block0.n != n:
        raise ValueError(f"block0 belongs to block {block0.n}, not {n}")
    out = integrate_block_array(params, n, block0.as_array(), grid, cfg, backend)
    return [BlockAmplitudes.from_array(n, row) for row in out]


def integrate_wavefunction(params: SystemParams, psi0: WaveFunction, grid,
                           cfg: Optional[IntegratorConfig] = None, threads: int = 1,
                           backend: str | None = None) -> np.ndarray:
    """Integrate every block numerically; ``(len(grid), n_max + 3, 4)`` array."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    init = np.asarray(psi0.amps)
    out = np.zeros((grid.size,) + init.shape, dtype=complex)
    rows = [r for r in range(init.shape[0]) if np.any(init[r])]

    def work(r):
        return r, integrate_block_array(params, r + N_MIN, init[r], grid, cfg, backend)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for r, res in pool.map(work, rows):
            out[:, r] = res
    return out


@dataclass
class ValidationReport:
    """Largest closed-form vs. integrator discrepancy over blocks and times.

    ``max_deviation`` is None when no block could be compared.
    """

    max_deviation: Optional[float]
    worst_block: Optional[int]
    worst_time: Optional[float]
    compared_blocks: list[int] = field(default_factory=list)
    oracle_only_blocks: list[int] = field(default_factory=list)
    per_block: dict[int, float] = field(default_factory=dict)


def cross_validate(params: SystemParams, psi0: WaveFunction, grid,
                   cfg: Optional[IntegratorConfig] = None, blocks=None,
                   threads: int = 1, backend: str | None = None) -> ValidationReport:
    """Compare closed-form and integrated amplitudes block by block.

    Blocks the closed form cannot handle (edge blocks, degenerate exponents)
    are listed in ``oracle_only_blocks`` and left out of the deviation.
    ``blocks`` restricts the comparison to the given block indices.
    """
    from .analytic import plan

    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    bp = plan(params, psi0)
    init = bp.init
    l2, J, D = params.scaled()
    kern = _backend.get(backend)
    closed = {int(r): i for i, r in enumerate(bp.closed)}
    wanted = range(init.shape[0]) if blocks is None else [b - N_MIN for b in blocks]
    oracle_only = sorted(int(r) + N_MIN for r in wanted if r not in closed)
    rows = [int(r) for r in wanted if r in closed]

    def work(r):
        i = closed[r]
        ana = kern.analytic_grid(bp.m[i:i + 1], bp.delta[i:i + 1], init[r:r + 1],
                                 bp.alpha[i:i + 1], bp.beta[i:i + 1], l2, J, D, grid)[:, 0]
        num = integrate_block_array(params, r + N_MIN, init[r], grid, cfg, backend)
        dev = np.max(np.abs(ana - num), axis=1)
        k = int(np.argmax(dev)) if dev.size else 0
        return r, float(dev[k]) if dev.size else 0.0, k

    worst = (None, None, None)
    per_block = {}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for r, dev, k in pool.map(work, rows):
            per_block[r + N_MIN] = dev
            if worst[0] is None or dev > worst[0]:
                worst = (dev, r + N_MIN, float(grid[k]) if grid.size else None)
    return ValidationReport(worst[0], worst[1], worst[2], sorted(per_block), oracle_only,
                            per_block)
