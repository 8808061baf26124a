"""Invariant suites run by ``esdkit verify``.

Each check measures a worst-case value and compares it with a tolerance.
The ``fast`` level uses short windows and a handful of oracle draws; the
``full`` level covers ``tau`` up to 200 and 100 random oracle draws.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import analytic
from .model import (STANDARD_PRESETS, AtomInitState, FieldSpec, SystemParams, init_wavefunction,
                    preset)
from .observables import (concurrence, concurrence_from_amplitudes, population_inversion_batch,
                          purity, reduced_density_atoms_batch, reduced_density_atom2,
                          reduced_density_field, sigma_z_from_rho, tangle)
from .oracle import integrate_block_array

LEVELS = ("fast", "full")
SEED = 20240607
# b != c, so B - C and the atom swap are non-trivial
ASYMMETRIC = AtomInitState(0.5, 0.6j, 0.3, float(np.sqrt(0.3)))


@dataclass
class Check:
    name: str
    worst: float
    tol: float
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.worst) and self.worst < self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        s = f"{flag}  {self.name:<22} worst={self.worst:.3e}  tol={self.tol:.0e}"
        if self.detail:
            s += f"  ({self.detail})"
        return s


@dataclass
class VerifyReport:
    level: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = [f"esdkit verify --level {self.level}"]
        lines += [c.line() for c in self.checks]
        n_ok = sum(c.passed for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _werner(p: float) -> np.ndarray:
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return p * np.outer(phi, phi) + (1 - p) * np.eye(4) / 4


def check_root_residuals(level: str) -> Check:
    draws = [(0, 0, 0), (4, -4, -2), (2, 2, 2), (2, -2, 0), (0.3, 1.7, -2.9)]
    worst, skipped = 0.0, 0
    blocks = np.arange(0, 231)
    for l2, J, D in draws:
        alpha, beta = analytic.couplings(blocks)
        _, _, _, _, m = analytic._roots_vec(l2, J, D, alpha, beta)
        res = np.max(analytic.char_poly_residual(l2, J, D, alpha, beta, m), axis=-1)
        ok = res <= analytic.ROOT_RESIDUAL_TOL
        skipped += int((~ok).sum())
        worst = max(worst, float(res.max()))
    return Check("root_residuals", worst, analytic.ROOT_RESIDUAL_TOL,
                 f"{len(draws)} parameter sets, blocks 0..230, {skipped} rejected")


def _trajectories(level: str):
    tau_max = 200.0 if level == "full" else 50.0
    grid = np.linspace(0.0, tau_max, 2001)
    params = SystemParams(lambda2=4.0, j_ising=-4.0, delta=-2.0)
    for name in STANDARD_PRESETS:
        psi0 = init_wavefunction(preset(name), FieldSpec(nbar=100.0))
        yield name, grid, analytic.evolve_amplitudes(params, psi0, grid)


def check_conservation(level: str) -> list[Check]:
    block_drift = total_drift = bc = 0.0
    tau_max = 0.0
    for _, grid, amps in _trajectories(level):
        tau_max = grid[-1]
        bn = np.sum(np.abs(amps) ** 2, axis=-1)
        block_drift = max(block_drift, float(np.max(np.abs(bn - bn[0]))))
        total_drift = max(total_drift, float(np.max(np.abs(bn.sum(1) - bn[0].sum()))))
        d = np.abs(amps[..., 1] - amps[..., 2])
        bc = max(bc, float(np.max(np.abs(d - d[0]))))
    # presets have b == c, which makes B - C vanish identically; add a state where it does not
    amps = analytic.evolve_amplitudes(SystemParams(lambda2=4.0, j_ising=-4.0, delta=-2.0),
                                      init_wavefunction(ASYMMETRIC, FieldSpec(nbar=100.0)), grid)
    d = np.abs(amps[..., 1] - amps[..., 2])
    bc = max(bc, float(np.max(np.abs(d - d[0]))))
    where = f"4 presets, (4,-4), delta=-2, tau<={tau_max:g}"
    return [Check("block_norm", block_drift, 1e-10, where),
            Check("total_norm", total_drift, 1e-10, where),
            Check("b_minus_c_law", bc, 1e-12, where + ", plus b != c state")]


def check_oracle_norm(level: str) -> Check:
    tau_max = 200.0 if level == "full" else 50.0
    params = SystemParams(lambda2=4.0, j_ising=-4.0, delta=-2.0)
    grid = np.linspace(0.0, tau_max, 401)
    worst = 0.0
    for name in ("bell_c", "w_like"):
        y0 = preset(name).as_array()
        out = integrate_block_array(params, 100, y0, grid)
        worst = max(worst, float(np.max(np.abs(np.sum(np.abs(out) ** 2, axis=1) - 1))))
    return Check("oracle_norm", worst, 1e-9, f"block 100, tau<={tau_max:g}")


def oracle_draws(count: int, seed: int = SEED, n_cap: int = 230, tau_cap: float = 50.0):
    """Deterministic random (params, preset, block, tau_max) draws."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        l2, J = rng.uniform(-5, 5, size=2)
        D = rng.uniform(-3, 3)
        name = STANDARD_PRESETS[rng.integers(len(STANDARD_PRESETS))]
        n = int(rng.integers(0, n_cap + 1))
        tau = float(rng.uniform(0.5, tau_cap))
        yield SystemParams(lambda2=float(l2), j_ising=float(J), delta=float(D)), name, n, tau


def block_deviation(params: SystemParams, atoms: AtomInitState, n: int, tau_max: float,
                    points: int = 101, backend: Optional[str] = None) -> Optional[float]:
    """Max ``|closed form - integrator|`` for one unit-norm block; None if degenerate."""
    from .errors import DegenerateRoots
    from .model import BlockAmplitudes

    y0 = atoms.as_array()
    grid = np.linspace(0.0, tau_max, points)
    try:
        roots = analytic.characteristic_roots(params, n)
        deltas = analytic.delta_coefficients(params, roots,
                                             BlockAmplitudes.from_array(n, y0))
    except DegenerateRoots:
        return None
    from . import _backend
    l2, J, D = params.scaled()
    ana = _backend.get(backend).analytic_grid(
        roots.m[None], deltas.as_array()[None], y0[None], np.array([roots.alpha]),
        np.array([roots.beta]), l2, J, D, grid)[:, 0]
    num = integrate_block_array(params, n, y0, grid, backend=backend)
    return float(np.max(np.abs(ana - num)))


def check_cross_validation(level: str) -> Check:
    count = 100 if level == "full" else 8
    worst, skipped = 0.0, 0
    for params, name, n, tau in oracle_draws(count):
        dev = block_deviation(params, preset(name), n, tau)
        if dev is None:
            skipped += 1
            continue
        worst = max(worst, dev)
    return Check("oracle_equivalence", worst, 1e-7,
                 f"{count} random draws, {skipped} degenerate")


def check_purity_symmetry(level: str) -> Check:
    params = SystemParams(lambda2=2.0, j_ising=-2.0, delta=-2.0, nbar=1.0)
    grid = np.linspace(0.0, 40.0 if level == "full" else 10.0, 81)
    worst = 0.0
    for name in STANDARD_PRESETS:
        psi0 = init_wavefunction(preset(name), FieldSpec(nbar=1.0))
        amps = analytic.evolve_amplitudes(params, psi0, grid)
        pa = purity(reduced_density_atoms_batch(amps))
        pf = np.array([purity(reduced_density_field(a)) for a in amps])
        worst = max(worst, float(np.max(np.abs(pa - pf))))
    return Check("purity_symmetry", worst, 1e-10, "nbar=1, 4 presets")


def check_swap_invariance(level: str) -> Check:
    atoms = ASYMMETRIC
    params = SystemParams(lambda2=2.0, j_ising=-1.0, delta=1.5)
    grid = np.linspace(0.0, 30.0 if level == "full" else 10.0, 301)
    fld = FieldSpec(nbar=25.0)
    a = analytic.evolve_amplitudes(params, init_wavefunction(atoms, fld), grid)
    b = analytic.evolve_amplitudes(params, init_wavefunction(atoms.swapped(), fld), grid)
    ra, rb = reduced_density_atoms_batch(a), reduced_density_atoms_batch(b)
    dev = max(float(np.max(np.abs(concurrence_from_amplitudes(a)
                                  - concurrence_from_amplitudes(b)))),
              float(np.max(np.abs(tangle(ra) - tangle(rb)))),
              float(np.max(np.abs(population_inversion_batch(a)
                                  - np.einsum("tij,ji->t", reduced_density_atom2(rb),
                                              np.diag([1.0, -1.0])).real))))
    return Check("swap_invariance", dev, 1e-10, "b<->c, nbar=25")


def check_sigma_z_routes(level: str) -> Check:
    worst = 0.0
    for _, grid, amps in _trajectories("fast"):
        sel = amps[::50]
        worst = max(worst, float(np.max(np.abs(
            population_inversion_batch(sel)
            - sigma_z_from_rho(reduced_density_atoms_batch(sel))))))
    return Check("sigma_z_routes", worst, 1e-10, "amplitude vs density-matrix route")


def check_werner(level: str) -> Check:
    worst = 0.0
    for p in (0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0):
        worst = max(worst, abs(concurrence(_werner(p)) - max(0.0, (3 * p - 1) / 2)))
    return Check("werner_concurrence", worst, 1e-10, "p in {0, 0.2, 1/3, 0.5, 0.8, 1}")


SUITE: tuple[Callable, ...] = (check_root_residuals, check_conservation, check_oracle_norm,
                               check_cross_validation, check_purity_symmetry,
                               check_swap_invariance, check_sigma_z_routes, check_werner)


def run(level: str = "fast") -> VerifyReport:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    report = VerifyReport(level)
    for fn in SUITE:
        t0 = time.perf_counter()
        out = fn(level)
        out = out if isinstance(out, list) else [out]
        dt = time.perf_counter() - t0
        for c in out:
            c.seconds = dt / len(out)
        report.checks.extend(out)
    return report
