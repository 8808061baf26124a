"""Closed-form evolution of each photon block.

Inside block ``n`` the sum ``S = B + C`` obeys a third-order linear ODE whose
exponents ``m_1, m_2, m_3`` are the roots of a cubic, found here with
Cardano's formula.  ``B - C`` only picks up the phase ``exp(i(lambda2+J)t)``,
and ``A``, ``D`` follow from ``S`` by one quadrature each.

All rates are used in units of ``lambda1``; times are scaled times ``tau``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegenerateRoots, TruncationInsufficient
from .model import N_MIN, BlockAmplitudes, SystemParams, WaveFunction

ROOT_SEP_TOL = 1e-8
ROOT_RESIDUAL_TOL = 1e-9
NORM_GUARD_TOL = 1e-8

_W = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class RootSet:
    """Cardano data and exponents for one block."""

    n: int
    alpha: float
    beta: float
    mu: complex
    eta: float
    v1: complex
    v2: complex
    m1: complex
    m2: complex
    m3: complex

    @property
    def m(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])


@dataclass(frozen=True)
class DeltaSet:
    delta1: complex
    delta2: complex
    delta3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.delta1, self.delta2, self.delta3])


def couplings(n):
    """Block couplings ``alpha = sqrt(n+1)``, ``beta = sqrt(n+2)`` (lambda1 units),
    clipped to zero for the edge blocks."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(np.maximum(n + 1, 0.0)), np.sqrt(np.maximum(n + 2, 0.0))


def cubic_coefficients(l2, J, D, alpha, beta):
    """``(mu, eta)`` of the depressed cubic ``y**3 + eta*y + mu = 0`` with
    ``m = y - i(lambda2 + J)/3``."""
    a2 = alpha * alpha
    b2 = beta * beta
    mu = (2.0 / 27.0) * 1j * (
        (-27 * a2 * D + 27 * b2 * D + 8 * J ** 3 + 18 * a2 * J + 18 * b2 * J - 18 * D * D * J)
        + l2 * (-9 * a2 - 9 * b2 + 9 * D * D - 12 * J * J)
        + 6 * J * l2 ** 2 - l2 ** 3
    )
    eta = 2 * (a2 + b2) + D * D + (l2 - 2 * J) ** 2 / 3.0
    return mu, eta


def char_poly_residual(l2, J, D, alpha, beta, m):
    """Scaled residual of candidate exponents in the homogeneous block equation.

    With ``x = m + i(J+D)``, ``y = m + i(lambda2-J)``, ``z = m + i(J-D)`` the
    characteristic polynomial is ``x*y*z + 2*beta**2*x + 2*alpha**2*z``.  The
    residual is divided by ``R**3 + 2*(alpha**2 + beta**2)*R`` where ``R`` is
    the largest root or coefficient scale, so a root near zero is not judged
    against its own rounding noise.
    """
    m = np.asarray(m)
    a2 = np.asarray(alpha, dtype=float) ** 2
    b2 = np.asarray(beta, dtype=float) ** 2
    while a2.ndim < m.ndim:
        a2, b2 = a2[..., None], b2[..., None]
    x = m + 1j * (J + D)
    y = m + 1j * (l2 - J)
    z = m + 1j * (J - D)
    poly = x * y * z + 2 * b2 * x + 2 * a2 * z
    r = np.maximum(np.max(np.abs(m), axis=-1, keepdims=m.ndim > 0),
                   abs(J) + abs(D) + abs(l2))
    r = np.maximum(r, np.sqrt(a2 + b2))
    return np.abs(poly) / (r ** 3 + 2 * (a2 + b2) * r + 1e-300)


def _roots_vec(l2, J, D, alpha, beta):
    mu, eta = cubic_coefficients(l2, J, D, alpha, beta)
    mu = np.asarray(mu, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    r = np.sqrt(mu * mu / 4 + eta ** 3 / 27 + 0j)
    p = -mu / 2 + r
    q = -mu / 2 - r
    # Take the larger radicand for v1 so v1 is never a cancellation remnant.
    swap = np.abs(p) < np.abs(q)
    p, q = np.where(swap, q, p), np.where(swap, p, q)
    v1 = p ** (1.0 / 3.0)
    c = q ** (1.0 / 3.0)
    cands = np.stack([c, c * _W, c * _W * _W])
    k = np.argmin(np.abs(v1 * cands + eta / 3), axis=0)
    v2 = np.take_along_axis(cands, k[None], axis=0)[0]
    shift = -1j * (l2 + J) / 3
    s = v1 + v2
    d = 1j * np.sqrt(3) / 2 * (v1 - v2)
    m = np.stack([s + shift, -s / 2 + d + shift, -s / 2 - d + shift], axis=-1)
    return mu, eta, v1, v2, m


def _min_separation(m):
    return np.minimum.reduce([np.abs(m[..., 0] - m[..., 1]),
                              np.abs(m[..., 0] - m[..., 2]),
                              np.abs(m[..., 1] - m[..., 2])])


def characteristic_roots(params: SystemParams, n: int,
                         root_sep_tol: float = ROOT_SEP_TOL) -> RootSet:
    """Exponents of block ``n >= 0``.

    Raises
    ------
    DegenerateRoots
        If two exponents are closer than ``root_sep_tol * max|m|``, or a
        root fails the residual check.
    """
    if n < 0:
        raise ValueError("closed-form roots are only defined for blocks n >= 0")
    l2, J, D = params.scaled()
    alpha, beta = couplings(n)
    mu, eta, v1, v2, m = _roots_vec(l2, J, D, alpha, beta)
    sep = float(_min_separation(m))
    scale = float(np.max(np.abs(m)))
    if sep < root_sep_tol * scale:
        raise DegenerateRoots(f"block {n}: exponents separated by {sep:.3g}", n=n,
                              separation=sep)
    res = char_poly_residual(l2, J, D, alpha, beta, m)
    if np.max(res) > ROOT_RESIDUAL_TOL:
        raise DegenerateRoots(f"block {n}: root residual {np.max(res):.3g}", n=n,
                              separation=sep)
    return RootSet(n, float(alpha), float(beta), complex(mu), float(eta), complex(v1),
                   complex(v2), *(complex(x) for x in m))


def _deltas_vec(l2, J, D, alpha, beta, m, A0, S0, D0):
    m1, m2, m3 = m[..., 0], m[..., 1], m[..., 2]
    ab = 2 * (alpha ** 2 + beta ** 2) + (l2 - J) ** 2

    def numerator(msum):
        return (2 * alpha * A0 * (1j * msum - l2 - D)
                + 2 * beta * D0 * (1j * msum - l2 + D)
                + (1j * msum * (l2 - J - 1j * m1) - ab - m1 ** 2) * S0)

    den2 = (m1 - m2) * (m3 - m2)
    den3 = (m1 - m3) * (m2 - m3)
    d2 = numerator(m1 + m3) / den2
    d3 = numerator(m1 + m2) / den3
    d1 = S0 - (d2 + d3)
    return np.stack([d1, d2, d3], axis=-1), np.minimum(np.abs(den2), np.abs(den3))


def delta_coefficients(params: SystemParams, roots: RootSet, block0: BlockAmplitudes,
                       root_sep_tol: float = ROOT_SEP_TOL) -> DeltaSet:
    """Weights of ``exp(m_j t)`` in ``B + C`` for the given initial block."""
    l2, J, D = params.scaled()
    m = roots.m
    ds, den = _deltas_vec(l2, J, D, roots.alpha, roots.beta, m, block0.A,
                          block0.B + block0.C, block0.D)
    if den < (root_sep_tol * np.max(np.abs(m))) ** 2:
        raise DegenerateRoots(f"block {roots.n}: delta denominator {den:.3g}", n=roots.n)
    return DeltaSet(*(complex(x) for x in ds))


def evolve_block(params: SystemParams, block0: BlockAmplitudes, tau: float,
                 backend: str | None = None) -> BlockAmplitudes:
    """Amplitudes of block ``block0.n`` at scaled time ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    roots = characteristic_roots(params, block0.n)
    deltas = delta_coefficients(params, roots, block0)
    l2, J, D = params.scaled()
    out = _backend.get(backend).analytic_grid(
        roots.m[None], deltas.as_array()[None], block0.as_array()[None],
        np.array([roots.alpha]), np.array([roots.beta]), l2, J, D, np.array([float(tau)]))
    return BlockAmplitudes.from_array(block0.n, out[0, 0])


@dataclass(frozen=True, eq=False)
class BlockPlan:
    """Precomputed exponents and weights for every regular block of a state.

    ``closed`` indexes (into the amplitude array rows) the blocks evaluated in
    closed form; all other rows go to the numerical integrator.
    """

    params: SystemParams
    init: np.ndarray
    closed: np.ndarray
    m: np.ndarray
    delta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def numeric(self) -> np.ndarray:
        mask = np.ones(self.init.shape[0], dtype=bool)
        mask[self.closed] = False
        return np.flatnonzero(mask)


def plan(params: SystemParams, psi0: WaveFunction,
         root_sep_tol: float = ROOT_SEP_TOL) -> BlockPlan:
    l2, J, D = params.scaled()
    init = np.asarray(psi0.amps)
    rows = np.arange(init.shape[0])
    n = rows + N_MIN
    regular = n >= 0
    alpha, beta = couplings(n[regular])
    _, _, _, _, m = _roots_vec(l2, J, D, alpha, beta)
    ok = _min_separation(m) >= root_sep_tol * np.max(np.abs(m), axis=-1)
    ok &= np.max(char_poly_residual(l2, J, D, alpha, beta, m), axis=-1) <= ROOT_RESIDUAL_TOL
    blk = init[regular]
    delta, den = _deltas_vec(l2, J, D, alpha, beta, m, blk[:, 0], blk[:, 1] + blk[:, 2],
                             blk[:, 3])
    ok &= den >= (root_sep_tol * np.max(np.abs(m), axis=-1)) ** 2
    sel = np.flatnonzero(ok)
    return BlockPlan(params, init, rows[regular][sel], m[sel], delta[sel], alpha[sel],
                     beta[sel])


def _check_grid(grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.ndim != 1:
        raise ValueError("time grid must be one-dimensional")
    if grid.size and (grid[0] < 0 or np.any(np.diff(grid) <= 0)):
        raise ValueError("time grid must be strictly ascending with tau >= 0")
    return grid


def evaluate(bp: BlockPlan, grid: np.ndarray, cfg=None, backend: str | None = None,
             numeric: dict | None = None) -> np.ndarray:
    """Amplitudes of every block of ``bp`` on ``grid``, ``(T, n_max + 3, 4)``.

    Closed-form blocks whose norm drifts by more than ``NORM_GUARD_TOL``
    relative to their initial norm are re-solved numerically; the closed form
    is linear in the initial block, so a healthy block drifts by ~1e-12
    relative whatever its weight.  ``numeric`` may supply already integrated rows
    (keyed by array row) for the blocks in ``bp.numeric``.
    """
    from .oracle import integrate_block_array

    params = bp.params
    init = bp.init
    l2, J, D = params.scaled()
    out = np.zeros((grid.size,) + init.shape, dtype=complex)
    norm0 = np.sum(np.abs(init) ** 2, axis=1)
    redo = set(bp.numeric.tolist())
    if bp.closed.size and grid.size:
        out[:, bp.closed] = _backend.get(backend).analytic_grid(
            bp.m, bp.delta, init[bp.closed], bp.alpha, bp.beta, l2, J, D, grid)
        n0 = norm0[bp.closed]
        drift = np.max(np.abs(np.sum(np.abs(out[:, bp.closed]) ** 2, axis=2) - n0), axis=0)
        redo.update(bp.closed[drift > NORM_GUARD_TOL * n0].tolist())
    numeric = numeric or {}
    for row in sorted(redo):
        if not np.any(init[row]):
            out[:, row] = 0
            continue
        if row in numeric:
            out[:, row] = numeric[row]
            continue
        out[:, row] = integrate_block_array(params, row + N_MIN, init[row], grid, cfg,
                                            backend=backend)
        d = np.max(np.abs(np.sum(np.abs(out[:, row]) ** 2, axis=1) - norm0[row]),
                   initial=0.0)
        if d > NORM_GUARD_TOL:
            raise TruncationInsufficient(f"block {row + N_MIN}: norm drift {d:.3g}")
    return out


def evolve_amplitudes(params: SystemParams, psi0: WaveFunction, grid,
                      cfg=None, backend: str | None = None) -> np.ndarray:
    """Amplitude array of shape ``(len(grid), n_max + 3, 4)``.

    Regular blocks use the closed form; edge blocks, blocks with
    degenerate exponents and blocks whose relative norm drift exceeds
    ``NORM_GUARD_TOL`` are integrated numerically instead.
    """
    grid = _check_grid(grid)
    return evaluate(plan(params, psi0), grid, cfg=cfg, backend=backend)


def evolve(params: SystemParams, psi0: WaveFunction, grid, cfg=None,
           backend: str | None = None) -> list[WaveFunction]:
    """State at every point of ``grid`` (scaled times, ascending, >= 0)."""
    amps = evolve_amplitudes(params, psi0, grid, cfg=cfg, backend=backend)
    return [WaveFunction(a) for a in amps]
