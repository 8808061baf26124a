"""Reduced states and entanglement measures.

Two-atom density matrices use the basis order ``(ee, eg, ge, gg)``; atom 1
is the left tensor factor.  Functions with a ``_batch`` suffix act on a
stack of amplitude arrays ``(T, n_max + 3, 4)`` or of matrices ``(T, 4, 4)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NonPhysicalDensity
from .model import WaveFunction

CLAMP_TOL = 1e-9
NEGATIVE_TOL = 1e-7
IMAG_TOL = 1e-8
NORM_TOL = 1e-8

_SY = np.array([[0, -1j], [1j, 0]])
YY = np.kron(_SY, _SY)
SIGMA_Z = np.diag([1.0, -1.0])


def _amps(psi):
    return np.asarray(psi.amps if isinstance(psi, WaveFunction) else psi)


def photon_vectors(amps: np.ndarray) -> np.ndarray:
    """Atomic 4-vectors ``v_l`` for every photon number ``l``.

    ``amps`` has shape ``(..., n_max + 3, 4)`` with rows for blocks
    ``-2..n_max``; the result has shape ``(..., n_max + 3, 4)`` with rows for
    ``l = 0..n_max + 2``.  ``A_l`` sits in block ``l``, ``B_l, C_l`` in block
    ``l - 1`` and ``D_l`` in block ``l - 2``.
    """
    amps = np.asarray(amps)
    nb = amps.shape[-2]
    v = np.zeros_like(amps)
    v[..., :nb - 2, 0] = amps[..., 2:, 0]
    v[..., :nb - 1, 1] = amps[..., 1:, 1]
    v[..., :nb - 1, 2] = amps[..., 1:, 2]
    v[..., :, 3] = amps[..., :, 3]
    return v


def reduced_density_atoms_batch(amps: np.ndarray) -> np.ndarray:
    v = photon_vectors(amps)
    return np.einsum("...li,...lj->...ij", v, v.conj())


def reduced_density_atoms(psi: WaveFunction) -> np.ndarray:
    """Two-atom state after tracing out the field, ``sum_l v_l v_l^dagger``."""
    amps = _amps(psi)
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidState(f"wavefunction norm^2 is {norm!r}")
    return reduced_density_atoms_batch(amps)


def reduced_density_one_atom(rho: np.ndarray) -> np.ndarray:
    """Atom-1 state: partial trace of a ``(..., 4, 4)`` matrix over atom 2."""
    rho = np.asarray(rho)
    r = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...ikjk->...ij", r)


def reduced_density_atom2(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    r = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...kikj->...ij", r)


def reduced_density_field(psi: WaveFunction) -> np.ndarray:
    """Field state over photon numbers ``0..n_max + 2`` (both atoms traced out).

    The matrix is dense, so keep this to modest cutoffs.
    """
    v = photon_vectors(_amps(psi))
    return v @ v.conj().T


def purity(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    return np.einsum("...ij,...ji->...", rho, rho).real


def check_density(rho: np.ndarray, tol: float = 1e-10) -> None:
    """Raise NonPhysicalDensity unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - np.swapaxes(rho.conj(), -1, -2)))
    if herm > tol:
        raise NonPhysicalDensity(f"not Hermitian (deviation {herm:.3g})")
    tr = np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1))
    if tr > tol:
        raise NonPhysicalDensity(f"trace deviates from 1 by {tr:.3g}")
    low = np.min(np.linalg.eigvalsh(rho))
    if low < -CLAMP_TOL:
        raise NonPhysicalDensity(f"eigenvalue {low:.3g} below zero")


def _spin_flip_eigs(rho):
    rho = np.asarray(rho, dtype=complex)
    rt = YY @ rho.conj() @ YY
    ev = np.linalg.eigvals(rho @ rt)
    if np.max(np.abs(ev.imag), initial=0.0) > IMAG_TOL:
        raise NonPhysicalDensity(
            f"spin-flip eigenvalue has imaginary part {np.max(np.abs(ev.imag)):.3g}")
    lam = ev.real
    if np.min(lam, initial=0.0) < -NEGATIVE_TOL:
        raise NonPhysicalDensity(f"spin-flip eigenvalue {np.min(lam):.3g} is negative")
    return np.where(lam < 0, 0.0, lam)


def concurrence_batch(rho: np.ndarray) -> np.ndarray:
    """Wootters concurrence of each matrix in a ``(..., 4, 4)`` stack."""
    lam = _spin_flip_eigs(rho)
    eps = np.sort(np.sqrt(lam), axis=-1)[..., ::-1]
    c = eps[..., 0] - eps[..., 1] - eps[..., 2] - eps[..., 3]
    return np.clip(c, 0.0, 1.0)


def concurrence(rho: np.ndarray) -> float:
    """``max(0, e1 - e2 - e3 - e4)`` from the square roots of the
    eigenvalues of ``rho @ (sy sy) rho* (sy sy)``, in decreasing order.

    Eigenvalues in ``[-1e-7, 0)`` are numerical noise and are clamped to zero;
    anything more negative raises :class:`NonPhysicalDensity`.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    return float(concurrence_batch(rho))


def concurrence_from_amplitudes(amps: np.ndarray) -> np.ndarray:
    """Concurrence of the two-atom reduction, straight from the amplitudes.

    The photon vectors ``v_l`` form a decomposition of ``rho``, so the
    ``eps_i`` are the singular values of ``tau_kl = v_k^T (sy sy) v_l``.
    Compressing ``v`` by QR keeps this 4x4; it avoids taking square roots of
    eigenvalues that are zero up to rounding, which the eigenvalue route
    turns into errors of order 1e-8.
    """
    r = np.linalg.qr(photon_vectors(amps), mode="r")
    s = np.linalg.svd(r @ YY @ np.swapaxes(r, -1, -2), compute_uv=False)
    return np.clip(s[..., 0] - s[..., 1:].sum(axis=-1), 0.0, 1.0)


def binary_entropy(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, h)


def eof(c):
    """Entanglement of formation for concurrence ``c``."""
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    val = binary_entropy((1 + np.sqrt(1 - c * c)) / 2)
    return float(val) if val.ndim == 0 else val


def population_inversion_batch(amps: np.ndarray) -> np.ndarray:
    p = np.abs(np.asarray(amps)) ** 2
    return np.sum(p[..., 0] + p[..., 1] - p[..., 2] - p[..., 3], axis=-1)


def population_inversion(psi: WaveFunction) -> float:
    """``<sigma_z>`` of atom 1: ``sum |A|^2 + |B|^2 - |C|^2 - |D|^2``."""
    return float(population_inversion_batch(_amps(psi)))


def sigma_z_from_rho(rho: np.ndarray):
    """``Tr(rho_1 sigma_z)`` via the one-atom reduced state."""
    r1 = reduced_density_one_atom(rho)
    return np.einsum("...ij,ji->...", r1, SIGMA_Z).real


def tangle(rho: np.ndarray):
    """Atoms-field tangle ``2 (1 - Tr rho^2)`` for a reduction of a pure state."""
    val = 2.0 * (1.0 - purity(rho))
    return float(val) if np.ndim(val) == 0 else val


def detect_esd_intervals(tau, c, esd_tol: float = 1e-6, min_duration: float = 0.5):
    """Maximal runs where ``c < esd_tol`` that last at least ``min_duration``.

    Run edges are placed where the straight line between the neighbouring
    samples crosses ``esd_tol``; a run touching the end of the grid ends
    there.
    """
    tau = np.asarray(tau, dtype=float)
    c = np.asarray(c, dtype=float)
    if tau.shape != c.shape:
        raise ValueError("tau and concurrence series differ in length")
    dead = c < esd_tol
    if not dead.any():
        return []
    edges = np.diff(np.concatenate([[0], dead.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1

    def cross(i, j):
        # threshold crossing between sample i (alive) and j (dead), or reverse
        ci, cj = c[i], c[j]
        if ci == cj:
            return tau[j]
        f = (ci - esd_tol) / (ci - cj)
        return tau[i] + f * (tau[j] - tau[i])

    out = []
    for s, e in zip(starts, stops):
        t0 = tau[0] if s == 0 else cross(s - 1, s)
        t1 = tau[-1] if e == len(tau) - 1 else cross(e + 1, e)
        if t1 - t0 >= min_duration:
            out.append((float(t0), float(t1)))
    return out


OBSERVABLES = ("concurrence", "eof", "sigma_z", "tangle")


@dataclass
class ObservableSeries:
    """Observables on a time grid, plus sudden-death intervals."""

    tau: np.ndarray
    concurrence: np.ndarray
    eof: np.ndarray
    sigma_z: np.ndarray
    tangle: np.ndarray
    esd_intervals: list = field(default_factory=list)

    def check_ranges(self, slack: float = 1e-9) -> None:
        for name, lo, hi in (("concurrence", 0, 1), ("eof", 0, 1), ("sigma_z", -1, 1),
                             ("tangle", 0, 2)):
            v = getattr(self, name)
            if v.size and (v.min() < lo - slack or v.max() > hi + slack):
                raise NonPhysicalDensity(f"{name} leaves [{lo}, {hi}]")


def observables_batch(amps: np.ndarray) -> dict:
    """All per-time observables for an amplitude stack ``(T, n_max + 3, 4)``."""
    rho = reduced_density_atoms_batch(amps)
    c = concurrence_from_amplitudes(amps)
    return {
        "concurrence": c,
        "eof": np.asarray(eof(c)),
        "sigma_z": population_inversion_batch(amps),
        "tangle": np.clip(2.0 * (1.0 - purity(rho)), 0.0, 2.0),
        "rho": rho,
    }
