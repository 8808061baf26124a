"""Physical parameters, initial states and the photon-block wavefunction.

The composite state of two atoms and one field mode splits into invariant
four-dimensional blocks labelled by ``n``::

    |ee, n>,  |eg, n+1>,  |ge, n+1>,  |gg, n+2>

Blocks ``n = -1`` and ``n = -2`` are the truncated edge blocks: block -1
holds ``|eg,0>, |ge,0>, |gg,1>`` and block -2 holds ``|gg,0>`` alone.  Slots
that would need a negative photon number are stored as exact zeros.

A :class:`WaveFunction` keeps all blocks in one ``(n_max + 3, 4)`` complex
array whose row ``i`` is block ``n = i - 2`` and whose columns are
``(A, B, C, D)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy.special import gammaln, pdtrc

from .errors import InvalidState, TruncationInsufficient

#: Lowest block index carried by every wavefunction.
N_MIN = -2

HARD_CAP = 4096
DEFAULT_TAIL_TOL = 1e-12
ATOM_NORM_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Couplings and detuning, all rates in the same unit as ``lambda1``.

    Parameters
    ----------
    lambda1 : float
        Atom-field coupling.  Scaled time is ``tau = lambda1 * t``.
    lambda2 : float
        Dipole-dipole (XX) coupling between the atoms.
    j_ising : float
        Ising (ZZ) coupling; negative is ferromagnetic.
    delta : float
        Detuning ``omega_0 - Omega``.
    nbar : float
        Mean photon number of the initial coherent field.
    """

    lambda1: float = 1.0
    lambda2: float = 0.0
    j_ising: float = 0.0
    delta: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValueError(f"lambda1 must be positive, got {self.lambda1}")
        if not self.nbar >= 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        for name in ("lambda2", "j_ising", "delta", "nbar"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def scaled(self) -> tuple[float, float, float]:
        """Return ``(lambda2, J, delta)`` in units of ``lambda1``."""
        return (self.lambda2 / self.lambda1, self.j_ising / self.lambda1,
                self.delta / self.lambda1)


@dataclass(frozen=True)
class AtomInitState:
    """Pure two-atom state ``a|ee> + b|eg> + c|ge> + d|gg>``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        norm = self.norm2()
        if not abs(norm - 1.0) <= ATOM_NORM_TOL:
            raise InvalidState(f"atom amplitudes have norm^2 {norm!r}, expected 1")

    @classmethod
    def normalized(cls, a, b, c, d) -> "AtomInitState":
        v = np.array([a, b, c, d], dtype=complex)
        s = np.linalg.norm(v)
        if s == 0:
            raise InvalidState("all four atom amplitudes are zero")
        return cls(*(v / s))

    def norm2(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    def swapped(self) -> "AtomInitState":
        """Exchange the two atoms (``b <-> c``)."""
        return AtomInitState(self.a, self.c, self.b, self.d)


_S2 = 1 / math.sqrt(2)
_S3 = 1 / math.sqrt(3)

PRESETS: dict[str, AtomInitState] = {
    "bell_c": AtomInitState(_S2, 0, 0, _S2),
    "bell_a": AtomInitState(0, _S2, _S2, 0),
    "w_like": AtomInitState(0, _S3, _S3, _S3),
    "linear": AtomInitState(0.5, 0.5, 0.5, 0.5),
    "ee": AtomInitState(1, 0, 0, 0),
    "eg": AtomInitState(0, 1, 0, 0),
    "ge": AtomInitState(0, 0, 1, 0),
    "gg": AtomInitState(0, 0, 0, 1),
}

#: The four states studied for sudden death.
STANDARD_PRESETS = ("bell_c", "bell_a", "w_like", "linear")


def preset(name: str) -> AtomInitState:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown initial state {name!r}; "
                       f"choose from {', '.join(PRESETS)}") from None


@dataclass(frozen=True)
class FieldSpec:
    """Coherent field and its Fock-space cutoff.

    ``n_max`` is the highest block index (the highest photon number in an
    ``A`` slot); photon numbers up to ``n_max + 2`` are represented.  When
    ``n_max`` is None, :func:`default_n_max` picks it.
    """

    nbar: float
    n_max: Optional[int] = None
    tail_tol: float = DEFAULT_TAIL_TOL
    alpha_phase: float = 0.0

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be >= 0")

    def resolved_n_max(self) -> int:
        if self.n_max is None:
            return default_n_max(self.nbar, self.tail_tol)
        return int(self.n_max)

    def tail_mass(self) -> float:
        return poisson_tail(self.nbar, self.resolved_n_max())


@dataclass(frozen=True)
class BlockAmplitudes:
    """Amplitudes of ``|ee,n>, |eg,n+1>, |ge,n+1>, |gg,n+2>``."""

    n: int
    A: complex = 0j
    B: complex = 0j
    C: complex = 0j
    D: complex = 0j

    @classmethod
    def from_array(cls, n: int, v) -> "BlockAmplitudes":
        return cls(int(n), complex(v[0]), complex(v[1]), complex(v[2]), complex(v[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D], dtype=complex)

    def norm2(self) -> float:
        return abs(self.A) ** 2 + abs(self.B) ** 2 + abs(self.C) ** 2 + abs(self.D) ** 2


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Full composite pure state as a stack of photon blocks.

    ``amps[i]`` holds ``(A, B, C, D)`` of block ``n = i - 2``.
    """

    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[1] != 4 or amps.shape[0] < 3:
            raise ValueError(f"amplitude array must be (n_max + 3, 4), got {amps.shape}")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.amps.shape[0] - 3

    def block(self, n: int) -> BlockAmplitudes:
        return BlockAmplitudes.from_array(n, self.amps[n - N_MIN])

    @property
    def blocks(self) -> list[BlockAmplitudes]:
        return [self.block(n) for n in range(N_MIN, self.n_max + 1)]

    def __iter__(self) -> Iterator[BlockAmplitudes]:
        return iter(self.blocks)

    def block_norms(self) -> np.ndarray:
        return np.sum(np.abs(self.amps) ** 2, axis=1)

    def norm2(self) -> float:
        return float(self.block_norms().sum())

    def swapped(self) -> "WaveFunction":
        return WaveFunction(self.amps[:, [0, 2, 1, 3]])


def poisson_tail(nbar: float, n: int) -> float:
    """Probability that a Poisson(nbar) count exceeds ``n``."""
    if nbar == 0:
        return 0.0
    return float(pdtrc(n, nbar))


def coherent_weights(nbar: float, alpha_phase: float = 0.0, n_max: int = 0) -> np.ndarray:
    """Fock amplitudes ``Q_n`` of the coherent state, ``n = 0..n_max``.

    ``Q_n = alpha**n / sqrt(n!) * exp(-|alpha|**2 / 2)`` with
    ``alpha = sqrt(nbar) * exp(1j * alpha_phase)``, evaluated in log space so
    that large ``nbar`` does not overflow.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    n = np.arange(n_max + 1)
    q = np.zeros(n_max + 1, dtype=complex)
    if nbar == 0:
        q[0] = 1.0
        return q
    logmag = 0.5 * (n * math.log(nbar) - nbar - gammaln(n + 1))
    q[:] = np.exp(logmag)
    if alpha_phase:
        q *= np.exp(1j * alpha_phase * n)
    return q


def default_n_max(nbar: float, tail_tol: float = DEFAULT_TAIL_TOL,
                  hard_cap: int = HARD_CAP) -> int:
    """Smallest cutoff ``ceil(nbar + k*sqrt(nbar+1)) + 10``, ``k = 12, 13, ...``,
    whose Poisson tail beyond ``n_max`` is below ``tail_tol``.

    The tail is measured beyond ``n_max`` itself, which also covers the
    ``B, C`` and ``D`` slots that reach photon number ``n_max + 2``.
    """
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    width = math.sqrt(nbar + 1)
    k = 12
    while True:
        n = math.ceil(nbar + k * width) + 10
        if n > hard_cap:
            raise TruncationInsufficient(
                f"nbar={nbar} needs n_max > {hard_cap} for tail < {tail_tol}")
        if poisson_tail(nbar, n) < tail_tol:
            return n
        k += 1


def init_wavefunction(atoms: AtomInitState, fld: FieldSpec) -> WaveFunction:
    """Product of the atomic state with the truncated coherent field."""
    if abs(atoms.norm2() - 1.0) > ATOM_NORM_TOL:
        raise InvalidState("atom amplitudes are not normalized")
    n_max = fld.resolved_n_max()
    tail = poisson_tail(fld.nbar, n_max)
    if tail >= fld.tail_tol:
        raise TruncationInsufficient(
            f"n_max={n_max} leaves Poisson tail {tail:.3g} >= {fld.tail_tol:g}")
    q = np.zeros(n_max + 5, dtype=complex)
    # q[k + 2] = Q_k; the two leading zeros stand for negative photon numbers.
    q[2:] = coherent_weights(fld.nbar, fld.alpha_phase, n_max + 2)
    rows = np.arange(n_max + 3)  # block n = rows - 2
    amps = np.empty((n_max + 3, 4), dtype=complex)
    amps[:, 0] = q[rows] * atoms.a
    amps[:, 1] = q[rows + 1] * atoms.b
    amps[:, 2] = q[rows + 1] * atoms.c
    amps[:, 3] = q[rows + 2] * atoms.d
    return WaveFunction(amps)
