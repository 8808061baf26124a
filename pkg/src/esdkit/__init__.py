"""Two coupled two-level atoms in a detuned single-mode cavity field.

The atoms interact through a dipole-dipole term ``lambda2`` and an Ising term
``J``; the field starts in a coherent state.  Evolution is solved block by
block in closed form, with an adaptive Runge-Kutta integrator as oracle and
fallback, and the package reports concurrence, entanglement of formation,
population inversion, the atoms-field tangle and sudden-death intervals.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analytic import (characteristic_roots, delta_coefficients, evolve, evolve_amplitudes,
                       evolve_block)
from .errors import (DegenerateRoots, EsdkitError, InvalidState, NonPhysicalDensity,
                     ToleranceNotMet, TruncationInsufficient)
from .model import (STANDARD_PRESETS, PRESETS, AtomInitState, BlockAmplitudes, FieldSpec,
                    SystemParams, WaveFunction, init_wavefunction, preset)
from .observables import (ObservableSeries, concurrence, detect_esd_intervals, eof,
                          population_inversion, reduced_density_atoms, reduced_density_field,
                          reduced_density_one_atom, tangle)
from .oracle import IntegratorConfig, cross_validate, integrate_block
from .runner import RunConfig, SweepConfig, critical_coupling, simulate, sweep

__all__ = [
    "BACKEND", "AtomInitState", "BlockAmplitudes", "DegenerateRoots", "EsdkitError",
    "FieldSpec", "IntegratorConfig", "InvalidState", "NonPhysicalDensity", "ObservableSeries",
    "STANDARD_PRESETS", "PRESETS", "RunConfig", "SweepConfig", "SystemParams", "ToleranceNotMet",
    "TruncationInsufficient", "WaveFunction", "characteristic_roots", "concurrence",
    "critical_coupling", "cross_validate", "delta_coefficients", "detect_esd_intervals", "eof",
    "evolve", "evolve_amplitudes", "evolve_block", "init_wavefunction", "integrate_block",
    "population_inversion", "preset", "reduced_density_atoms", "reduced_density_field",
    "reduced_density_one_atom", "simulate", "sweep", "tangle",
]
