import numpy as np
import pytest

from conftest import expm_state
from esdkit.model import AtomInitState, FieldSpec, SystemParams, init_wavefunction, preset
from esdkit.observables import concurrence_from_amplitudes, population_inversion_batch
from esdkit.runner import (RunConfig, SweepConfig, critical_coupling, resolve_threads,
                           simulate, sweep, window_max, window_mean)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(tau_steps=1), dict(tau_max=0), dict(tau_min=5, tau_max=4),
                                    dict(nbar=-1), dict(esd_tol=0), dict(min_duration=-1),
                                    dict(observables=("entropy",))])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            RunConfig(**kw)

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            RunConfig(init="nope")

    def test_grid(self):
        g = RunConfig(tau_min=1.0, tau_max=3.0, tau_steps=5).grid()
        assert g.tolist() == [1.0, 1.5, 2.0, 2.5, 3.0]

    def test_sweep_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(RunConfig(), "lambda1", 0, 1, 3)
        with pytest.raises(ValueError):
            SweepConfig(RunConfig(), "j_ising", 1, 0, 3)
        with pytest.raises(ValueError):
            SweepConfig(RunConfig(), "j_ising", 0, 1, 1)
        assert SweepConfig(RunConfig(), "delta", 2, 2, 3).values().tolist() == [2, 2, 2]

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("ESDKIT_THREADS", "3")
        assert resolve_threads() == 3
        assert resolve_threads(0) == 1
        monkeypatch.delenv("ESDKIT_THREADS")
        assert resolve_threads() == 1


class TestSimulate:
    def test_matches_brute_force(self):
        cfg = RunConfig(init="w_like", nbar=4.0, lambda2=1.5, j_ising=-1.0, delta=0.5,
                        tau_max=6.0, tau_steps=7)
        series = simulate(cfg)
        psi0 = init_wavefunction(preset("w_like"), FieldSpec(nbar=4.0))
        ref = np.array([expm_state(cfg.params(), psi0, t) for t in cfg.grid()])
        assert np.max(np.abs(series.concurrence - concurrence_from_amplitudes(ref))) < 1e-9
        assert np.max(np.abs(series.sigma_z - population_inversion_batch(ref))) < 1e-9

    def test_custom_state(self):
        atoms = AtomInitState.normalized(1, 0, 0, 1j)
        s = simulate(RunConfig(init=atoms, nbar=1.0, tau_max=1.0, tau_steps=3))
        assert s.concurrence[0] == pytest.approx(1.0, abs=1e-12)

    def test_chunking_and_threads_invariant(self):
        cfg = RunConfig(init="bell_c", nbar=25.0, lambda2=2.0, j_ising=-2.0, delta=-1.0,
                        tau_max=20.0, tau_steps=301)
        a = simulate(cfg, chunk=512, threads=1)
        b = simulate(cfg, chunk=37, threads=3)
        for name in ("concurrence", "eof", "sigma_z", "tangle"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
        assert a.esd_intervals == b.esd_intervals

    def test_esd_optional(self):
        cfg = RunConfig(nbar=4.0, tau_max=10.0, tau_steps=11, observables=("concurrence",))
        assert simulate(cfg).esd_intervals == []

    def test_vacuum_edge_blocks(self):
        # nbar = 0 puts all weight of D into the n = -2 edge block
        s = simulate(RunConfig(init="bell_c", nbar=0.0, lambda2=1.0, tau_max=5.0, tau_steps=11))
        psi0 = init_wavefunction(preset("bell_c"), FieldSpec(nbar=0.0))
        ref = np.array([expm_state(SystemParams(lambda2=1.0), psi0, t)
                        for t in np.linspace(0, 5, 11)])
        assert np.max(np.abs(s.concurrence - concurrence_from_amplitudes(ref))) < 1e-9


class TestSweep:
    def test_order_and_values(self):
        base = RunConfig(init="bell_a", nbar=4.0, tau_max=4.0, tau_steps=9)
        res = sweep(SweepConfig(base, "j_ising", -1.0, 1.0, 5), threads=3)
        assert [v for v, _ in res] == [-1.0, -0.5, 0.0, 0.5, 1.0]
        for v, s in res:
            ref = simulate(RunConfig(init="bell_a", nbar=4.0, tau_max=4.0, tau_steps=9,
                                     j_ising=v))
            assert np.array_equal(s.concurrence, ref.concurrence)

    def test_equal_endpoints(self):
        base = RunConfig(nbar=2.0, tau_max=2.0, tau_steps=5)
        res = sweep(SweepConfig(base, "delta", 1.0, 1.0, 3))
        assert all(np.array_equal(res[0][1].concurrence, s.concurrence) for _, s in res)


class TestWindows:
    def _series(self):
        s = simulate(RunConfig(nbar=1.0, tau_max=4.0, tau_steps=5))
        s.concurrence[:] = [0.5, 0.1, 0.2, 0.0, 0.3]
        s.sigma_z[:] = [1, 2, 3, 4, 5]
        return s

    def test_window_helpers(self):
        s = self._series()
        assert window_max(s, 1, 3) == 0.2
        assert window_mean(s, 1, 3) == 3.0

    def test_critical_coupling(self):
        s = self._series()
        dead = self._series()
        dead.concurrence[:] = 0
        assert critical_coupling([(2.0, dead), (0.5, s), (1.5, dead)], 0, 4) == 1.5
        assert critical_coupling([(0.5, s)], 0, 4) is None
