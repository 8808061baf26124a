import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import block_hamiltonian, expm_block
from esdkit import analytic
from esdkit.errors import DegenerateRoots, TruncationInsufficient
from esdkit.model import (STANDARD_PRESETS, AtomInitState, BlockAmplitudes, FieldSpec, SystemParams,
                          init_wavefunction, preset)
from esdkit.oracle import cross_validate, integrate_block_array

couplings = st.floats(-5, 5, allow_nan=False)
detunings = st.floats(-3, 3, allow_nan=False)
blocks = st.integers(0, 230)

# Matrix-exponential propagation of one block (see conftest.expm_block), frozen.
FROZEN = [
    ((0, 0.0, 0.0, 0.0), (1, 0, 0, 0), 1.0,
     [0.410031423416702, -0.260526763595823j, -0.260526763595823j, -0.83434156237805]),
    ((99, 0.0, 0.0, 0.0), "bell_c", 5.0,
     [0.679388088893206, 0.196279748403693j, 0.196279748403693j, 0.679249840193726]),
    ((5, 4.0, -4.0, -2.0), "w_like", 3.7,
     [0.185526223692245 + 0.041131066773805j, 0.369981544125401 + 0.57753252265766j,
      0.369981544125401 + 0.57753252265766j, 0.145260758057153 + 0.043900482864431j]),
    ((230, 2.0, -2.0, -2.0), "linear", 50.0,
     [-0.232418850096313 + 0.342570189876095j, -0.087167811540888 + 0.518448117693097j,
      -0.087167811540888 + 0.518448117693097j, 0.234492487771315 + 0.469964956236099j]),
    ((0, 2.0, 1.0, 0.0), (0, 1, 0, 0), 2.5,
     [0.03879543053069 - 0.051933430466663j, -0.222172102495914 + 0.173560318281941j,
      -0.56880742033094 - 0.764439658492797j, 0.054865024014606 - 0.073444961706514j]),
]


def _y0(spec):
    return preset(spec).as_array() if isinstance(spec, str) else np.array(spec, dtype=complex)


class TestRoots:
    def test_resonant_n0(self):
        r = analytic.characteristic_roots(SystemParams(), 0)
        assert sorted(r.m.imag) == pytest.approx([-np.sqrt(6), 0, np.sqrt(6)], abs=1e-12)
        assert np.max(np.abs(r.m.real)) < 1e-12
        assert r.mu == pytest.approx(0, abs=1e-12) and r.eta == pytest.approx(6)

    @pytest.mark.parametrize("n", [0, 1, 7, 99, 230])
    def test_resonant_any_n(self, n):
        r = analytic.characteristic_roots(SystemParams(), n)
        w = np.sqrt(2 * (2 * n + 3))
        assert sorted(r.m.imag) == pytest.approx([-w, 0, w], abs=1e-9)
        res = analytic.char_poly_residual(0, 0, 0, r.alpha, r.beta, r.m)
        assert np.max(res) < 1e-9

    @given(couplings, couplings, detunings, blocks)
    @settings(max_examples=200, deadline=None)
    def test_invariants(self, l2, J, D, n):
        r = analytic.characteristic_roots(SystemParams(lambda2=l2, j_ising=J, delta=D), n)
        # Cardano branch pairing
        assert abs(r.v1 * r.v2 + r.eta / 3) <= 1e-9 * max(abs(r.eta) / 3, 1.0)
        assert np.max(analytic.char_poly_residual(l2, J, D, r.alpha, r.beta, r.m)) < 1e-9
        # exponents are -i times the eigenvalues of the rotating-frame generator
        ev = np.linalg.eigvalsh(block_hamiltonian(n, l2, J, D))
        # drop the B - C mode, eigenvalue -(l2 + J)
        k = np.argmin(np.abs(ev + l2 + J))
        ev = np.delete(ev, k)
        assert np.sort(r.m.imag) == pytest.approx(np.sort(-ev), abs=1e-8 * (1 + np.abs(ev).max()))

    def test_negative_block_rejected(self):
        with pytest.raises(ValueError):
            analytic.characteristic_roots(SystemParams(), -1)

    def test_degenerate_detected(self):
        # the exponents of a block are the spectrum of an irreducible Jacobi matrix, so
        # they never coincide; a loose separation tolerance exercises the error path
        params = SystemParams(lambda2=5.0, j_ising=-5.0)
        with pytest.raises(DegenerateRoots) as exc:
            analytic.characteristic_roots(params, 0, root_sep_tol=0.5)
        assert exc.value.n == 0 and exc.value.separation > 0

    def test_separation_scan(self):
        # smallest pairwise separation over a J scan stays well away from zero
        seps = []
        for J in np.linspace(-5, 5, 201):
            a, b = analytic.couplings(0)
            m = analytic._roots_vec(5.0, J, 0.0, a, b)[4]
            seps.append(float(analytic._min_separation(m)))
        assert min(seps) > 0.3


class TestDeltas:
    def test_zero_block(self):
        p = SystemParams(lambda2=1.0, j_ising=0.5, delta=0.3)
        r = analytic.characteristic_roots(p, 3)
        d = analytic.delta_coefficients(p, r, BlockAmplitudes(3))
        assert np.all(d.as_array() == 0)

    def test_bell_c_sum(self):
        p = SystemParams(lambda2=2.0, j_ising=-2.0, delta=-2.0)
        r = analytic.characteristic_roots(p, 10)
        b0 = BlockAmplitudes.from_array(10, preset("bell_c").as_array())
        d = analytic.delta_coefficients(p, r, b0)
        assert d.delta1 == pytest.approx(-(d.delta2 + d.delta3), abs=1e-14)

    @given(couplings, couplings, detunings, blocks, st.sampled_from(STANDARD_PRESETS))
    @settings(max_examples=100, deadline=None)
    def test_sum_identity(self, l2, J, D, n, name):
        p = SystemParams(lambda2=l2, j_ising=J, delta=D)
        y0 = preset(name).as_array()
        d = analytic.delta_coefficients(p, analytic.characteristic_roots(p, n),
                                        BlockAmplitudes.from_array(n, y0))
        assert abs(sum(d.as_array()) - (y0[1] + y0[2])) < 1e-10

    def test_w_like_against_oracle(self):
        p = SystemParams(lambda2=2.0, j_ising=-2.0, delta=-2.0, nbar=100.0)
        psi = init_wavefunction(preset("w_like"), FieldSpec(nbar=100.0))
        b0 = psi.block(50)
        got = analytic.evolve_block(p, b0, 1.0).as_array()
        ref = integrate_block_array(p, 50, b0.as_array(), [1.0])[0]
        assert np.max(np.abs(got - ref)) < 1e-8


class TestEvolveBlock:
    @pytest.mark.parametrize("case", FROZEN, ids=lambda c: f"n{c[0][0]}")
    def test_frozen_expm_values(self, case, backend):
        (n, l2, J, D), spec, tau, expected = case
        p = SystemParams(lambda2=l2, j_ising=J, delta=D)
        got = analytic.evolve_block(p, BlockAmplitudes.from_array(n, _y0(spec)), tau,
                                    backend=backend)
        assert np.max(np.abs(got.as_array() - np.array(expected))) < 1e-11

    def test_tau_zero_identity(self, backend):
        p = SystemParams(lambda2=1.3, j_ising=-0.7, delta=0.4)
        b0 = BlockAmplitudes.from_array(12, AtomInitState.normalized(1, 2j, 3, 4).as_array())
        got = analytic.evolve_block(p, b0, 0.0, backend=backend)
        assert np.max(np.abs(got.as_array() - b0.as_array())) < 1e-12

    def test_negative_tau(self):
        with pytest.raises(ValueError):
            analytic.evolve_block(SystemParams(), BlockAmplitudes(0, 1), -1.0)

    @given(couplings, couplings, detunings, blocks, st.floats(0, 50),
           st.sampled_from(STANDARD_PRESETS + ("ee", "eg")))
    @settings(max_examples=150, deadline=None)
    def test_matches_expm(self, l2, J, D, n, tau, name):
        p = SystemParams(lambda2=l2, j_ising=J, delta=D)
        y0 = preset(name).as_array()
        got = analytic.evolve_block(p, BlockAmplitudes.from_array(n, y0), tau).as_array()
        ref = expm_block(n, l2, J, D, y0, tau)
        assert np.max(np.abs(got - ref)) < 1e-9
        assert abs(np.sum(np.abs(got) ** 2) - 1) < 1e-10

    @given(couplings, couplings, detunings, blocks, st.floats(0, 200))
    @settings(max_examples=100, deadline=None)
    def test_b_minus_c_law(self, l2, J, D, n, tau):
        p = SystemParams(lambda2=l2, j_ising=J, delta=D)
        b0 = BlockAmplitudes.from_array(n, np.array([0.5, 0.6j, 0.3, np.sqrt(0.3)]))
        got = analytic.evolve_block(p, b0, tau)
        assert abs(abs(got.B - got.C) - abs(b0.B - b0.C)) < 1e-12
        expected = (b0.B - b0.C) * np.exp(1j * (l2 + J) * tau)
        assert abs((got.B - got.C) - expected) < 1e-9

    @given(couplings, couplings, detunings, blocks, st.floats(0, 50))
    @settings(max_examples=60, deadline=None)
    def test_swap_covariance(self, l2, J, D, n, tau):
        p = SystemParams(lambda2=l2, j_ising=J, delta=D)
        y0 = np.array([0.5, 0.6j, 0.3, np.sqrt(0.3)])
        a = analytic.evolve_block(p, BlockAmplitudes.from_array(n, y0), tau).as_array()
        b = analytic.evolve_block(p, BlockAmplitudes.from_array(n, y0[[0, 2, 1, 3]]),
                                  tau).as_array()
        assert np.max(np.abs(a[[0, 2, 1, 3]] - b)) < 1e-12

    def test_resonant_singular_branch(self):
        # at zero detuning one exponent equals -iJ, the removable 0/0 case
        p = SystemParams(lambda2=0.0, j_ising=1.5, delta=0.0)
        y0 = preset("linear").as_array()
        for tau in (1e-9, 0.3, 17.0):
            got = analytic.evolve_block(p, BlockAmplitudes.from_array(4, y0), tau).as_array()
            assert np.max(np.abs(got - expm_block(4, 0.0, 1.5, 0.0, y0, tau))) < 1e-11


class TestEvolve:
    def test_grid_zero(self):
        psi = init_wavefunction(preset("w_like"), FieldSpec(nbar=10.0))
        out = analytic.evolve(SystemParams(lambda2=1, j_ising=1, delta=1), psi, [0.0])
        assert np.max(np.abs(out[0].amps - psi.amps)) < 1e-12

    @pytest.mark.parametrize("grid", [[1.0, 0.5], [-1.0, 0.0], [0.0, 0.0], [[0.0, 1.0]]])
    def test_grid_validation(self, grid):
        psi = init_wavefunction(preset("ee"), FieldSpec(nbar=1.0))
        with pytest.raises(ValueError):
            analytic.evolve(SystemParams(), psi, grid)

    def test_bell_a_norm(self):
        psi = init_wavefunction(preset("bell_a"), FieldSpec(nbar=100.0))
        amps = analytic.evolve_amplitudes(SystemParams(), psi, np.linspace(0, 50, 501))
        assert np.max(np.abs(np.sum(np.abs(amps) ** 2, axis=(1, 2)) - 1)) < 1e-10

    def test_edge_blocks(self):
        # vacuum bell_c: block -2 only picks up the Ising phase
        J = 0.8
        psi = init_wavefunction(preset("bell_c"), FieldSpec(nbar=0.0))
        grid = np.linspace(0, 10, 11)
        amps = analytic.evolve_amplitudes(SystemParams(j_ising=J, lambda2=1.0, delta=0.5),
                                          psi, grid)
        d0 = psi.block(-2).D
        assert np.max(np.abs(amps[:, 0, 3] - d0 * np.exp(-1j * J * grid))) < 1e-9
        assert np.max(np.abs(np.abs(amps[:, 0, 3]) - abs(d0))) < 1e-10

    def test_plan_routes_edge_blocks_to_integrator(self):
        psi = init_wavefunction(preset("linear"), FieldSpec(nbar=2.0))
        bp = analytic.plan(SystemParams(lambda2=1.0), psi)
        assert bp.numeric.tolist() == [0, 1]
        assert bp.closed.tolist() == list(range(2, psi.amps.shape[0]))

    def test_norm_guard_falls_back(self, backend):
        # corrupt the closed-form weights; the norm guard must hand those blocks to the
        # integrator and still return the correct state
        p = SystemParams(lambda2=2.0, j_ising=-2.0, delta=-2.0)
        psi = init_wavefunction(preset("w_like"), FieldSpec(nbar=4.0))
        bp = analytic.plan(p, psi)
        bad = analytic.BlockPlan(bp.params, bp.init, bp.closed, bp.m, bp.delta * 1.05,
                                 bp.alpha, bp.beta)
        grid = np.linspace(0, 5, 21)
        got = analytic.evaluate(bad, grid, backend=backend)
        ref = analytic.evaluate(bp, grid, backend=backend)
        assert np.max(np.abs(got - ref)) < 1e-8

    def test_guard_raises_when_integrator_drifts(self):
        from esdkit.oracle import IntegratorConfig
        p = SystemParams(lambda2=2.0)
        psi = init_wavefunction(preset("bell_c"), FieldSpec(nbar=1.0))
        bp = analytic.plan(p, psi)
        loose = IntegratorConfig(rel_tol=1e-2, abs_tol=1e-2, max_step=1.0)
        with pytest.raises(TruncationInsufficient):
            analytic.evaluate(bp, np.linspace(0, 200, 3), cfg=loose)

    @pytest.mark.slow
    def test_linear_long_run_matches_oracle(self):
        p = SystemParams(lambda2=2.0, j_ising=-2.0, delta=-2.0, nbar=100.0)
        psi = init_wavefunction(preset("linear"), FieldSpec(nbar=100.0))
        grid = np.linspace(0, 200, 401)
        # every 12th block plus the bulk of the Poisson weight
        sel = sorted(set(range(0, psi.n_max + 1, 12)) | set(range(90, 111, 5)))
        rep = cross_validate(p, psi, grid, blocks=sel)
        assert rep.max_deviation < 1e-7
