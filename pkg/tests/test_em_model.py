import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import j0

from microstrip_sls.design import SPEED_OF_LIGHT
from microstrip_sls.em_model import (
    VSWR_CLAMP,
    RadiationPattern,
    directivity,
    edge_impedance,
    far_field,
    fspl,
    half_power_beamwidth,
    input_impedance,
    link_budget,
    radiated_power,
    reflection_coefficient,
    saturated,
    slot_admittance,
    slot_conductances,
    sweep,
    vswr,
)
from microstrip_sls.errors import DomainError, ModelRangeError, SingularityError


def midpoint_conductances(w_mm, l_mm, f_ghz, n=100_000):
    """Brute-force midpoint rule for the slot conductance integrals."""
    k0 = 2 * math.pi * f_ghz * 1e9 / SPEED_OF_LIGHT
    theta = (np.arange(n) + 0.5) * math.pi / n
    integrand = np.sin(k0 * w_mm * 1e-3 / 2 * np.cos(theta)) ** 2 / np.cos(theta) ** 2 * np.sin(theta) ** 3
    step = math.pi / n
    g1 = integrand.sum() * step / (120 * math.pi**2)
    g12 = (integrand * j0(k0 * l_mm * 1e-3 * np.sin(theta))).sum() * step / (120 * math.pi**2)
    return g1, g12


class TestSlotAdmittance:
    @pytest.mark.parametrize("f", [1.0, 2.45, 13.2, 24.0, 30.0])
    def test_quadrature_matches_brute_force(self, resonant_patch, f):
        g1, g12 = slot_conductances(resonant_patch, f)
        b1, b12 = midpoint_conductances(resonant_patch.W, resonant_patch.L, f)
        assert g1[0] == pytest.approx(b1, rel=1e-3)
        assert abs(g12[0] - b12) <= 1e-3 * abs(b1)

    def test_grows_with_width(self, resonant_patch):
        lam = SPEED_OF_LIGHT / 2.45e9 * 1e3
        half = replace(resonant_patch, W=lam / 2)
        quarter = replace(resonant_patch, W=lam / 4)
        assert slot_admittance(half, 2.45).real > slot_admittance(quarter, 2.45).real > 0

    def test_vanishing_aperture(self, resonant_patch):
        tiny = replace(resonant_patch, W=1e-6)
        assert slot_admittance(tiny, 2.45).real == pytest.approx(0, abs=1e-15)

    def test_susceptance_positive(self, resonant_patch):
        assert slot_admittance(resonant_patch, 2.45).imag > 0

    @pytest.mark.parametrize("f", [0.5, 30.5, math.inf])
    def test_model_range(self, resonant_patch, f):
        with pytest.raises(ModelRangeError):
            slot_admittance(resonant_patch, f)


class TestInputImpedance:
    def test_edge_feed(self, resonant_patch):
        edge = replace(resonant_patch, Fi=1e-12)
        assert input_impedance(edge, 2.45).real == pytest.approx(edge_impedance(edge, 2.45)[0].real, rel=1e-9)

    def test_centre_feed(self, resonant_patch):
        centre = replace(resonant_patch, Fi=resonant_patch.L / 2 * (1 - 1e-9))
        assert abs(input_impedance(centre, 2.45)) < 1e-9

    def test_reactance_crosses_zero_at_resonance(self, resonant_patch):
        below = input_impedance(resonant_patch, 2.45 * 0.999)
        above = input_impedance(resonant_patch, 2.45 * 1.001)
        assert below.imag > 0 > above.imag
        freqs = np.linspace(2.2, 2.7, 2001)
        f_min = freqs[np.argmin(np.abs(input_impedance(resonant_patch, freqs).imag))]
        assert abs(f_min - 2.45) / 2.45 < 0.05

    def test_mutual_coupling_lowers_edge_resistance(self, resonant_patch):
        with_m = edge_impedance(resonant_patch, 2.45, mutual=True)[0].real
        without = edge_impedance(resonant_patch, 2.45, mutual=False)[0].real
        assert without - with_m > 10

    def test_loss_tangent_lowers_resonant_resistance(self, resonant_patch):
        lossy = replace(resonant_patch, substrate=replace(resonant_patch.substrate, loss_tangent=0.02))
        assert input_impedance(lossy, 2.45).real < input_impedance(resonant_patch, 2.45).real

    def test_scalar_vs_array(self, resonant_patch):
        assert isinstance(input_impedance(resonant_patch, 2.45), complex)
        assert input_impedance(resonant_patch, [2.45, 3.0]).shape == (2,)


class TestReflection:
    @pytest.mark.parametrize(
        "z, expected", [(50, 0), (0, -1), (100, 1 / 3), (complex(50, 50), complex(0.2, 0.4))]
    )
    def test_examples(self, z, expected):
        assert reflection_coefficient(z, 50) == pytest.approx(expected, abs=1e-15)

    def test_singularity(self):
        with pytest.raises(SingularityError):
            reflection_coefficient(-50, 50)

    def test_bad_reference(self):
        with pytest.raises(DomainError):
            reflection_coefficient(50, 0)

    @given(st.floats(0, 1e6), st.floats(-1e6, 1e6), st.floats(1, 500))
    def test_passive_loads_stay_in_unit_disk(self, r, x, z0):
        assert abs(reflection_coefficient(complex(r, x), z0)) <= 1 + 1e-12


class TestVswr:
    def test_examples(self):
        assert vswr(0.0) == 1.0
        assert vswr(1 / 3) == pytest.approx(2.0, rel=1e-15)

    def test_saturation(self):
        assert vswr(1.0) == VSWR_CLAMP and saturated(1.0)
        assert not saturated(0.5)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            vswr(-0.1)

    @given(st.floats(0, 1))
    def test_at_least_one(self, g):
        assert 1 <= vswr(g) <= VSWR_CLAMP


class TestSweep:
    def test_grid_contract(self, resonant_patch):
        res = sweep(resonant_patch, 2.4, 24, 500)
        assert len(res.frequencies) == len(res.z_in) == len(res.s11_db) == len(res.vswr) == 500
        assert np.all(np.diff(res.frequencies) > 0)
        assert np.allclose(np.diff(res.frequencies), (24 - 2.4) / 499, rtol=1e-9)

    def test_invariants(self, paper_patch, resonant_patch):
        for g in (paper_patch, resonant_patch):
            res = sweep(g)
            assert np.all(res.vswr >= 1)
            assert np.all(res.s11_db <= 0)
            mag = np.abs(res.gamma)
            np.testing.assert_array_equal(res.s11_db, 20 * np.log10(mag))
            np.testing.assert_array_equal(res.vswr, vswr(mag))

    def test_resonant_design_minimum(self, resonant_patch):
        f_min, s_min, _ = sweep(resonant_patch, 2.4, 24, 500).minimum()
        assert abs(f_min - 2.45) / 2.45 < 0.05
        assert s_min < -3

    def test_extrapolation_flag(self, resonant_patch):
        res = sweep(resonant_patch)
        assert not res.extrapolated[0] and res.extrapolated[-1]

    def test_bad_band(self, resonant_patch):
        with pytest.raises(DomainError):
            sweep(resonant_patch, 3, 2, 10)
        with pytest.raises(DomainError):
            sweep(resonant_patch, 2, 3, 1)
        with pytest.raises(ModelRangeError):
            sweep(resonant_patch, 0.5, 24, 10)

    def test_pointwise_evaluation_is_order_independent(self, resonant_patch):
        freqs = np.linspace(2.4, 24, 64)
        together = input_impedance(resonant_patch, freqs)
        with ThreadPoolExecutor(4) as pool:
            apart = list(pool.map(lambda f: input_impedance(resonant_patch, f), freqs[::-1]))
        np.testing.assert_array_equal(together, np.array(apart[::-1]))


class TestFarField:
    def test_broadside_peak(self, resonant_patch):
        pat = far_field(resonant_patch, 2.45, 46, 72)
        assert pat.intensity.max() == 1.0
        assert np.all(pat.intensity[0] == 1.0)
        assert np.all(pat.intensity >= 0)
        assert pat.theta_grid[0] == 0 and pat.theta_grid[-1] == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("f", [2.45, 13.2])
    def test_phi_mirror_symmetry(self, resonant_patch, f):
        pat = far_field(resonant_patch, f, 31, 64)
        mirror = pat.intensity[:, (-np.arange(64)) % 64]
        np.testing.assert_allclose(pat.intensity, mirror, rtol=0, atol=1e-12)

    def test_grid_guard(self, resonant_patch):
        with pytest.raises(DomainError):
            far_field(resonant_patch, 2.45, 7, 64)

    def test_h_plane_beamwidth(self, resonant_patch):
        assert 60 <= half_power_beamwidth(resonant_patch, 2.45, "H") <= 110

    def test_e_plane_stays_above_half_power(self, resonant_patch):
        # the two-slot array factor at this spacing never drops 3 dB above the ground plane
        assert half_power_beamwidth(resonant_patch, 2.45, "E") == 180.0

    def test_e_plane_beamwidth_for_wide_spacing(self, paper_patch):
        assert half_power_beamwidth(paper_patch, 2.45, "E") < half_power_beamwidth(paper_patch, 2.45, "H")


class TestDirectivity:
    def test_uniform_hemisphere(self):
        theta = np.linspace(0, math.pi / 2, 19)
        phi = np.arange(24) * 2 * math.pi / 24
        pat = RadiationPattern(theta, phi, np.ones((19, 24)), 2.45)
        assert directivity(pat) == pytest.approx(10 * math.log10(2), abs=1e-9)

    def test_patch_range(self, resonant_patch):
        assert 5 <= directivity(far_field(resonant_patch, 2.45)) <= 10

    def test_grid_convergence(self, resonant_patch):
        coarse = directivity(far_field(resonant_patch, 2.45, 46, 72))
        fine = directivity(far_field(resonant_patch, 2.45, 91, 144))
        assert abs(10 ** (coarse / 10) / 10 ** (fine / 10) - 1) < 0.01
        p1 = radiated_power(far_field(resonant_patch, 2.45, 46, 72))
        p2 = radiated_power(far_field(resonant_patch, 2.45, 91, 144))
        assert p1 > 0 and abs(p1 / p2 - 1) < 0.01

    def test_degenerate(self):
        theta = np.linspace(0, math.pi / 2, 9)
        pat = RadiationPattern(theta, np.arange(8) * math.pi / 4, np.zeros((9, 8)), 2.45)
        with pytest.raises(DomainError):
            directivity(pat)


class TestLinkBudget:
    def test_fspl_example(self):
        assert fspl(1, 2.45) == pytest.approx(40.22, abs=0.01)

    def test_fspl_doubling(self):
        assert fspl(2, 2.45) - fspl(1, 2.45) == pytest.approx(6.02, abs=0.01)
        assert fspl(1, 4.9) - fspl(1, 2.45) == pytest.approx(6.02, abs=0.01)

    @given(st.floats(0.01, 1e6), st.floats(0.1, 100), st.floats(1.001, 10))
    def test_fspl_increasing(self, d, f, k):
        assert fspl(d * k, f) > fspl(d, f)
        assert fspl(d, f * k) > fspl(d, f)

    def test_fspl_domain(self):
        with pytest.raises(DomainError):
            fspl(0, 2.45)

    def test_budget_example(self):
        lb = link_budget(0, 0, 0, 1, 2.45, -100)
        assert lb.p_rx == pytest.approx(-40.22, abs=0.01)
        assert lb.feasible and lb.p_rx == lb.p_tx + lb.g_tx + lb.g_rx - fspl(1, 2.45)

    def test_infeasible_above_threshold(self):
        assert not link_budget(0, 0, 0, 1, 2.45, -40.0).feasible

    @given(st.floats(-20, 20), st.floats(-20, 20))
    def test_gain_additivity(self, gt, gr):
        base = link_budget(10, 0, 0, 100, 2.45, -90)
        moved = link_budget(10, gt, gr, 100, 2.45, -90)
        assert moved.p_rx - base.p_rx == pytest.approx(gt + gr, abs=1e-9)
