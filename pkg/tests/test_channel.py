import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from unruhlab import channel as ch
from unruhlab import gaussian as g
from unruhlab import modes as md
from unruhlab.errors import (
    ExpensivePathDisabled,
    MassRequired,
    UnsupportedGeometry,
    ValidationError,
)
from unruhlab.quad import overlap_scalar

warnings.filterwarnings("ignore", category=UserWarning)

CFG = ch.ChannelConfig()  # caption parameters: A=0.1, L=2, Omega0=5, m=0.1


@pytest.fixture(scope="module")
def caption_noise():
    return ch.build_N_scalar1d(CFG)


@pytest.fixture(scope="module")
def caption_matrices():
    return ch.channel_matrices(CFG)


class TestConfigValidation:
    def test_massless_1d_rejected(self):
        with pytest.raises(MassRequired):
            ch.ChannelConfig(m=0.0)

    def test_overlapping_wedges_guard(self):
        with pytest.raises(ValidationError):
            ch.ChannelConfig(D=-15.0)

    def test_dirac_needs_d_zero(self):
        with pytest.raises(UnsupportedGeometry):
            ch.ChannelConfig(field_type="dirac1d", D=1.0)

    def test_gauge_default(self):
        assert CFG.gauge == CFG.A_I


class TestBuildM:
    def test_identical_modes_give_identity(self):
        # alpha = (phi, phi) = 1 and beta = -(phi, phi*) = 0 exactly
        phi = md.wavepacket_inertial("I", A=0.1, L=2.0, Omega0=5.0, m=0.1)
        alpha = overlap_scalar(phi, phi)
        conj = phi.with_fields(profile=np.conj(phi.profile),
                               time_derivative=np.conj(phi.time_derivative))
        beta = -overlap_scalar(phi, conj)
        assert alpha == pytest.approx(1.0, abs=1e-9)
        assert abs(beta) < 1e-12

    def test_mismatch_below_unity(self, caption_matrices):
        assert abs(caption_matrices.alpha_I) < 1.0
        assert abs(caption_matrices.alpha_I) > 0.9

    def test_m_is_d_independent(self, caption_matrices):
        m_shift = ch.channel_matrices(replace(CFG, D=5.0))
        assert np.max(np.abs(m_shift.M - caption_matrices.M)) < 1e-12

    def test_block_structure(self, caption_matrices):
        M = caption_matrices.M
        assert np.allclose(M[:2, 2:], 0.0)
        assert np.allclose(M[2:, :2], 0.0)


class TestNoiseD0:
    # regression anchors from an independent adaptive-quadrature oracle
    # (direct chi integrals of the raw packet + Simpson over u)
    ORACLE_N_I = 6.39e-13
    ORACLE_N12 = 1.967e-12

    def test_values_against_oracle(self, caption_noise):
        assert caption_noise.N_I == pytest.approx(self.ORACLE_N_I, rel=5e-3)
        assert caption_noise.N12_plus.real == pytest.approx(self.ORACLE_N12,
                                                            rel=5e-3)

    def test_symmetric_setup(self, caption_noise):
        assert caption_noise.N_I == pytest.approx(caption_noise.N_II,
                                                  rel=1e-12)
        assert caption_noise.N12_plus == pytest.approx(
            caption_noise.N12_minus, rel=1e-12)

    def test_quadratures_converged(self, caption_noise):
        assert all(v for k, v in caption_noise.diagnostics.items()
                   if k.endswith("_converged"))

    def test_bose_vs_fermi_factor(self):
        # thermal weight ratio at Omega/a = 1/2
        bose = 1.0 / math.expm1(math.pi)
        fermi = 1.0 / (math.exp(math.pi) + 1.0)
        assert bose / fermi == pytest.approx(1.0903, abs=2e-4)


class TestApplyChannel:
    def test_vacuum_reproduces_sigma_vac(self, caption_matrices):
        out = ch.apply_channel(g.vacuum(2), caption_matrices)
        assert np.allclose(out.cov, caption_matrices.sigma_vac, atol=1e-15)

    def test_trivial_channel_is_identity(self):
        noise = ch.NoiseTerms(0.0, 0.0, 0.0, 0.0)
        mats = ch.ChannelMatrices(np.eye(4), np.zeros((4, 4)),
                                  ch.assemble_sigma_vac(noise),
                                  1.0, 0.0, 1.0, 0.0, noise)
        out = ch.apply_channel(g.vacuum(2), mats)
        assert np.allclose(out.cov, np.eye(4))

    def test_coherent_state_same_cov(self, caption_matrices):
        coh = g.GaussianState(2, np.array([1.0, -0.5, 0.3, 2.0]), np.eye(4))
        out = ch.apply_channel(coh, caption_matrices)
        vac_out = ch.apply_channel(g.vacuum(2), caption_matrices)
        assert np.allclose(out.cov, vac_out.cov)
        assert np.allclose(out.first_moments,
                           caption_matrices.M @ coh.first_moments)

    def test_output_physical(self, caption_matrices):
        out = ch.apply_channel(g.vacuum(2), caption_matrices)
        assert g.physicality_defect(out.cov) > -1e-10


class TestVacuumNegativity:
    def test_caption_magnitude(self):
        res, _ = ch.vacuum_negativity(CFG)
        assert 1e-12 < res.value < 1e-10

    def test_increasing_in_acceleration(self):
        e_lo, _ = ch.vacuum_negativity(replace(CFG, A_I=0.08, A_II=0.08))
        e_hi, _ = ch.vacuum_negativity(replace(CFG, A_I=0.12, A_II=0.12))
        assert 0 < e_lo.value < e_hi.value


class TestSweep:
    def test_rows_and_error_capture(self):
        rows = ch.negativity_sweep(CFG, "A", [0.09, -1.0])
        assert rows[0]["error"] == ""
        assert rows[0]["E_N"] >= 0
        assert rows[1]["error"] != ""
        assert math.isnan(rows[1]["E_N"])

    def test_fixed_separation_axis(self):
        cfg = ch._apply_axis(CFG, "A_fixed_sep:20", 0.11)
        assert cfg.A_I == 0.11
        assert cfg.D == pytest.approx(20 - 2 / 0.11)


class TestAInvariance:
    def test_scalar_1d_gauge_doubling(self):
        dev = ch.a_invariance_check(CFG, CFG.A_I, 2 * CFG.A_I)
        assert dev < 1e-6


class TestDirac:
    @pytest.fixture(scope="class")
    def terms(self):
        return ch.build_N_dirac1d(ch.ChannelConfig(field_type="dirac1d"))

    def test_noise_positive_and_symmetric(self, terms):
        assert terms["N_I+"] > 0
        assert terms["N_I+"] == pytest.approx(terms["N_II-"], rel=1e-10)
        assert terms["N_I-"] == pytest.approx(terms["N_II+"], rel=1e-10)

    def test_bound_nonnegative(self, terms):
        val = ch.dirac_negativity_bound(ch.ChannelConfig(
            field_type="dirac1d"))
        assert val >= 0.0

    def test_covariance_antisymmetric(self):
        state, _ = ch.dirac_vacuum_covariance(
            ch.ChannelConfig(field_type="dirac1d"))
        assert np.max(np.abs(state.cov + state.cov.T)) < 1e-14

    def test_fermionic_below_bosonic(self, terms):
        res, _ = ch.vacuum_negativity(CFG)
        ferm = ch.dirac_negativity_bound(ch.ChannelConfig(
            field_type="dirac1d"))
        assert 0 < ferm < res.value


class TestScalar3D:
    def test_d_nonzero_gated(self):
        cfg = ch.ChannelConfig(field_type="scalar3d", Omega0=5.5,
                               kappa_perp=2.0, L_perp=2.0, D=1.0)
        with pytest.raises(ExpensivePathDisabled):
            ch.build_N_scalar3d(cfg)

    def test_polar_factor_nonnegative(self):
        cfg = ch.ChannelConfig(field_type="scalar3d", Omega0=5.5,
                               kappa_perp=2.0, L_perp=2.0)
        P = ch._polar_factor(cfg)
        ks = np.linspace(1e-4, 6.0, 200)
        vals = P(ks)
        assert np.all(vals >= -1e-18)
        assert vals[0] < 1e-6 * np.max(vals)  # vanishes at k -> 0

    def test_polar_factor_against_numeric_angle_integral(self):
        cfg = ch.ChannelConfig(field_type="scalar3d", Omega0=5.5,
                               kappa_perp=2.0, L_perp=2.0)
        P = ch._polar_factor(cfg)
        alpha = 2.0 / cfg.L_perp ** 2
        norm1 = 0.5 * math.sqrt(math.pi / (2 * alpha)) * \
            -math.expm1(-cfg.kappa_perp ** 2 / (2 * alpha))

        def t_abs2(q):
            return (math.pi / (4 * alpha)) * (
                math.exp(-(q - cfg.kappa_perp) ** 2 / (4 * alpha))
                - math.exp(-(q + cfg.kappa_perp) ** 2 / (4 * alpha))) ** 2

        for k in (0.5, 2.0, 3.5):
            phis = np.linspace(0, 2 * math.pi, 4001)
            vals = [t_abs2(k * math.cos(p)) * t_abs2(k * math.sin(p))
                    for p in phis]
            ref = np.trapezoid(vals, phis) / norm1 ** 2
            assert float(P(k)) == pytest.approx(ref, rel=1e-8)
