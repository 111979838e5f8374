"""Tests for the closed-form layer profiles, matching diagnostics and rates.

Finite-difference oracles run in high precision (mpmath) so the second
derivative of a formula can be checked without float cancellation noise.
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
import scipy.integrate

from degench.asymptotics import (
    MOBILITY_SLOPE_AT_MINUS_ONE,
    decay_rate_one_sided_bulk,
    decay_rate_surface_diffusion,
    decay_rate_two_sided_bulk,
    degeneracy_layer_profiles,
    dilog,
    free_boundary_correction1,
    free_boundary_correction2,
    interface_correction1,
    interface_correction2,
    interface_correction2_hp,
    interface_profile_leading,
    make_bundle,
    matched_exponential_coefficient,
    matching_mismatch,
    sharp_interface_coefficients,
)
from degench.mobility import MobilityKind


class TestBundle:
    def test_exact_first_order_potential(self):
        for kappa in (0.5, 2.0, 3.7):
            b = make_bundle(0.05, kappa)
            assert b.eta1 == 2.0 * kappa / 3.0

    def test_exact_second_order_and_offset(self):
        for kappa in (0.5, 2.0, 3.7):
            b = make_bundle(0.05, kappa)
            assert b.eta2 == kappa**2 / 36.0
            assert b.sigma1 == 3.0 * kappa / 16.0
            assert b.u1_outer == kappa / 6.0
            assert b.u2_outer == 7.0 * kappa**2 / 144.0

    def test_sigma0_value(self):
        b = make_bundle(0.05, 2.0)
        assert b.sigma0 == pytest.approx(0.5 * math.log(240.0), abs=1e-15)
        # composite offset for the reference case
        assert b.sigma == pytest.approx(2.7590694616709954, abs=1e-12)

    def test_eta_composite_reference_case(self):
        b = make_bundle(0.05, 2.0)
        assert b.eta == pytest.approx(0.06694444444444445, abs=1e-15)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            make_bundle(0.05, 0.0)
        with pytest.raises(ValueError):
            make_bundle(-0.05, 2.0)


class TestLeadingProfile:
    def test_interface_condition(self):
        assert interface_profile_leading(0.0) == 0.0

    def test_far_field(self):
        assert interface_profile_leading(40.0) == pytest.approx(-1.0, abs=1e-15)
        assert interface_profile_leading(-40.0) == pytest.approx(1.0, abs=1e-15)

    def test_unit_value(self):
        assert interface_profile_leading(1.0) == pytest.approx(-0.7615941559557649, abs=1e-15)


class TestFirstCorrection:
    def test_zero_at_interface(self):
        for kappa in (0.5, 2.0):
            assert interface_correction1(0.0, kappa) == 0.0

    def test_outer_limit(self):
        # plateau kappa/6 on both sides
        assert interface_correction1(30.0, 2.0) == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert interface_correction1(-30.0, 2.0) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_flat_interface_has_no_correction(self):
        rho = np.linspace(-5, 5, 11)
        assert np.all(interface_correction1(rho, 0.0) == 0.0)

    def test_tail_expansion_partial_sums(self):
        # at rho -> -inf the correction approaches kappa/6 through the
        # exponential series kappa/6 * (1 - 4w + 8w^2 - 12w^3), w = e^{2 rho}
        kappa, rho = 2.0, -3.0
        w = math.exp(2 * rho)
        val = interface_correction1(rho, kappa)
        sums = [kappa / 6 * (1 - 4 * w),
                kappa / 6 * (1 - 4 * w + 8 * w**2),
                kappa / 6 * (1 - 4 * w + 8 * w**2 - 12 * w**3)]
        errs = [abs(val - s) for s in sums]
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 1e-7

    def test_defining_ode_residual(self):
        # U1'' - 2(3 U0^2 - 1) U1 = -eta1 - kappa * U0'
        kappa = 2.0
        h = mp.mpf("1e-6")
        with mp.workdps(40):
            u1 = lambda r: mp.mpf(kappa) / 6 * mp.tanh(r) ** 2
            for rho in (-2.0, -0.7, 0.4, 1.3, 2.6):
                r = mp.mpf(rho)
                d2 = (u1(r + h) - 2 * u1(r) + u1(r - h)) / h**2
                lhs = d2 - 2 * (3 * mp.tanh(r) ** 2 - 1) * u1(r)
                rhs = -mp.mpf(2) * kappa / 3 + kappa / mp.cosh(r) ** 2
                assert abs(float(lhs - rhs)) < 1e-10

    def test_growing_term_coefficient_vanishes(self):
        for kappa in (0.5, 2.0, 11.0):
            assert matched_exponential_coefficient(kappa) == 0.0


class TestSecondCorrection:
    def test_zero_at_interface(self):
        for kappa in (0.5, 2.0, 4.0):
            assert abs(interface_correction2(0.0, kappa)) < 1e-15

    def test_outer_limit(self):
        # 7 kappa^2 / 144 at rho -> +inf
        assert interface_correction2(12.0, 2.0) == pytest.approx(7 * 4.0 / 144.0, rel=1e-6)
        assert interface_correction2(20.0, 2.0) == pytest.approx(7 * 4.0 / 144.0, rel=1e-11)

    def test_inner_tail(self):
        # toward the free boundary: -(kappa^2/288) e^{-2 rho} - kappa^2/18
        kappa, rho = 2.0, -12.0
        pred = -(kappa**2 / 288.0) * math.exp(-2 * rho) - kappa**2 / 18.0
        assert interface_correction2(rho, kappa) == pytest.approx(pred, rel=1e-12)

    def test_defining_ode_residual_20_points(self):
        # U2'' - 2(3 U0^2 - 1) U2 = -eta2 - kappa^2/6 tanh^5
        #                           - rho kappa^2 sech^2 - kappa^2/3 tanh sech^2
        kappa = 2.0
        h = mp.mpf("1e-7")
        pts = np.linspace(-2.5, 2.5, 20)
        with mp.workdps(50):
            k = mp.mpf(kappa)
            for rho in pts:
                r = mp.mpf(float(rho))
                u2 = lambda rr: mp.mpf(interface_correction2_hp(float(rr), kappa, dps=60))
                # evaluate the hp formula natively for the stencil
                from degench.asymptotics import _mp_ns, _u2_expression
                f = lambda rr: _u2_expression(rr, k, _mp_ns())
                d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
                lhs = d2 - 2 * (3 * mp.tanh(r) ** 2 - 1) * f(r)
                rhs = (-k**2 / 36 - k**2 / 6 * mp.tanh(r) ** 5
                       - r * k**2 / mp.cosh(r) ** 2
                       - k**2 / 3 * mp.tanh(r) / mp.cosh(r) ** 2)
                assert abs(float(lhs - rhs)) < 1e-7

    def test_float_matches_high_precision(self):
        kappa = 2.0
        for rho in (-5.5, -3.0, -1.0, 0.7, 2.2, 4.8):
            f = interface_correction2(np.array([rho]), kappa)[0]
            h = interface_correction2_hp(rho, kappa)
            assert abs(f - h) < 1e-10 * max(1.0, abs(h))

    def test_crossover_continuity(self):
        # direct float branch and high-precision branch agree at the switch
        kappa = 4.0
        for rho in (5.99, 6.0, 6.01, -5.99, -6.0, -6.01):
            f = interface_correction2(np.array([rho]), kappa)[0]
            h = interface_correction2_hp(rho, kappa)
            assert abs(f - h) < 1e-9


class TestFreeBoundaryCorrections:
    def test_first_conditions_at_origin(self):
        kappa = 2.0
        assert free_boundary_correction1(0.0, kappa) == 0.0
        h = 1e-7
        slope = (free_boundary_correction1(h, kappa)
                 - free_boundary_correction1(-h, kappa)) / (2 * h)
        assert abs(slope) < 1e-9

    def test_first_value(self):
        # (eta1/4)(1 - cosh 2) at kappa=2, high-precision evaluation
        assert free_boundary_correction1(1.0, 2.0) == pytest.approx(
            -0.9207318970278771, abs=1e-13)

    def test_first_ode_residual(self):
        # Ub1'' - 4 Ub1 + eta1 = 0
        kappa = 2.0
        h = mp.mpf("1e-7")
        with mp.workdps(40):
            f = lambda z: mp.mpf(kappa) / 6 * (1 - mp.cosh(2 * z))
            for z in (0.5, 1.0, 2.0):
                zz = mp.mpf(z)
                d2 = (f(zz + h) - 2 * f(zz) + f(zz - h)) / h**2
                res = d2 - 4 * f(zz) + mp.mpf(2) * kappa / 3
                assert abs(float(res)) < 1e-10

    def test_second_conditions_at_origin(self):
        kappa = 2.0
        assert abs(free_boundary_correction2(0.0, kappa)) < 1e-15
        h = 1e-7
        slope = (free_boundary_correction2(h, kappa)
                 - free_boundary_correction2(-h, kappa)) / (2 * h)
        assert abs(slope) < 1e-8

    def test_second_ode_residual(self):
        # Ub2'' - 4 Ub2 + kappa Ub1' - 6 Ub1^2 + eta2 = 0
        kappa = 2.0
        h = mp.mpf("1e-7")
        with mp.workdps(50):
            k = mp.mpf(kappa)
            c = (k / 12) ** 2
            ub1 = lambda z: k / 6 * (1 - mp.cosh(2 * z))
            ub2 = lambda z: (c * (mp.cosh(4 * z) + 3 * mp.exp(-2 * z) * (1 + 4 * z) - 9)
                             + c * mp.exp(2 * z) + (k / 6) ** 2 * mp.exp(-2 * z)
                             + c * (1 - mp.cosh(2 * z)))
            for z in (0.5, 1.0, 1.5):
                zz = mp.mpf(z)
                d2 = (ub2(zz + h) - 2 * ub2(zz) + ub2(zz - h)) / h**2
                db1 = (ub1(zz + h) - ub1(zz - h)) / (2 * h)
                res = d2 - 4 * ub2(zz) + k * db1 - 6 * ub1(zz) ** 2 + k**2 / 36
                assert abs(float(res)) < 1e-8

    def test_second_growth_coefficient(self):
        # leading growth (kappa/12)^2 e^{4z} / 2
        for kappa in (0.5, 2.0):
            z = 8.0
            lead = 0.5 * (kappa / 12.0) ** 2 * math.exp(4 * z)
            assert free_boundary_correction2(z, kappa) / lead == pytest.approx(1.0, rel=1e-5)


class TestDegeneracyLayer:
    def test_far_field_constant(self):
        u1, eta2 = degeneracy_layer_profiles(-30.0, 2.0, 0.7)
        assert eta2 == pytest.approx(4.0 / 36.0, rel=1e-12)

    def test_zero_flux_constant_potential(self):
        y = np.linspace(-5, 5, 11)
        _, eta2 = degeneracy_layer_profiles(y, 2.0, 0.0)
        assert np.all(eta2 == 4.0 / 36.0)

    def test_order_parameter_profile(self):
        u1, _ = degeneracy_layer_profiles(0.0, 2.0, 0.0)
        assert u1 == pytest.approx(2.0 + 2.0 / 6.0, abs=1e-15)

    def test_tail_exponential_coefficient(self):
        # eta2 - kappa^2/36 ~ (flux/16) e^{2y} as y -> -inf, via ln(1+x) ~ x
        kappa, flux, y = 2.0, 0.7, -8.0
        _, eta2 = degeneracy_layer_profiles(y, kappa, flux)
        coef = (eta2 - kappa**2 / 36.0) / math.exp(2 * y)
        assert coef == pytest.approx(flux / 16.0, rel=1e-6)

    def test_flux_balance_ode(self):
        # M'(-1) * u1 * d(eta2)/dy = flux / 2
        kappa, flux = 2.0, 0.7
        h = 1e-6
        for y in (-2.0, 0.0, 1.5):
            u1, _ = degeneracy_layer_profiles(y, kappa, flux)
            _, ep = degeneracy_layer_profiles(y + h, kappa, flux)
            _, em = degeneracy_layer_profiles(y - h, kappa, flux)
            lhs = MOBILITY_SLOPE_AT_MINUS_ONE * u1 * (ep - em) / (2 * h)
            assert lhs == pytest.approx(flux / 2.0, rel=1e-8)

    def test_overflow_safe(self):
        _, eta2 = degeneracy_layer_profiles(400.0, 2.0, 0.7)
        assert np.isfinite(eta2)


class TestDilog:
    def test_zero(self):
        assert dilog(0.0) == 0.0

    def test_minus_one(self):
        # alternating series sum (-1)^k / k^2 = -pi^2/12
        target = sum((-1.0) ** k / k**2 for k in range(1, 400000))
        assert dilog(-1.0) == pytest.approx(target, abs=1e-10)
        assert dilog(-1.0) == pytest.approx(-math.pi**2 / 12.0, abs=1e-14)

    def test_large_argument_against_quadrature(self):
        x = -math.exp(4.0)
        val, err = scipy.integrate.quad(lambda t: math.log(1.0 - t) / t, 0.0, x, limit=300)
        assert dilog(x) == pytest.approx(-val, abs=1e-10)

    def test_against_mpmath_grid(self):
        rng = np.random.default_rng(1)
        xs = -np.exp(rng.uniform(-8, 8, 20))
        for x in xs:
            ref = float(mp.polylog(2, mp.mpf(float(x))))
            assert dilog(float(x)) == pytest.approx(ref, rel=1e-12)

    def test_positive_rejected(self):
        with pytest.raises(ValueError):
            dilog(0.5)


class TestDecayRates:
    def test_pure_rate_exact(self):
        assert decay_rate_surface_diffusion(2, 0.5, Fraction(2, 3)) == -128.0

    def test_pure_rate_translation_mode(self):
        assert decay_rate_surface_diffusion(1, 0.5, Fraction(2, 3)) == 0.0

    def test_pure_rate_biquadratic_factor(self):
        assert decay_rate_surface_diffusion(2, 0.5, Fraction(4, 9)) == pytest.approx(
            -85.33333333333333, abs=1e-10)

    def test_one_sided_value(self):
        # -128 - (32/3) * tanh(ln 4) with tanh(ln 4) = 15/17 -> -2336/17
        assert decay_rate_one_sided_bulk(2, 0.5) == pytest.approx(-2336.0 / 17.0, rel=1e-12)

    def test_one_sided_translation_mode(self):
        assert decay_rate_one_sided_bulk(1, 0.5) == 0.0

    def test_two_sided_value(self):
        # -128 - (32/3)(15/17 + 1) = -7552/51
        assert decay_rate_two_sided_bulk(2, 0.5) == pytest.approx(-7552.0 / 51.0, rel=1e-12)

    def test_two_sided_translation_mode(self):
        assert decay_rate_two_sided_bulk(1, 0.5) == 0.0

    def test_two_sided_minus_one_sided(self):
        m, r0 = 2, 0.5
        diff = decay_rate_two_sided_bulk(m, r0) - decay_rate_one_sided_bulk(m, r0)
        assert diff == pytest.approx(-(1.0 / 9.0) * m * (m * m - 1) / r0**4, rel=1e-13)

    @pytest.mark.parametrize("m", [1, 2, 3, 5])
    @pytest.mark.parametrize("r0", [0.1, 0.3, 0.5, 0.9])
    def test_bulk_weight_bounded(self, m, r0):
        w = math.tanh(m * math.log(1.0 / r0))
        assert 0.0 < w < 1.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            decay_rate_surface_diffusion(-1, 0.5, Fraction(2, 3))
        with pytest.raises(ValueError):
            decay_rate_one_sided_bulk(0, 0.5)
        with pytest.raises(ValueError):
            decay_rate_two_sided_bulk(2, 1.5)


class TestSharpInterfaceCoefficients:
    def test_quadratic(self):
        surface, bulk = sharp_interface_coefficients(MobilityKind.QUADRATIC_POSITIVE_PART)
        assert surface == Fraction(2, 3)
        assert bulk == (Fraction(1, 4),)

    def test_absolute(self):
        surface, bulk = sharp_interface_coefficients(MobilityKind.ABSOLUTE_VALUE)
        assert surface == Fraction(2, 3)
        assert bulk == (Fraction(1, 4), Fraction(1, 4))

    def test_biquadratic(self):
        surface, bulk = sharp_interface_coefficients(MobilityKind.BIQUADRATIC_POSITIVE_PART)
        assert surface == Fraction(4, 9)
        assert bulk == ()


class TestMatching:
    def test_reference_mismatch_magnitude(self):
        # measured 2.285e-4 at eps=0.01, kappa=2 over z in [1, 2]
        mis = matching_mismatch(0.01, 2.0)
        assert mis < 350.0 * 0.01**3
        assert mis > 1e-5  # guards against a vacuous comparison

    def test_halving_ratio_near_eight(self):
        a = matching_mismatch(0.02, 2.0)
        b = matching_mismatch(0.01, 2.0)
        assert 6.0 < a / b < 9.0

    def test_third_order_decay(self):
        vals = {e: matching_mismatch(e, 2.0) for e in (0.04, 0.02, 0.01)}
        order = math.log(vals[0.04] / vals[0.01]) / math.log(4.0)
        assert order >= 2.7

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            matching_mismatch(0.2, 2.0)
        with pytest.raises(ValueError):
            matching_mismatch(0.01, -1.0)
