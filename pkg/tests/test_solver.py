"""Tests for the phase-field time stepper: equilibria, conservation,
chemical potential, interface measurement, and scheme order."""

import numpy as np
import pytest

from degench.errors import DivergedError, NoInterfaceError
from degench.grid import build_grid, interpolate
from degench.mobility import MobilityKind
from degench.solver import (
    PhaseFieldState,
    SolverConfig,
    Stepper,
    chemical_potential,
    energy,
    excess_mass,
    initial_tanh_state,
    mass,
    measure_interface,
    run,
)

QUAD = MobilityKind.QUADRATIC_POSITIVE_PART
ABS = MobilityKind.ABSOLUTE_VALUE
BIQUAD = MobilityKind.BIQUADRATIC_POSITIVE_PART


class TestMobility:
    def test_degeneracy_at_unit_values(self):
        for kind in MobilityKind:
            assert kind(1.0) == 0.0
            assert kind(-1.0) == 0.0

    def test_values(self):
        assert QUAD(0.0) == 1.0
        assert QUAD(1.5) == 0.0          # positive part clips
        assert ABS(1.5) == pytest.approx(1.25)
        assert BIQUAD(0.5) == pytest.approx(0.5625)
        assert BIQUAD(1.5) == 0.0

    def test_nonnegative(self):
        u = np.linspace(-2, 2, 101)
        for kind in MobilityKind:
            assert np.all(kind(u) >= 0.0)

    def test_parse(self):
        assert MobilityKind.parse("quad-pos") is QUAD
        assert MobilityKind.parse("ABS") is ABS
        assert MobilityKind.parse("biquad") is BIQUAD
        with pytest.raises(ValueError):
            MobilityKind.parse("cubic")


class TestConfig:
    def test_defaults_valid(self):
        cfg = SolverConfig()
        assert cfg.theta == 0.0
        assert cfg.n_points == 400

    @pytest.mark.parametrize("kwargs", [
        {"dt": 0.0},
        {"theta": -1.0},
        {"stabilization_s": -0.1},
        {"n_points": 4},
        {"r_min": 0.0},
        {"r_min": 1.0},
        {"mobility_refresh_tol": 0.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


def constant_state(c, n=80, eps=0.05, mobility=QUAD):
    grid = build_grid(n, eps)
    return PhaseFieldState(grid=grid, u=np.full(n, float(c)), time=0.0,
                           epsilon=eps, mobility=mobility)


class TestEquilibria:
    @pytest.mark.parametrize("c", [-1.0, 1.0, 0.8, -0.9])
    def test_stable_constants_are_fixed_points(self, c):
        cfg = SolverConfig(dt=1e-3, n_points=80, t_end=1.0)
        state = constant_state(c)
        final, _ = run(state, cfg, record_every=1000)
        assert np.max(np.abs(final.u - c)) < 1e-10

    def test_spinodal_constant_is_a_fixed_point_short_term(self):
        # u = 0.3 lies in the spinodal band: the constant is an exact fixed
        # point of the scheme, but roundoff seeds the physical instability,
        # so only a short horizon can be asserted
        cfg = SolverConfig(dt=1e-3, n_points=80, t_end=0.01)
        state = constant_state(0.3)
        final, _ = run(state, cfg, record_every=10)
        assert np.max(np.abs(final.u - 0.3)) < 1e-10

    def test_minus_one_exact_long(self):
        cfg = SolverConfig(dt=1e-3, n_points=64, t_end=2.0)
        state = constant_state(-1.0, n=64)
        final, _ = run(state, cfg, record_every=2000)
        assert np.max(np.abs(final.u + 1.0)) < 1e-10


class TestChemicalPotential:
    def test_zero_at_minima(self):
        # nonzero only through roundoff in the large corner entries of the
        # truncated-domain Laplacian
        state = constant_state(-1.0)
        assert np.max(np.abs(chemical_potential(state))) < 1e-10

    def test_zero_at_origin_of_well(self):
        state = constant_state(0.0)
        assert np.max(np.abs(chemical_potential(state))) < 1e-12

    def test_tanh_curvature_field(self):
        # for u = -tanh((r - 1/2)/eps) the planar terms cancel identically
        # and mu reduces to the curvature part eps * sech^2((r-1/2)/eps) / r
        eps, n = 0.05, 300
        cfg = SolverConfig(n_points=n)
        state = initial_tanh_state(eps, QUAD, cfg)
        mu = chemical_potential(state)
        r = state.grid.r
        analytic = eps / np.cosh((r - 0.5) / eps) ** 2 / r
        interior = r > 0.01   # truncation-node row differs by the pinned u_r/r
        assert np.max(np.abs(mu[interior] - analytic[interior])) < 1e-6

    def test_tanh_value_at_interface(self):
        eps = 0.05
        cfg = SolverConfig(n_points=300)
        state = initial_tanh_state(eps, QUAD, cfg)
        mu = chemical_potential(state)
        val = interpolate(state.grid, mu, 0.5)
        assert val == pytest.approx(2.0 * eps, abs=1e-6)


class TestConservationAndEnergy:
    def test_mass_drift_over_1000_steps(self):
        eps = 0.05
        cfg = SolverConfig(dt=1e-3, n_points=200, t_end=1.0)
        state = initial_tanh_state(eps, QUAD, cfg)
        m0 = mass(state)
        final, _ = run(state, cfg, record_every=1000)
        drift = abs(mass(final) - m0) / excess_mass(state)
        assert drift < 1e-6

    def test_energy_monotone_near_quasi_stationarity(self):
        eps = 0.05
        cfg = SolverConfig(dt=1e-3, n_points=160, t_end=3.0)
        state = initial_tanh_state(eps, QUAD, cfg)
        _, series = run(state, cfg, record_every=100)
        e = np.array(series.energy)
        # after the initial adjustment the energy must not increase
        tail = e[len(e) // 3:]
        assert np.all(np.diff(tail) < 1e-10)


class TestSchemeOrder:
    def test_first_order_in_dt(self):
        eps = 0.05
        sols = {}
        for dt in (2e-3, 1e-3, 5e-4):
            cfg = SolverConfig(dt=dt, n_points=120, t_end=0.4,
                               mobility_refresh_tol=1e30)  # frozen operator
            state = initial_tanh_state(eps, QUAD, cfg)
            final, _ = run(state, cfg, record_every=10**6)
            sols[dt] = final.u
        d1 = np.max(np.abs(sols[2e-3] - sols[1e-3]))
        d2 = np.max(np.abs(sols[1e-3] - sols[5e-4]))
        assert 1.4 < d1 / d2 < 3.6


class TestRun:
    def test_zero_steps_returns_initial(self):
        eps = 0.05
        cfg = SolverConfig(dt=1e-3, n_points=80, t_end=0.0)
        state = initial_tanh_state(eps, QUAD, cfg)
        final, series = run(state, cfg)
        assert final is state
        assert len(series.t) == 1

    def test_records_and_observers(self):
        eps = 0.05
        cfg = SolverConfig(dt=1e-3, n_points=80, t_end=0.05)
        state = initial_tanh_state(eps, QUAD, cfg)
        seen = []
        final, series = run(state, cfg, observers=[lambda s: seen.append(s.time)],
                            record_every=10)
        assert len(series.t) == len(seen)
        assert series.t[-1] == pytest.approx(0.05)
        assert np.all(np.isfinite(series.energy))

    def test_blowup_detector(self):
        cfg = SolverConfig(dt=1e-3, n_points=64, t_end=1.0)
        state = constant_state(20.0, n=64)
        with pytest.raises(DivergedError):
            run(state, cfg)

    def test_rejects_backward_time(self):
        cfg = SolverConfig(dt=1e-3, n_points=64, t_end=0.5)
        state = PhaseFieldState(grid=build_grid(64, 0.05), u=np.zeros(64),
                                time=1.0, epsilon=0.05, mobility=QUAD)
        with pytest.raises(ValueError):
            run(state, cfg)


class TestMeasureInterface:
    def test_exact_tanh(self):
        eps = 0.05
        cfg = SolverConfig(n_points=240)
        state = initial_tanh_state(eps, QUAD, cfg)
        assert measure_interface(state) == pytest.approx(0.5, abs=1e-8)

    def test_constant_has_no_interface(self):
        with pytest.raises(NoInterfaceError):
            measure_interface(constant_state(-1.0))

    def test_multiple_crossings_rejected(self):
        grid = build_grid(100, 0.05)
        u = np.sin(20.0 * grid.r)
        state = PhaseFieldState(grid=grid, u=u, time=0.0, epsilon=0.05,
                                mobility=QUAD)
        with pytest.raises(NoInterfaceError):
            measure_interface(state)

    def test_shifted_center(self):
        eps = 0.03
        cfg = SolverConfig(n_points=240)
        state = initial_tanh_state(eps, QUAD, cfg, center=0.55)
        assert measure_interface(state) == pytest.approx(0.55, abs=1e-8)


class TestStateImmutability:
    def test_u_locked(self):
        state = constant_state(0.0)
        with pytest.raises(ValueError):
            state.u[0] = 1.0
