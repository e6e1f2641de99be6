import dataclasses
import json
import math

import numpy as np
import pytest

from wavewell import (
    Classification,
    ConfigurationError,
    EnergyRecord,
    InapplicableError,
    IntegratorConfig,
    ModalState,
    Trajectory,
    audit,
    classify,
    fit_decay,
    integrate,
    verify_thm52_hypothesis,
)
from wavewell.functionals import Exponents, ray_scalars, potential_on_ray, total_E
from wavewell.lab import _superlinear_growth
from wavewell.varconst import compute_well_geometry, epsilon_prime, h1, mountain_pass_lambda

GEOM_KW = dict(n_gamma=33, n_restarts=8, continuation_restarts=2, d_samples=12, seed=0)


@pytest.fixture(scope="module")
def geom_q3(pi_grid, pi_stiffness, unit_coeff):
    return compute_well_geometry(pi_grid, pi_stiffness, unit_coeff, Exponents(3.0, 0.0), **GEOM_KW)


@pytest.fixture(scope="module")
def geom_q4(pi_grid, pi_stiffness, unit_coeff):
    return compute_well_geometry(pi_grid, pi_stiffness, unit_coeff, Exponents(4.0, 0.0), **GEOM_KW)


def _mode_state(grid, index=0, amplitude=1.0, velocity=0.0):
    u = np.zeros(grid.n_modes)
    v = np.zeros(grid.n_modes)
    u[index] = amplitude
    v[index] = velocity
    return ModalState(t=0.0, u_coeffs=u, v_coeffs=v)


def _potential_zero_amplitude(grid, stiffness, coeff, exponents):
    """Amplitude s0 > lambda_* where J(s0 w1) crosses zero on the mode-1 ray."""
    e1 = np.zeros(grid.n_modes)
    e1[0] = 1.0
    a_uu, log_moment, lq_u = ray_scalars(e1, grid, stiffness, exponents)
    lam = mountain_pass_lambda(e1, grid, stiffness, coeff, exponents)
    lo, hi = lam, 50.0
    f = lambda s: potential_on_ray(s, 1.0, a_uu, log_moment, lq_u, exponents.q)
    assert f(lo) > 0.0 > f(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestClassify:
    def test_tiny_data_is_stable_with_exponential_decay(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        state = _mode_state(pi_grid, amplitude=1e-6)
        cls = classify(
            state, geom_q3, Exponents(3.0, 0.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.set_membership == "W"
        assert cls.predicted == "global_decay_exponential"
        assert 0.0 < cls.E0 < cls.M
        assert cls.a_u0u0 < cls.r_star_sq
        assert cls.thm52_lhs is None and cls.thm52_rhs is None

    def test_tiny_data_with_damping_exponent_predicts_algebraic(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        state = _mode_state(pi_grid, amplitude=1e-6)
        cls = classify(
            state, geom_q3, Exponents(3.0, 0.5), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.set_membership == "W"
        assert cls.predicted == "global_decay_algebraic"

    def test_negative_energy_quartic_data(self, pi_grid, pi_stiffness, unit_coeff, geom_q4):
        state = _mode_state(pi_grid, amplitude=3.1)
        cls = classify(
            state, geom_q4, Exponents(4.0, 0.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.E0 <= 0.0
        assert cls.set_membership == "V_by_energy"
        assert cls.predicted == "blowup_thm51"

    def test_subcritical_coupling_wins_over_membership(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        state = _mode_state(pi_grid, amplitude=25.0)
        cls = classify(
            state, geom_q3, Exponents(3.0, 2.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.predicted == "global_subcritical"

    def test_zero_data(self, pi_grid, pi_stiffness, unit_coeff, geom_q3):
        state = ModalState(0.0, np.zeros(16), np.zeros(16))
        cls = classify(
            state, geom_q3, Exponents(3.0, 0.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.E0 == 0.0
        assert cls.set_membership == "V_by_energy"
        assert cls.predicted == "no_prediction"

    def test_fast_data_with_small_displacement_is_neither(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        state = _mode_state(pi_grid, amplitude=1e-3, velocity=50.0)
        cls = classify(
            state, geom_q3, Exponents(3.0, 0.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        assert cls.E0 > cls.M
        assert cls.a_u0u0 < cls.r_star_sq
        assert cls.set_membership == "neither"
        assert cls.predicted == "no_prediction"

    def test_radius_membership_with_pairing_predicts_blowup(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q4
    ):
        exps = Exponents(4.0, 0.0)
        s0 = _potential_zero_amplitude(pi_grid, pi_stiffness, unit_coeff, exps)
        eps = epsilon_prime(4.0, 0.0, unit_coeff.a0, unit_coeff.mu0, geom_q4.B7)
        c_cap = min(2.0 / h1(eps, 0.0, 1.0, 1.0, geom_q4.B7), math.sqrt(2.0 * geom_q4.M) / s0)
        c = 0.9 * c_cap
        state = _mode_state(pi_grid, amplitude=s0, velocity=c * s0)
        cls = classify(state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        assert cls.set_membership == "V_by_radius"
        assert cls.predicted == "blowup_thm52"
        assert cls.thm52_lhs is not None and cls.thm52_lhs > cls.thm52_rhs > 0.0

    def test_radius_membership_with_opposed_velocity_gives_no_prediction(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q4
    ):
        exps = Exponents(4.0, 0.0)
        s0 = _potential_zero_amplitude(pi_grid, pi_stiffness, unit_coeff, exps)
        c = 0.25 * math.sqrt(2.0 * geom_q4.M) / s0
        state = _mode_state(pi_grid, amplitude=s0, velocity=-c * s0)
        cls = classify(state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        assert cls.set_membership == "V_by_radius"
        assert cls.predicted == "no_prediction"
        assert cls.thm52_lhs < 0.0 < cls.thm52_rhs

    def test_classify_is_pure(self, pi_grid, pi_stiffness, unit_coeff, geom_q3):
        state = _mode_state(pi_grid, amplitude=0.3, velocity=0.1)
        exps = Exponents(3.0, 0.0)
        first = classify(state, geom_q3, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        second = classify(state, geom_q3, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        assert first == second

    def test_blowup_prediction_requires_its_hypothesis(self):
        with pytest.raises(ConfigurationError):
            Classification(
                set_membership="V_by_radius",
                E0=0.1,
                a_u0u0=2.0,
                M=1.0,
                r_star_sq=1.0,
                predicted="blowup_thm52",
                thm52_lhs=0.1,
                thm52_rhs=0.5,
            )

    def test_json_dict_round_trips(self, pi_grid, pi_stiffness, unit_coeff, geom_q3):
        state = _mode_state(pi_grid, amplitude=1e-6)
        cls = classify(
            state, geom_q3, Exponents(3.0, 0.0), unit_coeff,
            grid=pi_grid, stiffness=pi_stiffness,
        )
        blob = json.loads(json.dumps(cls.to_json_dict()))
        assert blob["set_membership"] == "W"
        assert blob["thm52_lhs"] is None
        assert set(blob) == {
            "set_membership", "E0", "a_u0u0", "M", "r_star_sq",
            "predicted", "thm52_lhs", "thm52_rhs",
        }


class TestVerifyThm52:
    def test_subcritical_coupling_is_inapplicable(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        state = _mode_state(pi_grid, amplitude=1.0)
        with pytest.raises(InapplicableError):
            verify_thm52_hypothesis(
                state, geom_q3, Exponents(3.0, 2.0), unit_coeff,
                grid=pi_grid, stiffness=pi_stiffness,
            )

    def test_nonpositive_energy_is_inapplicable(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q4
    ):
        state = _mode_state(pi_grid, amplitude=3.1)
        with pytest.raises(InapplicableError):
            verify_thm52_hypothesis(
                state, geom_q4, Exponents(4.0, 0.0), unit_coeff,
                grid=pi_grid, stiffness=pi_stiffness,
            )

    def test_small_radius_is_inapplicable(self, pi_grid, pi_stiffness, unit_coeff, geom_q4):
        state = _mode_state(pi_grid, amplitude=1e-3, velocity=0.3)
        with pytest.raises(InapplicableError):
            verify_thm52_hypothesis(
                state, geom_q4, Exponents(4.0, 0.0), unit_coeff,
                grid=pi_grid, stiffness=pi_stiffness,
            )

    def test_parallel_velocity_scaling(self, pi_grid, pi_stiffness, unit_coeff, geom_q4):
        """lhs is linear in the velocity factor, rhs quadratic (J(u0) = 0 ray)."""
        exps = Exponents(4.0, 0.0)
        s0 = _potential_zero_amplitude(pi_grid, pi_stiffness, unit_coeff, exps)
        c = 0.2 * math.sqrt(2.0 * geom_q4.M) / s0
        sides = []
        for factor in (1.0, 2.0):
            state = _mode_state(pi_grid, amplitude=s0, velocity=factor * c * s0)
            sides.append(
                verify_thm52_hypothesis(
                    state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness
                )
            )
        (lhs1, rhs1, _), (lhs2, rhs2, _) = sides
        assert lhs2 == pytest.approx(2.0 * lhs1, rel=1e-12)
        assert rhs2 == pytest.approx(4.0 * rhs1, rel=1e-9)

    def test_orthogonal_velocity_never_holds(self, pi_grid, pi_stiffness, unit_coeff, geom_q4):
        exps = Exponents(4.0, 0.0)
        s0 = _potential_zero_amplitude(pi_grid, pi_stiffness, unit_coeff, exps)
        u = np.zeros(16)
        u[0] = s0
        v = np.zeros(16)
        v[1] = 0.3 * math.sqrt(2.0 * geom_q4.M)
        state = ModalState(0.0, u, v)
        lhs, rhs, holds = verify_thm52_hypothesis(
            state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness
        )
        assert lhs == 0.0
        assert rhs > 0.0
        assert not holds

    def test_sides_reproducible_and_quadrature_stable(self, pi_grid, pi_stiffness, unit_coeff, geom_q4):
        from wavewell import DomainGrid, assemble_stiffness

        exps = Exponents(4.0, 0.0)
        s0 = _potential_zero_amplitude(pi_grid, pi_stiffness, unit_coeff, exps)
        c = 0.2 * math.sqrt(2.0 * geom_q4.M) / s0
        state = _mode_state(pi_grid, amplitude=s0, velocity=c * s0)
        base = verify_thm52_hypothesis(
            state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness
        )
        again = verify_thm52_hypothesis(
            state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness
        )
        assert abs(again[0] - base[0]) <= 1e-10 * abs(base[0])
        assert abs(again[1] - base[1]) <= 1e-10 * abs(base[1])

        fine_grid = DomainGrid(length=np.pi, n_modes=16, n_cells=64)
        fine_stiff = assemble_stiffness(fine_grid, unit_coeff)
        fine_geom = compute_well_geometry(
            fine_grid, fine_stiff, unit_coeff, Exponents(4.0, 0.0), **GEOM_KW
        )
        fine_state = _mode_state(fine_grid, amplitude=s0, velocity=c * s0)
        refined = verify_thm52_hypothesis(
            fine_state, fine_geom, exps, unit_coeff, grid=fine_grid, stiffness=fine_stiff
        )
        assert refined[0] == pytest.approx(base[0], rel=1e-6)
        assert refined[1] == pytest.approx(base[1], rel=1e-6)


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------


def _record(t, e, **kw):
    fields = dict(
        t=t, E=e, I=0.0, J=0.0, F=-1.0, Y_available=False, Y=0.0,
        l2_u=0.0, l2_v=0.0, lq_u=0.0, a_uu=0.0, log_moment=0.0,
        damping_power=0.0, balance_residual=0.0,
    )
    fields.update(kw)
    return EnergyRecord(**fields)


def _synthetic_trajectory(times, energies, unit_coeff, *, outcome="completed", l2=None, **rec_kw):
    recs = tuple(
        _record(t, e, **({} if l2 is None else {"l2_u": l2[i]}), **rec_kw)
        for i, (t, e) in enumerate(zip(times, energies))
    )
    return Trajectory(
        records=recs,
        states_sampled=(),
        outcome_flag=outcome,
        config=IntegratorConfig(t_end=float(times[-1])),
        blowup_report=None,
        exponents=Exponents(3.0, 0.0),
        coeff=unit_coeff,
    )


class TestFitDecay:
    def test_exponential_oracle(self, unit_coeff):
        t = np.linspace(0.0, 10.0, 201)
        traj = _synthetic_trajectory(t, np.exp(-2.0 * t), unit_coeff)
        fits = fit_decay(traj, 0.0, 0.5)
        assert len(fits) == 1
        fit = fits[0]
        assert fit.model == "exponential"
        assert fit.rate_or_slope == pytest.approx(2.0, abs=1e-6)
        assert fit.goodness > 1.0 - 1e-9
        assert fit.window == (5.5, 10.0)

    def test_algebraic_oracle(self, unit_coeff):
        t = np.linspace(0.0, 10.0, 201)
        traj = _synthetic_trajectory(t, (1.0 + t) ** -1.0, unit_coeff)
        fits = fit_decay(traj, 2.0, 0.5)
        assert [f.model for f in fits] == ["algebraic_2_over_p", "algebraic_2_over_p_plus_2"]
        assert fits[0].rate_or_slope == pytest.approx(1.0, abs=1e-6)
        assert fits[0].goodness > 1.0 - 1e-9
        assert fits[1].rate_or_slope > 0.0

    def test_constant_energy(self, unit_coeff):
        t = np.linspace(0.0, 8.0, 50)
        traj = _synthetic_trajectory(t, np.full_like(t, 3.7), unit_coeff)
        (fit,) = fit_decay(traj, 0.0, 0.5)
        assert abs(fit.rate_or_slope) < 1e-12
        assert fit.goodness == 1.0

    def test_nonpositive_energy_in_window(self, unit_coeff):
        t = np.linspace(0.0, 10.0, 101)
        traj = _synthetic_trajectory(t, 1.0 - 0.3 * t, unit_coeff)
        with pytest.raises(InapplicableError):
            fit_decay(traj, 0.0, 0.5)

    def test_short_horizon_is_inapplicable(self, unit_coeff):
        t = np.linspace(0.0, 0.9, 10)
        traj = _synthetic_trajectory(t, np.exp(-t), unit_coeff)
        with pytest.raises(InapplicableError):
            fit_decay(traj, 0.0, 0.5)

    def test_window_lies_within_trajectory(self, unit_coeff):
        t = np.linspace(0.0, 6.0, 61)
        traj = _synthetic_trajectory(t, np.exp(-t), unit_coeff)
        (fit,) = fit_decay(traj, 0.0, 0.25)
        t0, t1 = fit.window
        assert t[0] <= t0 <= t1 <= t[-1]
        assert t0 == pytest.approx(6.0 - 0.25 * 5.0)

    def test_bad_arguments_rejected(self, unit_coeff):
        t = np.linspace(0.0, 5.0, 20)
        traj = _synthetic_trajectory(t, np.exp(-t), unit_coeff)
        with pytest.raises(ConfigurationError):
            fit_decay(traj, -1.0, 0.5)
        with pytest.raises(ConfigurationError):
            fit_decay(traj, 0.0, 0.0)
        with pytest.raises(ConfigurationError):
            fit_decay(traj, 0.0, 1.5)


# ---------------------------------------------------------------------------
# auditing
# ---------------------------------------------------------------------------


class TestSuperlinearGrowth:
    def test_exponential_growth_detected(self):
        t = np.linspace(0.0, 5.0, 60)
        assert _superlinear_growth(t, np.exp(2.0 * t))

    def test_linear_growth_rejected(self):
        t = np.linspace(0.0, 10.0, 60)
        assert not _superlinear_growth(t, 1.0 + t)

    def test_decay_rejected(self):
        t = np.linspace(0.0, 5.0, 60)
        assert not _superlinear_growth(t, np.exp(-t))


@pytest.fixture(scope="module")
def stable_run(pi_grid, pi_stiffness, unit_coeff, geom_q3):
    exps = Exponents(3.0, 0.0)
    state = _mode_state(pi_grid, amplitude=0.1)
    cls = classify(state, geom_q3, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
    traj = integrate(
        state, pi_grid, unit_coeff, exps,
        IntegratorConfig(t_end=3.0, record_every=0.25),
        stiffness=pi_stiffness,
    )
    return traj, cls


class TestAudit:
    def test_zero_trajectory_passes_everything(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q3
    ):
        exps = Exponents(3.0, 0.0)
        state = ModalState(0.0, np.zeros(16), np.zeros(16))
        cls = classify(state, geom_q3, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        traj = integrate(
            state, pi_grid, unit_coeff, exps,
            IntegratorConfig(t_end=1.0), stiffness=pi_stiffness,
        )
        report = audit(traj, cls, geom_q3)
        assert report.all_passed
        names = [c.name for c in report.checks]
        assert names == [
            "energy_monotone",
            "balance_residual",
            "stable_confinement",
            "unstable_persistence",
            "theta_lower_bound",
            "outcome_consistency",
        ]

    def test_stable_run_confinement_and_theta(self, stable_run, geom_q3):
        traj, cls = stable_run
        report = audit(traj, cls, geom_q3)
        assert report.all_passed
        by_name = {c.name: c for c in report.checks}
        assert by_name["stable_confinement"].applicable
        assert by_name["stable_confinement"].margin > 0.0
        assert by_name["theta_lower_bound"].applicable
        assert by_name["theta_lower_bound"].margin >= -1e-8
        assert by_name["outcome_consistency"].passed

    def test_corrupted_record_fails_monotonicity(self, stable_run, geom_q3):
        traj, cls = stable_run
        records = list(traj.records)
        mid = len(records) // 2
        records[mid] = dataclasses.replace(records[mid], E=records[mid].E + 1.0)
        bad = dataclasses.replace(traj, records=tuple(records))
        report = audit(bad, cls, geom_q3)
        assert not report.all_passed
        by_name = {c.name: c for c in report.checks}
        assert not by_name["energy_monotone"].passed
        assert by_name["energy_monotone"].margin < 0.0

    def test_negative_energy_blowup_consistency(
        self, pi_grid, pi_stiffness, unit_coeff, geom_q4
    ):
        exps = Exponents(4.0, 0.0)
        state = _mode_state(pi_grid, amplitude=3.1)
        cls = classify(state, geom_q4, exps, unit_coeff, grid=pi_grid, stiffness=pi_stiffness)
        assert cls.predicted == "blowup_thm51"
        traj = integrate(
            state, pi_grid, unit_coeff, exps,
            IntegratorConfig(t_end=50.0, record_every=0.05),
            stiffness=pi_stiffness,
        )
        assert traj.blowup_report is not None
        report = audit(traj, cls, geom_q4)
        assert report.all_passed
        by_name = {c.name: c for c in report.checks}
        assert by_name["outcome_consistency"].applicable
        assert not by_name["stable_confinement"].applicable
        assert not by_name["theta_lower_bound"].applicable

    def test_growth_satisfies_radius_blowup_prediction(self, unit_coeff):
        cls = Classification(
            set_membership="V_by_radius",
            E0=0.1,
            a_u0u0=5.0,
            M=1.0,
            r_star_sq=1.0,
            predicted="blowup_thm52",
            thm52_lhs=1.0,
            thm52_rhs=0.5,
        )
        t = np.linspace(0.0, 5.0, 40)
        traj = _synthetic_trajectory(
            t, np.full_like(t, 0.05), unit_coeff, l2=np.exp(2.0 * t), I=-1.0
        )
        report = audit(traj, cls, None)
        by_name = {c.name: c for c in report.checks}
        assert by_name["outcome_consistency"].passed
        assert by_name["unstable_persistence"].applicable
        assert by_name["unstable_persistence"].passed
        assert by_name["unstable_persistence"].margin == pytest.approx(1.0)

    def test_report_serialization_and_table(self, stable_run, geom_q3):
        traj, cls = stable_run
        report = audit(traj, cls, geom_q3)
        blob = json.loads(report.to_json())
        assert blob["all_passed"] is True
        assert len(blob["checks"]) == 6
        table = report.table()
        assert table.count("\n") == 7
        assert "overall: PASS" in table
