import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavewell import (
    ConfigurationError,
    DomainGrid,
    ModalState,
    assemble_stiffness,
    bilinear_a,
    gradient_norm_sq,
    make_coefficient_field,
)


@settings(max_examples=25, deadline=None)
@given(
    length=st.floats(0.5, 10.0),
    n_modes=st.integers(1, 24),
)
def test_quadrature_weights_positive_and_sum_to_length(length, n_modes):
    grid = DomainGrid(length=length, n_modes=n_modes)
    assert np.all(grid.weights > 0)
    assert math.isclose(float(np.sum(grid.weights)), length, rel_tol=1e-12)


@settings(max_examples=25, deadline=None)
@given(n_modes=st.integers(1, 32), extra_cells=st.integers(0, 8))
def test_gram_matrix_is_identity_when_quadrature_resolves_basis(n_modes, extra_cells):
    # sufficient resolution: >= 8 nodes per cell and at least one cell per mode
    grid = DomainGrid(length=np.pi, n_modes=n_modes, n_cells=n_modes + extra_cells)
    assert grid.gram_deviation() < 1e-10


def test_gram_deviation_tiny_at_default_resolution(pi_grid):
    assert pi_grid.gram_deviation() < 1e-13


def test_unit_profile_stiffness_is_squared_mode_numbers(unit_coeff):
    grid = DomainGrid(length=np.pi, n_modes=4)
    s = assemble_stiffness(grid, unit_coeff)
    assert np.allclose(np.diag(s), [1.0, 4.0, 9.0, 16.0], rtol=0, atol=1e-10)
    off = s - np.diag(np.diag(s))
    assert np.max(np.abs(off)) < 1e-10


def test_constant_profile_scales_frequencies():
    grid = DomainGrid(length=2.0, n_modes=5)
    coeff = make_coefficient_field(length=2.0, a_params=(3.0,))
    s = assemble_stiffness(grid, coeff)
    expected = 3.0 * (np.arange(1, 6) * math.pi / 2.0) ** 2
    assert np.allclose(np.diag(s), expected, rtol=1e-12)


def test_linear_profile_stiffness_matches_dense_trapezoid_oracle():
    grid = DomainGrid(length=np.pi, n_modes=6)
    coeff = make_coefficient_field(length=np.pi, a_family="linear", a_params=(1.0, 1.0))
    s = assemble_stiffness(grid, coeff)

    # closed form for the (1,1) entry with A(x) = 1 + x on (0, pi)
    assert math.isclose(s[0, 0], 1.0 + math.pi / 2.0, rel_tol=1e-12)

    x = np.linspace(0.0, np.pi, 1_000_001)
    j = np.arange(1, 7)
    dbasis = math.sqrt(2.0 / math.pi) * j[None, :] * np.cos(np.outer(x, j))
    integrand = (1.0 + x)[:, None, None] * dbasis[:, :, None] * dbasis[:, None, :]
    oracle = np.trapezoid(integrand, x, axis=0)
    assert math.isclose(s[0, 0], oracle[0, 0], rel_tol=1e-10)
    assert np.allclose(s, oracle, rtol=0, atol=1e-9)


def test_stiffness_symmetric_with_elliptic_lower_bound():
    rng = np.random.default_rng(7)
    for _ in range(5):
        c = rng.uniform(0.5, 2.0)
        slope = rng.uniform(0.0, 1.0)
        length = rng.uniform(1.0, 6.0)
        grid = DomainGrid(length=length, n_modes=12)
        coeff = make_coefficient_field(length=length, a_family="linear", a_params=(c, slope))
        s = assemble_stiffness(grid, coeff)
        assert np.array_equal(s, s.T)
        lam = np.linalg.eigvalsh(s)
        assert lam[0] >= coeff.a0 * (math.pi / length) ** 2 * (1.0 - 1e-12)


def test_bilinear_examples(pi_grid, unit_coeff):
    s = assemble_stiffness(pi_grid, unit_coeff)
    zero = np.zeros(pi_grid.n_modes)
    assert bilinear_a(zero, s) == 0.0
    e1 = zero.copy()
    e1[0] = 1.0
    assert math.isclose(bilinear_a(e1, s), 1.0, rel_tol=1e-12)
    e2 = zero.copy()
    e2[1] = 2.0
    assert math.isclose(bilinear_a(e2, s), 16.0, rel_tol=1e-12)


def test_evaluate_and_project_round_trip(pi_grid):
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = rng.standard_normal(pi_grid.n_modes)
        values = pi_grid.evaluate_at_nodes(u)
        back = pi_grid.project(values)
        assert np.allclose(back, u, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(u))))


def test_projection_is_quadrature_adjoint(pi_grid):
    rng = np.random.default_rng(4)
    f = rng.standard_normal(pi_grid.n_quad)
    u = rng.standard_normal(pi_grid.n_modes)
    lhs = float(pi_grid.project(f) @ u)
    rhs = pi_grid.integrate(f * pi_grid.evaluate_at_nodes(u))
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12)


def test_evaluate_examples(pi_grid):
    zeros = pi_grid.evaluate_at_nodes(np.zeros(pi_grid.n_modes))
    assert np.all(zeros == 0.0)
    e2 = np.zeros(pi_grid.n_modes)
    e2[1] = 1.0
    vals = pi_grid.evaluate_at_nodes(e2)
    expected = math.sqrt(2.0 / math.pi) * np.sin(2.0 * pi_grid.nodes)
    assert np.allclose(vals, expected, rtol=0, atol=1e-13)


def test_stiffness_monotone_in_profile():
    grid = DomainGrid(length=2.0, n_modes=10)
    low = make_coefficient_field(length=2.0, a_family="linear", a_params=(1.0, 0.25))
    high = make_coefficient_field(length=2.0, a_family="linear", a_params=(1.5, 0.5))
    s_low = assemble_stiffness(grid, low)
    s_high = assemble_stiffness(grid, high)
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = rng.standard_normal(10)
        assert bilinear_a(u, s_high) >= bilinear_a(u, s_low) - 1e-12


def test_gradient_norm_matches_unit_stiffness(pi_grid, unit_coeff, pi_stiffness):
    rng = np.random.default_rng(5)
    u = rng.standard_normal(pi_grid.n_modes)
    assert math.isclose(gradient_norm_sq(pi_grid, u), bilinear_a(u, pi_stiffness), rel_tol=1e-10)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        DomainGrid(length=-1.0, n_modes=4)
    with pytest.raises(ConfigurationError):
        DomainGrid(length=1.0, n_modes=0)
    with pytest.raises(ConfigurationError):
        DomainGrid(length=1.0, n_modes=4, nodes_per_cell=1)
    with pytest.raises(ConfigurationError):
        DomainGrid(length=1.0, n_modes=4, n_cells=0)


def test_coefficient_field_validation(caplog):
    with pytest.raises(ConfigurationError):
        # profile dips below zero on the interval
        make_coefficient_field(length=np.pi, a_family="linear", a_params=(0.5, -1.0))
    with pytest.raises(ConfigurationError):
        # increasing modulation is not admissible
        make_coefficient_field(length=1.0, mu_family="linear", mu_params=(1.0, -0.5), horizon=1.0)
    with pytest.raises(ConfigurationError):
        # modulation hits zero before the horizon
        make_coefficient_field(length=1.0, mu_family="linear", mu_params=(1.0, 0.2), horizon=10.0)
    with pytest.raises(ConfigurationError):
        make_coefficient_field(length=1.0, mu_family="linear", mu_params=(1.0, 0.2))
    with pytest.raises(ConfigurationError):
        make_coefficient_field(length=1.0, mu_family="exp_decay", mu_params=(1.0, -1.0, 1.0))
    with pytest.raises(ConfigurationError):
        make_coefficient_field(length=1.0, a_family="nope", a_params=(1.0,))

    import logging

    with caplog.at_level(logging.WARNING, logger="wavewell"):
        make_coefficient_field(length=1.0, mu_family="constant", mu_params=(2.0,))
    assert any("constant modulation" in m for m in caplog.messages)


def test_coefficient_field_evaluation():
    coeff = make_coefficient_field(
        length=2.0,
        a_family="linear",
        a_params=(1.0, 0.5),
        mu_family="exp_decay",
        mu_params=(1.0, 1.0, 1.0),
    )
    assert coeff.a0 == 1.0
    assert coeff.mu0 == 1.0
    assert math.isclose(coeff.mu(0.0), 2.0)
    assert math.isclose(coeff.mu(1.0), 1.0 + math.exp(-1.0))
    assert math.isclose(coeff.dmu(0.0), -1.0)
    assert np.allclose(coeff.a_values(np.array([0.0, 2.0])), [1.0, 2.0])
    lin = make_coefficient_field(length=1.0, mu_family="linear", mu_params=(2.0, 0.1), horizon=5.0)
    assert math.isclose(lin.mu0, 1.5)
    assert lin.dmu(3.0) == -0.1


def test_modal_state_validation():
    with pytest.raises(ConfigurationError):
        ModalState(t=0.0, u_coeffs=np.array([1.0, np.nan]), v_coeffs=np.zeros(2))
    with pytest.raises(ConfigurationError):
        ModalState(t=0.0, u_coeffs=np.zeros(3), v_coeffs=np.zeros(2))
    state = ModalState(t=0.0, u_coeffs=np.ones(2), v_coeffs=np.zeros(2))
    with pytest.raises(ValueError):
        state.u_coeffs[0] = 2.0
