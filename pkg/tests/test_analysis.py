import math

import numpy as np
import pytest

from hjdg import analysis as an
from hjdg.cases import CASES, get_case
from hjdg.field import basis_for, project
from hjdg.hamiltonian import catalog
from hjdg.mesh import build_cartesian, build_uniform_1d, triangulate_rectangle


@pytest.mark.parametrize("mesh", [build_uniform_1d(-1, 1, 7), build_cartesian(0, 1, 0, 2, 3, 4),
                                  triangulate_rectangle(0, 1, 0, 1, 3, 3)], ids=["1d", "cart", "tri"])
def test_norms_of_exact_polynomials_and_constants(mesh):
    one_d = hasattr(mesh, "n_cells")
    poly = (lambda x: 1 - x + 2 * x * x) if one_d else (lambda x, y: 1 - x + x * y)
    f = project(mesh, basis_for(mesh, 2), poly)
    assert max(an.error_norms(f, poly)) <= 1e-12
    shifted = (lambda x: poly(x) - 0.1) if one_d else (lambda x, y: poly(x, y) - 0.1)
    assert np.allclose(an.error_norms(f, shifted), 0.1, atol=1e-12)


def test_projection_norms_converge_at_third_order():
    errs = []
    for N in (40, 80):
        mesh = build_uniform_1d(0, 2 * np.pi, N)
        errs.append(an.error_norms(project(mesh, basis_for(mesh, 2), np.sin), np.sin))
    for n in range(3):
        assert errs[0][n] / errs[1][n] == pytest.approx(8.0, rel=0.15)


def test_convergence_orders():
    rep = an.convergence_orders([(1e-2,) * 3, (2.5e-3,) * 3], [0.1, 0.05])
    assert rep.order() == pytest.approx(2.0)
    rep = an.convergence_orders([(8e-3,) * 3, (1e-3,) * 3], [0.2, 0.1])
    assert rep.order("Linf") == pytest.approx(3.0)
    rep = an.convergence_orders([(1e-2,) * 3, (1e-3,) * 3], [0.3, 0.1])
    assert rep.order() == pytest.approx(math.log(10) / math.log(3))
    assert rep.orders[0] == (None, None, None)
    with pytest.raises(ValueError):
        an.convergence_orders([(1,) * 3, (1,) * 3, (1,) * 3], [0.1, 0.2, 0.05])
    with pytest.raises(ValueError):
        an.convergence_orders([(1,) * 3], [0.1])


def test_report_formats():
    rep = an.convergence_orders([(1e-2, 2e-2, 3e-2), (2.5e-3, 5e-3, 7.5e-3)], [0.1, 0.05],
                                labels=[40, 80])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "N,h,L1,L1_order,L2,L2_order,Linf,Linf_order"
    assert lines[1].startswith("40,0.1,1.000000e-02,,")
    assert lines[2].endswith("2.0000")
    assert "| 80 |" in rep.to_markdown()


@pytest.mark.parametrize("name", [n for n, c in CASES.items() if c.exact_kind])
def test_oracles_reproduce_initial_data(name):
    case = get_case(name)
    exact = case.exact()
    rng = np.random.default_rng(0)
    if case.dim == 1:
        a, b = case.domain
        x = rng.uniform(a, b, 50)
        assert np.allclose(exact(x, 0.0), case.phi0(x), atol=1e-10)
    else:
        a, b, c, d = case.domain
        x, y = rng.uniform(a, b, 50), rng.uniform(c, d, 50)
        assert np.allclose(exact(x, y, 0.0), case.phi0(x, y), atol=1e-10)


def test_characteristics_agree_with_hopf_lax_smooth():
    case = get_case("burgers1d")
    x = np.linspace(0, 2 * np.pi, 101)
    for t in (0.25, 0.5, 0.9):
        a = an.characteristics_oracle(case, x, t)
        b = an.hopf_lax_oracle(case, x, t)
        assert np.max(np.abs(a - b)) <= 1e-9


def test_characteristics_agree_with_hopf_lax_after_kink():
    case = get_case("burgers1d")
    model, phi0, dphi0, bound = case.characteristic_data()
    t = 1.5
    xs = np.linspace(0, 2 * np.pi, 81)
    checked = 0
    for x in xs:
        try:
            a = an.characteristics_1d(model, phi0, dphi0, np.array([x]), t, bound)
        except an.OracleError:
            continue        # characteristics cross here: near the kink
        checked += 1
        assert abs(a[0] - an.hopf_lax_oracle(case, np.array([x]), t)[0]) <= 1e-9
    assert 30 < checked < len(xs)


def test_diagonal_reduction_matches_hopf_lax():
    case = get_case("burgers2d")
    s = np.linspace(-4, 4, 41)
    t = case.t_final
    a = an.characteristics_oracle(case, s, t)
    model = case.model_1d()
    b = an.hopf_lax_1d(case.phi0_1d, s, t, lagrangian=model.lagrangian,
                       window=t * case.speed_max, period=4.0)
    assert np.max(np.abs(a - b)) <= 1e-9


def test_eikonal_hopf_lax_equals_window_minimum():
    case = get_case("eikonal1d")
    x = np.linspace(0, 2 * np.pi, 77)
    for t in (0.3, 1.0):
        assert np.allclose(an.hopf_lax_oracle(case, x, t), an.window_min_sine(x, t), atol=1e-12)


def test_hopf_lax_small_time_recovers_data():
    case = get_case("burgers1d")
    x = np.linspace(0, 6, 13)
    assert np.allclose(an.hopf_lax_oracle(case, x, 1e-6), np.sin(x), atol=1e-6)


def test_linear_transport_solution_solves_pde():
    x = np.linspace(0.1, 6.0, 31)
    t, h = 0.7, 1e-5
    phi_t = (an.linear_sine_transport(x, t + h) - an.linear_sine_transport(x, t - h)) / (2 * h)
    phi_x = (an.linear_sine_transport(x + h, t) - an.linear_sine_transport(x - h, t)) / (2 * h)
    assert np.allclose(phi_t + np.sin(x) * phi_x, 0.0, atol=1e-7)


def test_cross_characteristics_solve_pde():
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-3, 3, (2, 30))
    t, h = 0.5, 1e-5
    f = an.cross_characteristics
    phi_t = (f(x, y, t + h) - f(x, y, t - h)) / (2 * h)
    px = (f(x + h, y, t) - f(x - h, y, t)) / (2 * h)
    py = (f(x, y + h, t) - f(x, y - h, t)) / (2 * h)
    assert np.allclose(phi_t + px * py, 0.0, atol=1e-7)


def test_rotation_is_periodic_in_time():
    exact = get_case("rotation-smooth").exact()
    x, y = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
    assert np.allclose(exact(x, y, 2 * np.pi), exact(x, y, 0.0), atol=1e-12)


def test_oracle_validity_guards():
    with pytest.raises(an.OracleError):
        get_case("cos1d").exact()(np.array([0.0]), 1.0)
    with pytest.raises(an.OracleError):
        an.cross_characteristics(0.0, 0.0, 1.2)
    with pytest.raises(an.OracleError):
        an.hopf_lax_oracle(get_case("cos1d"), np.array([0.0]), 0.1)
    with pytest.raises(an.OracleError):
        an.characteristics_oracle(get_case("burgers1d"), np.array([1.0]), 1.5)


def test_lax_friedrichs_reference_against_hopf_lax():
    case = get_case("burgers1d")
    ref = an.reference_lf_solver(case, 16384, t=0.5)
    x = np.linspace(0, 2 * np.pi, 200)
    assert np.max(np.abs(ref(x) - an.hopf_lax_oracle(case, x, 0.5))) <= 5e-3


def test_corner_formula_against_lax_friedrichs():
    case = get_case("quartic1d")
    x = np.linspace(-1, 1, 401)
    exact = case.exact()(x, 1.0)
    ref = an.reference_lf_solver(case, 16384)(x)
    assert np.max(np.abs(exact - ref)) <= 5e-3
    # the corner formula is exact at t = 0 and is a viscosity solution: far from
    # the fan it is the transported linear data
    H = lambda p: catalog("quartic1d").H(p, 0.0)
    far = np.abs(x) > 0.9
    assert np.allclose(exact[far], np.minimum(2 * x[far], -2 * x[far]) - H(2.0), atol=1e-12)
