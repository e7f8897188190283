import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from scipy.linalg import expm

from chargedosc import fixtures, oracle
from chargedosc.errors import ConvergenceFailure, ResolutionError, SolverStall
from chargedosc.normal_modes import solve_modes
from chargedosc.params import derive
from chargedosc.spectrum import LevelIndex, lowest_planar, planar_levels
from chargedosc.states import eigenstate, ground_state, moments, system_ground_form


def decoupled():
    return fixtures.get("decoupled").system


def test_grid_spec():
    g = oracle.GridSpec(33, 65, 2.0, 4.0, 1.0, -1.0)
    assert g.hx == pytest.approx(0.125) and g.hy == pytest.approx(0.125)
    assert g.x[0] == pytest.approx(-1.0) and g.y[-1] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        oracle.GridSpec(16, 64, 1.0, 1.0)
    with pytest.raises(ValueError):
        oracle.GridField(np.full((33, 65), np.nan), g)


def test_hermitian(rng):
    for name in ("charged", "tilted"):
        s = fixtures.get(name).system
        op = oracle.discretize(s, oracle.default_grid(s, 48, 6.0), check=False)
        for _ in range(5):
            f = oracle.GridField(rng.normal(size=(48, 48)) + 1j * rng.normal(size=(48, 48)), op.grid)
            g = oracle.GridField(rng.normal(size=(48, 48)) + 1j * rng.normal(size=(48, 48)), op.grid)
            lhs = f.inner(op.apply(g))
            rhs = op.apply(f).inner(g)
            assert abs(lhs - rhs) < 1e-12 * f.norm() * g.norm()


def test_real_symmetric_without_field():
    s = fixtures.get("fieldfree").system
    op = oracle.discretize(s, oracle.default_grid(s, 48, 6.0), check=False)
    H = op.matrix
    assert abs(H.imag).max() == 0
    assert abs(H - H.T).max() == 0


def test_kinetic_annihilates_constants():
    g = oracle.GridSpec(40, 40, 2.0, 2.0)
    op = oracle.build_operator(g, 1.0, 1.0, lambda X, Y: 0 * X)
    out = op.apply(oracle.GridField(np.ones((40, 40)), g)).values
    # rows away from the Dirichlet boundary
    assert np.max(np.abs(out[2:-2, 2:-2])) < 1e-10


def test_resolution_checks():
    s = decoupled()
    with pytest.raises(ResolutionError):
        oracle.discretize(s, oracle.GridSpec(64, 64, 4.0, 8.0))   # too narrow in x
    with pytest.raises(ResolutionError):
        oracle.discretize(s, oracle.GridSpec(40, 40, 8.0, 8.0))   # too coarse


def test_decoupled_ground_energy():
    s = decoupled()
    op = oracle.discretize(s, oracle.GridSpec(128, 128, 8.0, 8.0))
    res = oracle.lowest_eigenpairs(op, 4)
    assert res.energies[0] == pytest.approx(1.0, abs=1e-4)
    assert np.allclose(res.energies[1:3], 2.0, atol=1e-4)
    assert np.all(res.residuals < 1e-8)


def test_generic_fixture_and_ground_overlap():
    s = fixtures.get("aniso").system
    m = solve_modes(s)
    form = system_ground_form(s, m)
    op = oracle.discretize(s, oracle.default_grid(s))
    res = oracle.lowest_eigenpairs(op, 4)
    ana = [e for _, _, e in lowest_planar(m, 1.0, 4)]
    assert np.allclose(res.energies, ana, rtol=1e-3)
    psi = oracle.GridField.sample(ground_state(form), op.grid)
    assert abs(res.fields[0].inner(psi)) > 0.9999
    for E, f in res.pairs():
        r = op.apply(f).values - E * f.values
        assert np.linalg.norm(r) * math.sqrt(op.grid.weight) / f.norm() < 1e-8


def test_against_scipy_eigsh():
    s = fixtures.get("reversed").system
    op = oracle.discretize(s, oracle.default_grid(s, 48, 6.0), check=False)
    ours = oracle.lowest_eigenpairs(op, 5).energies
    ref = np.sort(spla.eigsh(op.matrix, k=5, sigma=op.lower_bound() - 1.0, which="LM")[0])
    assert np.allclose(ours, ref, rtol=1e-10)


def test_eigensolver_limits():
    s = decoupled()
    op = oracle.discretize(s, oracle.GridSpec(64, 64, 6.0, 6.0), check=False)
    with pytest.raises(ValueError):
        oracle.lowest_eigenpairs(op, 9)
    with pytest.raises(ConvergenceFailure):
        oracle.lowest_eigenpairs(op, 4, max_solves=8, tol=1e-14)


def _ground_error(n, order):
    g = oracle.GridSpec(n, n, 8.0, 8.0)
    op = oracle.discretize(decoupled(), g, order=order, check=False)
    return oracle.lowest_eigenpairs(op, 1).energies[0] - 1.0


def test_richardson_second_order():
    ratio = _ground_error(49, 2) / _ground_error(97, 2)
    assert 3.6 < ratio < 4.4


def test_richardson_fourth_order():
    ratio = _ground_error(49, 4) / _ground_error(97, 4)
    assert 13.0 < ratio < 19.0


def test_gauge_term_expectation():
    s = fixtures.get("aniso").system
    m = solve_modes(s)
    form = system_ground_form(s, m)
    errs = []
    for n in (64, 128):
        g = oracle.default_grid(s, n, 8.0)
        op = oracle.discretize(s, g, order=2, check=False)
        psi = oracle.GridField.sample(ground_state(form), g)
        errs.append(abs(op.expectation(psi) - planar_levels(m, LevelIndex(), 1.0).value))
    assert errs[1] < 0.3 * errs[0]
    assert errs[1] < 1e-2


def test_lab_frame_energies_include_offsets():
    s = fixtures.get("charged").system
    from chargedosc.params import center_shift
    sh = center_shift(s)
    op = oracle.discretize(s, oracle.default_grid(s, center=(sh.x0, sh.y0)), frame="lab")
    num = oracle.lowest_eigenpairs(op, 2).energies
    m = solve_modes(s)
    offset = sum(v for n, v in sh.contributions if n != "electric_z")
    assert num[0] == pytest.approx(0.5 * (m.sigma1 + m.sigma2) + offset, rel=1e-3)


def test_stationary_state_propagation():
    s = fixtures.get("reversed").system
    op = oracle.discretize(s, oracle.default_grid(s, 64, 6.0))
    res = oracle.lowest_eigenpairs(op, 1, tol=1e-11)
    pr = oracle.propagate(op, res.fields[0], 0.01, 1000, record_every=50)
    assert np.max(np.abs(pr.means - pr.means[0])) < 1e-8
    assert pr.max_norm_drift < 1e-10


def test_long_run_norm():
    s = decoupled()
    g = oracle.GridSpec(48, 48, 6.0, 6.0)
    op = oracle.discretize(s, g, check=False)
    psi = oracle.GridField.sample(lambda x, y: np.exp(-((x - 1) ** 2 + y**2) / 2 + 0.5j * y), g).normalized()
    pr = oracle.propagate(op, psi, 0.01, 10_000, record_every=1000, track_moments=False)
    assert abs(pr.norms[-1] - 1.0) < 1e-6
    assert pr.max_norm_drift < 1e-10


def test_solver_stall():
    s = decoupled()
    g = oracle.GridSpec(32, 32, 6.0, 6.0)
    op = oracle.discretize(s, g, check=False)
    psi = oracle.GridField.sample(lambda x, y: np.exp(-(x**2 + y**2) / 2), g).normalized()
    with pytest.raises(SolverStall):
        oracle.propagate(op, psi, 0.01, 2, tol=1e-30, max_refine=1)


def test_solve_1d_oscillator():
    E, f = oracle.solve_1d(lambda x: 0.5 * x**2, oracle.Grid1D(1001, 10.0), 3)
    assert E[0] == pytest.approx(0.5, abs=1e-6)
    assert E[2] == pytest.approx(2.5, abs=1e-6)
    assert np.sum(f[0] ** 2) * 0.02 == pytest.approx(1.0, abs=1e-10)


def test_solve_1d_shifted_center_parity():
    s = fixtures.get("landau").system
    df = derive(s)
    k = fixtures.get("landau").k
    from chargedosc.states import landau_center
    xk = landau_center(s, k)
    V = lambda x: (k - 2 * df.omega_B * x) ** 2 / 2 + 0.5 * x**2 - s.charge * s.E_x * x
    E, f = oracle.solve_1d(V, oracle.Grid1D(1601, 10.0, xk), 2)
    assert np.max(np.abs(f[0] - f[0][::-1])) < 1e-8
    assert np.max(np.abs(f[1] + f[1][::-1])) < 1e-8


def test_rk4_matches_matrix_exponential():
    m = solve_modes(fixtures.get("aniso").system)
    x0 = np.array([0.2, -0.1, 0.4, 0.3])
    out = oracle.rk4(m.omega, x0, [0.0, 1.0, 2.5])
    assert np.allclose(out[-1], expm(m.omega * 2.5) @ x0, atol=1e-12)


def test_annihilation_residual_small_grid():
    s = fixtures.get("aniso").system
    m = solve_modes(s)
    form = system_ground_form(s, m)
    res = oracle.annihilation_residuals(m, form, oracle.default_grid(s, 64))
    assert max(res) < 1e-8
    # an excited state is not annihilated
    g = oracle.default_grid(s, 64)
    psi = oracle.GridField.sample(eigenstate(m, 1, 0, form), g).values
    dx, dy = oracle.spectral_gradient(psi, g)
    X, Y = g.mesh()
    xi, eta = m.xi[0], m.eta[0]
    out = xi[0] * X * psi + xi[1] * Y * psi - 1j * (eta[0] * dx + eta[1] * dy)
    assert np.linalg.norm(out) > 0.1 * np.linalg.norm(psi)


def test_gaussian_from_covariance_round_trip():
    s = fixtures.get("charged").system
    m = solve_modes(s)
    form = system_ground_form(s, m)
    cov = moments(ground_state(form)).covariance
    lam, psi = oracle.gaussian_from_covariance(cov, s.hbar)
    assert np.allclose(lam, form.Lambda, atol=1e-12)
    assert np.allclose(moments(psi).covariance, cov, atol=1e-12)


def test_grid_squeeze_matches_covariance_gaussian():
    from chargedosc.dynamics import SqueezeSpec, squeezed_covariance
    s = fixtures.get("reversed").system
    m = solve_modes(s)
    form = system_ground_form(s, m)
    op = oracle.discretize(s, oracle.default_grid(s, 96, 8.0))
    zetas = (0.2 - 0.1j, 0.3j)
    sq = oracle.squeeze_on_grid(oracle.GridField.sample(ground_state(form), op.grid), zetas, m, op)
    _, ref = oracle.gaussian_from_covariance(squeezed_covariance(SqueezeSpec(*zetas), m, s.hbar), s.hbar)
    ref = oracle.GridField.sample(ref, op.grid)
    assert abs(abs(ref.inner(sq)) - 1.0) < 1e-4
    assert sq.norm() == pytest.approx(1.0, abs=1e-8)
