import math
from functools import lru_cache

import numpy as np
import pytest
import sympy as sp
from scipy.integrate import trapezoid

from chargedosc import fixtures, oracle
from chargedosc.errors import NonNormalizable
from chargedosc.normal_modes import solve_modes
from chargedosc.params import PhysicalSystem, derive
from chargedosc.spectrum import LevelIndex, planar_levels
from chargedosc.states import (GaussianForm, apply_lowering, apply_raising, eigenstate, energy_expectation,
                               form_from_modes, ground_state, ground_uncertainty_product, hermite_function,
                               landau_wavefunction, moments, system_ground_form, z_wavefunction)

GENERIC = list(fixtures.GENERIC)


def setup(name):
    s = fixtures.get(name).system
    m = solve_modes(s)
    return s, m, system_ground_form(s, m)


def wick_inner(a, b, form):
    """<a|b> from monomial coefficients and Isserlis moments of the weight |G|^2."""
    C = 0.5 * form.hbar * np.linalg.inv(form.real_part)

    @lru_cache(maxsize=None)
    def mom(p, q):
        if p < 0 or q < 0:
            return 0.0
        if p == 0 and q == 0:
            return 1.0
        if p > 0:
            return (p - 1) * C[0, 0] * mom(p - 2, q) + q * C[0, 1] * mom(p - 1, q - 1)
        return (q - 1) * C[1, 1] * mom(p, q - 2)

    ma, mb = a.monomial_coefficients(), b.monomial_coefficients()
    total = 0j
    for (i, j), ca in np.ndenumerate(ma):
        if ca == 0:
            continue
        for (k, l), cb in np.ndenumerate(mb):
            if cb != 0:
                total += np.conj(ca) * cb * mom(i + k, j + l)
    return total


def test_hermite_norm_by_quadrature():
    x = np.linspace(-10, 10, 200)
    f = hermite_function(5, x, 1.0)
    assert trapezoid(f**2, x) == pytest.approx(1.0, abs=1e-10)


def test_hermite_against_polynomial_formula():
    x = np.linspace(-3, 3, 11)
    xs = sp.symbols("x")
    for n in range(8):
        expr = sp.hermite(n, xs) * sp.exp(-xs**2 / 2) / sp.sqrt(2**n * sp.factorial(n) * sp.sqrt(sp.pi))
        ref = np.array([float(expr.subs(xs, v)) for v in x])
        assert np.allclose(hermite_function(n, x, 1.0), ref, atol=1e-14)


def test_z_wavefunction():
    s = PhysicalSystem(mass=1.0, charge=1.0, omega_x=1.0, omega_y=1.0, omega_z=2.0, E_z=0.4)
    z0 = 0.1
    assert z_wavefunction(s, 0, z0) == pytest.approx((2.0 / math.pi) ** 0.25, rel=1e-15)
    assert abs(z_wavefunction(s, 3, z0)) < 1e-15
    z = np.linspace(z0 - 9, z0 + 9, 4001)
    assert trapezoid(z_wavefunction(s, 4, z) ** 2, z) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", GENERIC + list(fixtures.TILTED))
def test_closed_form_matches_mode_form(name):
    s, m, form = setup(name)
    assert np.allclose(form.Lambda, form_from_modes(m, s.hbar).Lambda, rtol=1e-13, atol=1e-14)


def test_limits_of_the_form():
    s, m, form = setup("fieldfree")
    assert form.lambda_x == pytest.approx(math.sqrt(s.omega_x), rel=1e-14)
    assert form.lambda_xy == 0.0
    s, m, form = setup("isotropic")
    assert form.lambda_x == pytest.approx(math.sqrt(derive(s).omega_1), rel=1e-14)
    assert abs(form.lambda_xy) < 1e-15


@pytest.mark.parametrize("name", GENERIC)
def test_gram_matrix(name):
    s, m, form = setup(name)
    idx = [(a, b) for a in range(4) for b in range(4) if a + b <= 3]
    states = [eigenstate(m, a, b, form) for a, b in idx]
    G = np.array([[x.inner(y) for y in states] for x in states])
    assert np.max(np.abs(G - np.eye(len(idx)))) < 1e-10
    W = np.array([[wick_inner(x, y, form) for y in states] for x in states])
    assert np.max(np.abs(W - np.eye(len(idx)))) < 1e-10


@pytest.mark.parametrize("name", ["aniso", "charged"])
def test_high_degree_norm(name):
    s, m, form = setup(name)
    st = eigenstate(m, 16, 16, form)
    assert st.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        eigenstate(m, 20, 13, form)


@pytest.mark.parametrize("name", GENERIC)
def test_energy_expectation_and_eigen_equation(name):
    s, m, form = setup(name)
    for a, b in [(0, 0), (1, 0), (0, 2), (2, 1)]:
        st = eigenstate(m, a, b, form)
        E = planar_levels(m, LevelIndex(a, b), s.hbar).value
        assert energy_expectation(st, m.hamiltonian.matrix) == pytest.approx(E, rel=1e-10)
        Hpsi = st.apply_quadratic(m.hamiltonian.matrix)
        diff = Hpsi.with_coeffs(Hpsi.coeffs - E * np.pad(st.coeffs, [(0, Hpsi.coeffs.shape[0] - st.coeffs.shape[0]),
                                                                    (0, Hpsi.coeffs.shape[1] - st.coeffs.shape[1])]))
        assert diff.norm() < 1e-10 * E


def test_ladder_algebra():
    s, m, form = setup("charged")
    g = ground_state(form)
    for i in (1, 2):
        assert apply_lowering(g, i, m).norm() < 1e-13
    st = eigenstate(m, 2, 1, form)
    lowered = apply_lowering(st, 1, m)
    ref = eigenstate(m, 1, 1, form)
    assert abs(abs(ref.inner(lowered)) - math.sqrt(2)) < 1e-12
    raised = apply_raising(ref, 1, m)
    assert abs(raised.inner(st) - 1) < 1e-12


def test_eq55_closed_form():
    s, m, form = setup("aniso")
    x, y = sp.symbols("x y", real=True)
    df = derive(s)
    lx2, ly2, lxy = form.lambda_x**2, form.lambda_y**2, form.lambda_xy
    wy, wB = s.omega_y, df.omega_B
    r = [sig**2 - wy**2 for sig in m.sigmas]
    K = [1 / math.sqrt(2 * s.mass * sig * (ri**2 + 4 * wB**2 * wy**2)) for sig, ri in zip(m.sigmas, r)]
    base = sp.exp(-lx2 * x**2 - ly2 * y**2)

    def D(i, f):
        return r[i] * sp.diff(f, x) - sp.I * 2 * wB * m.sigmas[i] * sp.diff(f, y)

    pts = np.random.default_rng(3).uniform(-1.5, 1.5, size=(10, 2))
    for n1, n2 in [(1, 0), (0, 1), (2, 1)]:
        f = base
        for _ in range(n2):
            f = D(1, f)
        for _ in range(n1):
            f = D(0, f)
        pref = (-sp.I) ** (n1 + n2) / sp.sqrt(sp.factorial(n1) * sp.factorial(n2)) * form.N0 * K[0] ** n1 * K[1] ** n2
        expr = pref * sp.exp(lx2 * x**2 / 2 + ly2 * y**2 / 2 - sp.I * lxy * x * y) * f
        fn = sp.lambdify((x, y), expr, "numpy")
        ref = np.array([complex(fn(a, b)) for a, b in pts])
        got = eigenstate(m, n1, n2, form)(pts[:, 0], pts[:, 1])
        assert np.max(np.abs(got - ref)) < 1e-10 * np.max(np.abs(ref))


def test_monomials_match_evaluation():
    s, m, form = setup("charged")
    st = eigenstate(m, 3, 2, form)
    mono = st.monomial_coefficients()
    pts = np.random.default_rng(5).uniform(-1, 1, size=(7, 2))
    poly = np.array([sum(c * px**a * py**b for (a, b), c in np.ndenumerate(mono)) for px, py in pts])
    direct = form.N0 * poly * np.exp(form.exponent(pts[:, 0], pts[:, 1]))
    assert np.allclose(st(pts[:, 0], pts[:, 1]), direct, rtol=1e-12, atol=1e-14)


def test_uncertainty_product():
    s, m, form = setup("aniso")
    mo = moments(ground_state(form))
    px, py = mo.uncertainty_products
    assert px == pytest.approx(ground_uncertainty_product(form), rel=1e-12)
    assert py == pytest.approx(px, rel=1e-12)
    assert px - 0.5 > 1e-3
    for name in ("fieldfree", "isotropic"):
        s, m, form = setup(name)
        px, py = moments(ground_state(form)).uncertainty_products
        assert abs(px - 0.5) < 1e-12 and abs(py - 0.5) < 1e-12


@pytest.mark.parametrize("name", ["aniso", "charged"])
def test_moments_against_grid_quadrature(name):
    s, m, form = setup(name)
    st = eigenstate(m, 1, 1, form)
    mo = moments(st)
    L = 10.0 / min(form.lambda_x, form.lambda_y)
    g = oracle.GridSpec(256, 256, L, L)
    psi = oracle.GridField.sample(st, g).values
    X, Y = g.mesh()
    dx, dy = oracle.spectral_gradient(psi, g)
    w = g.weight
    ops = [X * psi, -1j * dx, Y * psi, -1j * dy]
    means = np.array([np.real(np.vdot(psi, o)) * w for o in ops])
    cov = np.array([[np.real(np.vdot(a, b) + np.vdot(b, a)) / 2 * w for b in ops] for a in ops]) - np.outer(means, means)
    assert np.allclose(means, mo.means, atol=1e-6)
    assert np.allclose(cov, mo.covariance, atol=1e-6)
    assert np.sum(np.abs(psi) ** 2) * w == pytest.approx(1.0, abs=1e-6)


def test_non_normalizable():
    form = GaussianForm(np.array([[1.0, 0.0], [0.0, -0.5]]), 1.0)
    with pytest.raises(NonNormalizable):
        ground_state(form)


def test_landau_window_orthonormality():
    s = fixtures.get("landau").system
    Y = 40.0
    x = np.linspace(-10, 10, 801)
    y = np.linspace(-Y, Y, 4001)
    X, Yg = np.meshgrid(x, y, indexing="ij")

    def overlap(n, k, n2, k2):
        f = landau_wavefunction(s, n, k, X, Yg)
        g = landau_wavefunction(s, n2, k2, X, Yg)
        return trapezoid(trapezoid(np.conj(f) * g, y, axis=1), x)

    # same k: window length / 2 pi times the x overlap
    assert overlap(1, 0.5, 1, 0.5) == pytest.approx(Y / math.pi, rel=1e-6)
    assert abs(overlap(1, 0.5, 2, 0.5)) < 1e-6 * Y
    # nearby k: sinc envelope times the overlap of the shifted x parts
    k1, k2 = 0.5, 0.55
    xo = trapezoid(np.conj(landau_wavefunction(s, 0, k1, x, 0.0)) * landau_wavefunction(s, 0, k2, x, 0.0), x)
    env = math.sin((k2 - k1) * Y) / (math.pi * (k2 - k1))
    assert overlap(0, k1, 0, k2) == pytest.approx(env * xo * 2 * math.pi, rel=1e-6)
