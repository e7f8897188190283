"""Wave functions: 1D oscillator functions, the planar Gaussian ground state and
ladder-generated excited states held exactly as polynomial x Gaussian.

A planar state is ``N0 * P(x~, y~) * exp(-x~^T Lambda x~ / 2 hbar)`` where
``P`` is a bivariate polynomial. Ladder operators, position and momentum
operators all map this family into itself, and inner products reduce to
Gaussian moments, so everything here is closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite
from scipy.signal import convolve2d

from .errors import NonNormalizable
from .normal_modes import NormalModes
from .params import (Configuration, DerivedFrequencies, PhysicalSystem,
                     center_shift, classify, derive, landau_frame)

MAX_DEGREE = 32


# ------------------------------------------------------------------ 1D


def hermite_function(n: int, x, omega: float, M: float = 1.0, hbar: float = 1.0, center: float = 0.0):
    """Normalized oscillator eigenfunction ``psi_n(x - center)``.

    Uses the three-term recurrence of the normalized functions, so no
    factorials or large Hermite coefficients appear.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    scale = math.sqrt(M * omega / hbar)
    xi = scale * (np.asarray(x, dtype=float) - center)
    prev = np.zeros_like(xi)
    cur = (M * omega / (math.pi * hbar)) ** 0.25 * np.exp(-0.5 * xi**2)
    for m in range(n):
        prev, cur = cur, math.sqrt(2.0 / (m + 1)) * xi * cur - math.sqrt(m / (m + 1)) * prev
    return cur


@dataclass(frozen=True)
class Hermite1D:
    n: int
    omega: float
    M: float = 1.0
    hbar: float = 1.0
    center: float = 0.0

    def __call__(self, x):
        return hermite_function(self.n, x, self.omega, self.M, self.hbar, self.center)


# ------------------------------------------------------------------ Gaussian


@dataclass(frozen=True)
class GaussianForm:
    """``exp(-x~^T Lambda x~ / 2 hbar)`` with ``x~ = (x - x0, y - y0)``."""

    Lambda: np.ndarray
    hbar: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        lam = np.asarray(self.Lambda, dtype=complex)
        object.__setattr__(self, "Lambda", 0.5 * (lam + lam.T))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def real_part(self) -> np.ndarray:
        return self.Lambda.real

    def check_normalizable(self):
        if np.any(np.linalg.eigvalsh(self.real_part) <= 0):
            raise NonNormalizable("real part of the quadratic form is not positive definite")

    @property
    def lambda_x(self) -> float:
        return math.sqrt(self.Lambda[0, 0].real / self.hbar)

    @property
    def lambda_y(self) -> float:
        return math.sqrt(self.Lambda[1, 1].real / self.hbar)

    @property
    def lambda_xy(self) -> float:
        return self.Lambda[0, 1].imag / self.hbar

    @property
    def N0(self) -> float:
        """Normalization constant; ``sqrt(lambda_x lambda_y / pi)`` for a diagonal real part."""
        self.check_normalizable()
        return float(np.linalg.det(self.real_part / self.hbar) ** 0.25 / math.sqrt(math.pi))

    def exponent(self, xt, yt):
        L = self.Lambda
        return -(L[0, 0] * xt**2 + 2.0 * L[0, 1] * xt * yt + L[1, 1] * yt**2) / (2.0 * self.hbar)

    @property
    def principal_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Rotation ``R`` and scales ``s`` with ``Re(Lambda)/hbar = R^T diag(s^2) R``."""
        A = self.real_part / self.hbar
        if abs(A[0, 1]) <= 1e-14 * max(abs(A[0, 0]), abs(A[1, 1])):
            R, kappa = np.eye(2), np.array([A[0, 0], A[1, 1]])
        else:
            kappa, vecs = np.linalg.eigh(A)
            R = vecs.T
        if np.any(kappa <= 0):
            raise NonNormalizable("real part of the quadratic form is not positive definite")
        return R, np.sqrt(kappa)


def ground_form(df: DerivedFrequencies, sigmas, M: float, hbar: float,
                tilted: bool = False, center=(0.0, 0.0)) -> GaussianForm:
    """Quadratic form of the planar ground state.

    For the tilted field every ``omega_y`` becomes ``tilde_omega_2`` and the
    Landau gauge changes the imaginary coupling.
    """
    s1, s2 = sigmas
    wx = df.omega_x
    wy = df.tilde_omega_2 if tilted else df.omega_y
    lxx = M * wx * (s1 + s2) / (wx + wy)
    lyy = M * wy * (s1 + s2) / (wx + wy)
    if tilted:
        lxy = -2.0 * M * df.omega_B * wy / (wx + wy)
    else:
        lxy = M * df.omega_B * (wx - wy) / (wx + wy)
    lam = np.array([[lxx, 1j * lxy], [1j * lxy, lyy]])
    return GaussianForm(lam, hbar, center)


def form_from_modes(modes: NormalModes, hbar: float, center=(0.0, 0.0)) -> GaussianForm:
    """``Lambda = i eta^{-1} xi``: the form annihilated by both lowering operators."""
    lam = 1j * np.linalg.solve(modes.eta, modes.xi)
    return GaussianForm(lam, hbar, center)


def system_ground_form(system: PhysicalSystem, modes: NormalModes, lab_frame: bool = False) -> GaussianForm:
    """Ground form for a Generic or TiltedB system (optionally centred in the lab frame, k = 0)."""
    tag = classify(system)
    tilted = tag.kind is Configuration.TILTED_B
    center = (0.0, 0.0)
    if lab_frame:
        shift = center_shift(system, tag)
        df = derive(system)
        y0 = shift.y0 if not tilted else system.charge * system.E_y / (system.mass * df.tilde_omega_2**2)
        center = (shift.x0 or 0.0, y0 or 0.0)
    return ground_form(derive(system), modes.sigmas, system.mass, system.hbar, tilted, center)


# ------------------------------------------------------------------ polynomial states
#
# The polynomial factor is expanded in products of scaled Hermite polynomials
# phi_i(t1) phi_j(t2), phi_n = H_n / sqrt(2^n n!), with t = diag(s) R x~ the
# principal coordinates of the Gaussian weight |exp(-s)|^2 = exp(-t.t). These
# are orthogonal under that weight, so inner products are plain coefficient
# sums and no cancellation builds up at high degree.


def _trim(c):
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    nz = np.nonzero(c)
    if len(nz[0]) == 0:
        return np.zeros((1, 1), dtype=complex)
    return c[: nz[0].max() + 1, : nz[1].max() + 1]


def _add(*terms):
    nx = max(t.shape[0] for t in terms)
    ny = max(t.shape[1] for t in terms)
    out = np.zeros((nx, ny), dtype=complex)
    for t in terms:
        out[: t.shape[0], : t.shape[1]] += t
    return out


def _times_t(c, axis):
    """Multiply by the principal coordinate t_axis."""
    c = np.moveaxis(c, axis, 0)
    n = np.arange(c.shape[0])[:, None]
    out = np.zeros((c.shape[0] + 1,) + c.shape[1:], dtype=complex)
    out[1:] += np.sqrt((n + 1) / 2.0) * c
    out[:-2] += np.sqrt(n[1:] / 2.0) * c[1:]
    return np.moveaxis(out, 0, axis)


def _d_dt(c, axis):
    c = np.moveaxis(c, axis, 0)
    if c.shape[0] == 1:
        return np.zeros((1, 1), dtype=complex)
    n = np.arange(1, c.shape[0])[:, None]
    out = np.sqrt(2.0 * n) * c[1:]
    return np.moveaxis(out, 0, axis)


def _hermite_table(t, degree):
    """phi_0..phi_degree evaluated at t (stacked along the first axis)."""
    t = np.asarray(t, dtype=float)
    out = np.empty((degree + 1,) + t.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = math.sqrt(2.0) * t
    for n in range(1, degree):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * t * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


@dataclass(frozen=True)
class PolyGaussianState:
    """``N0 P(x~, y~) exp(-s)`` with ``P`` held in the Hermite basis of the form.

    ``coeffs[i, j]`` multiplies ``phi_i(t1) phi_j(t2)``; use
    :meth:`monomial_coefficients` for the plain power-series coefficients.
    """

    coeffs: np.ndarray
    form: GaussianForm
    quantum_numbers: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @property
    def degree(self) -> int:
        nz = np.argwhere(self.coeffs != 0)
        return int(nz.sum(axis=1).max()) if len(nz) else 0

    @property
    def hbar(self) -> float:
        return self.form.hbar

    def with_coeffs(self, coeffs, quantum_numbers=None) -> "PolyGaussianState":
        return PolyGaussianState(coeffs, self.form, quantum_numbers)

    def __call__(self, x, y):
        x0, y0 = self.form.center
        xt = np.asarray(x, dtype=float) - x0
        yt = np.asarray(y, dtype=float) - y0
        R, s = self.form.principal_axes
        t1 = s[0] * (R[0, 0] * xt + R[0, 1] * yt)
        t2 = s[1] * (R[1, 0] * xt + R[1, 1] * yt)
        h1 = _hermite_table(t1, self.coeffs.shape[0] - 1)
        h2 = _hermite_table(t2, self.coeffs.shape[1] - 1)
        poly = np.einsum("ij,i...,j...->...", self.coeffs, h1, h2)
        return self.form.N0 * poly * np.exp(self.form.exponent(xt, yt))

    def monomial_coefficients(self) -> np.ndarray:
        """Coefficients ``m[a, b]`` of ``x~**a y~**b`` in the polynomial factor."""
        R, s = self.form.principal_axes
        deg = self.coeffs.shape[0] + self.coeffs.shape[1]
        axis_polys = []
        for b in range(2):
            lin = np.zeros((2, 2))
            lin[1, 0], lin[0, 1] = s[b] * R[b, 0], s[b] * R[b, 1]
            powers = [np.ones((1, 1))]
            for _ in range(deg):
                powers.append(convolve2d(powers[-1], lin))
            polys = []
            for n in range(self.coeffs.shape[b]):
                basis = np.zeros(n + 1)
                basis[n] = 1.0
                h = hermite.herm2poly(basis) / math.sqrt(2.0**n * math.factorial(n))
                polys.append(_add(*[h[k] * powers[k] for k in range(n + 1)]))
            axis_polys.append(polys)
        terms = [self.coeffs[i, j] * convolve2d(axis_polys[0][i], axis_polys[1][j])
                 for i in range(self.coeffs.shape[0]) for j in range(self.coeffs.shape[1])
                 if self.coeffs[i, j] != 0]
        return _trim(_add(*terms)) if terms else np.zeros((1, 1), dtype=complex)

    # -- canonical operators, each returning the polynomial factor of X_a psi

    def _coord(self, c, a):
        # x~_a = sum_b R[b, a] t_b / s_b
        R, s = self.form.principal_axes
        return _add(*[R[b, a] / s[b] * _times_t(c, b) for b in range(2) if R[b, a] != 0])

    def _partial(self, c, a):
        R, s = self.form.principal_axes
        return _add(*[R[b, a] * s[b] * _d_dt(c, b) for b in range(2) if R[b, a] != 0])

    def _p(self, a):
        # p (P G) = -i hbar (dP - P (Lambda x~)_a / hbar) G
        L = self.form.Lambda
        c = self.coeffs
        grad_s = _add(*[L[a, b] * self._coord(c, b) for b in range(2) if L[a, b] != 0]) / self.hbar
        return -1j * self.hbar * _add(self._partial(c, a), -grad_s)

    def canonical(self, alpha: int) -> "PolyGaussianState":
        """Apply X_alpha for alpha in 0..3 = (x~, p_x, y~, p_y)."""
        if alpha in (0, 2):
            out = self._coord(self.coeffs, alpha // 2)
        else:
            out = self._p(alpha // 2)
        return self.with_coeffs(out)

    def apply_linear(self, c) -> "PolyGaussianState":
        """Apply ``c . X`` for a complex 4-vector ``c``."""
        terms = [c[a] * self.canonical(a).coeffs for a in range(4) if c[a] != 0]
        if not terms:
            return self.with_coeffs(np.zeros((1, 1)))
        return self.with_coeffs(_add(*terms))

    def apply_quadratic(self, matrix) -> "PolyGaussianState":
        """Apply ``X^T matrix X / 2`` (e.g. the Hamiltonian)."""
        firsts = [self.canonical(b) for b in range(4)]
        terms = []
        for a in range(4):
            for b in range(4):
                if matrix[a, b] != 0:
                    terms.append(0.5 * matrix[a, b] * firsts[b].canonical(a).coeffs)
        return self.with_coeffs(_add(*terms))

    def inner(self, other: "PolyGaussianState") -> complex:
        """``<self|other>``; both states must share the Gaussian form."""
        _check_same_form(self.form, other.form)
        a, b = self.coeffs, other.coeffs
        nx, ny = min(a.shape[0], b.shape[0]), min(a.shape[1], b.shape[1])
        return complex(np.vdot(a[:nx, :ny], b[:nx, :ny]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def _check_same_form(a: GaussianForm, b: GaussianForm):
    if a is b:
        return
    if not (np.allclose(a.Lambda, b.Lambda, rtol=1e-13, atol=0) and a.center == b.center and a.hbar == b.hbar):
        raise ValueError("states carry different Gaussian forms")


def ground_state(form: GaussianForm) -> PolyGaussianState:
    form.check_normalizable()
    return PolyGaussianState(np.ones((1, 1)), form, (0, 0))


def apply_raising(state: PolyGaussianState, mode: int, modes: NormalModes,
                  normalize: bool = True) -> PolyGaussianState:
    """``a_mode^dagger`` (mode is 1 or 2); divides by sqrt(n+1) when ``normalize``."""
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    out = state.apply_linear(modes.u[mode - 1].conj() / math.sqrt(state.hbar))
    qn = state.quantum_numbers
    new_qn = None
    if qn is not None:
        n = list(qn)
        n[mode - 1] += 1
        new_qn = tuple(n)
        if normalize:
            out = out.with_coeffs(out.coeffs / math.sqrt(n[mode - 1]))
    if out.degree > MAX_DEGREE:
        raise ValueError(f"polynomial degree above the cap of {MAX_DEGREE}")
    return out.with_coeffs(out.coeffs, new_qn)


def apply_lowering(state: PolyGaussianState, mode: int, modes: NormalModes) -> PolyGaussianState:
    return state.apply_linear(modes.u[mode - 1] / math.sqrt(state.hbar))


def eigenstate(modes: NormalModes, n1: int, n2: int, form: GaussianForm) -> PolyGaussianState:
    """``(a1^+)^n1 (a2^+)^n2 |00> / sqrt(n1! n2!)``; a2^+ is applied first."""
    if n1 + n2 > MAX_DEGREE:
        raise ValueError(f"n1 + n2 above the cap of {MAX_DEGREE}")
    state = ground_state(form)
    for _ in range(n2):
        state = apply_raising(state, 2, modes)
    for _ in range(n1):
        state = apply_raising(state, 1, modes)
    return state


@dataclass(frozen=True)
class Moments:
    means: np.ndarray
    covariance: np.ndarray
    deltas: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "deltas", np.sqrt(np.clip(np.diag(self.covariance), 0, None)))

    @property
    def uncertainty_products(self) -> tuple[float, float]:
        d = self.deltas
        return d[0] * d[1], d[2] * d[3]


def moments(state: PolyGaussianState) -> Moments:
    """Means and symmetrized covariance of (x~, p_x, y~, p_y)."""
    state.form.check_normalizable()
    norm2 = state.inner(state).real
    applied = [state.canonical(a) for a in range(4)]
    means = np.array([state.inner(applied[a]).real for a in range(4)]) / norm2
    cov = np.empty((4, 4))
    for a in range(4):
        for b in range(a, 4):
            cov[a, b] = cov[b, a] = applied[a].inner(applied[b]).real / norm2 - means[a] * means[b]
    return Moments(means, cov)


def energy_expectation(state: PolyGaussianState, matrix) -> float:
    applied = [state.canonical(a) for a in range(4)]
    total = 0.0
    for a in range(4):
        for b in range(4):
            if matrix[a, b] != 0:
                total += 0.5 * matrix[a, b] * applied[a].inner(applied[b]).real
    return total / state.inner(state).real


def ground_uncertainty_product(form: GaussianForm) -> float:
    """Closed form ``(hbar/2) sqrt(1 + lambda_xy^2 / (lambda_x^2 lambda_y^2))``."""
    return 0.5 * form.hbar * math.sqrt(1.0 + form.lambda_xy**2 / (form.lambda_x**2 * form.lambda_y**2))


# ------------------------------------------------------------------ separable pieces


def landau_wavefunction(system: PhysicalSystem, n1: int, k: float, x, y):
    """Plane wave along the free axis times a shifted oscillator function.

    Uses the gauge ``A = (0, B x', 0)`` in the frame where the free axis is y'.
    """
    tag = classify(system)
    s = landau_frame(system, tag)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if tag.swapped_axes:
        x, y = y, x
    elif tag.kind is Configuration.BOTH_PLANAR_FREE:
        c, sn = math.cos(tag.rotation_angle), math.sin(tag.rotation_angle)
        x, y = c * x + sn * y, -sn * x + c * y
    df = derive(s)
    w1 = df.tilde_omega_1
    xk = (s.charge * s.E_x + 2.0 * k * s.hbar * df.omega_B) / (s.mass * w1**2)
    return np.exp(1j * k * y) / math.sqrt(2.0 * math.pi) * hermite_function(n1, x, w1, s.mass, s.hbar, xk)


def landau_center(system: PhysicalSystem, k: float) -> float:
    s = landau_frame(system)
    df = derive(s)
    return (s.charge * s.E_x + 2.0 * k * s.hbar * df.omega_B) / (s.mass * df.tilde_omega_1**2)


def z_wavefunction(system: PhysicalSystem, n3: int, z):
    if system.omega_z <= 0:
        raise ValueError("z_wavefunction needs omega_z > 0")
    z0 = system.charge * system.E_z / (system.mass * system.omega_z**2)
    return hermite_function(n3, z, system.omega_z, system.mass, system.hbar, z0)
