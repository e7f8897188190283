"""Normal modes of the reduced planar Hamiltonian.

Phase-space vectors are ordered ``X = (x~, p_x, y~, p_y)`` and the quadratic
Hamiltonian is ``H = X^T Hm X / 2`` with a real symmetric 4x4 ``Hm``. The
evolution matrix ``Omega = i Sigma_y Hm`` generates ``dX/dt = Omega X``.
Left eigenvectors are taken from closed-form expressions; a general numeric
eigensolver is only used by the tests as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMode, NormalizationFailure, ZeroMode
from .params import (Configuration, DerivedFrequencies, PhysicalSystem,
                     classify, derive)

PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_Y = np.kron(np.eye(2), PAULI_Y)
SIGMA_Z = np.kron(np.eye(2), PAULI_Z)
#: canonical commutator pattern of A = (a1, a1+, a2, a2+)
LADDER_COMMUTATOR = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))

DEGENERATE_REL_TOL = 1e-10
DEGENERATE_FIELD_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticHamiltonian:
    matrix: np.ndarray
    kind: Configuration = Configuration.GENERIC

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("Hamiltonian matrix must be 4x4")
        scale = max(np.max(np.abs(m)), 1e-300)
        if np.max(np.abs(m - m.T)) > 1e-14 * scale:
            raise ValueError("Hamiltonian matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    def energy(self, X) -> float:
        X = np.asarray(X, dtype=float)
        return 0.5 * float(X @ self.matrix @ X)


def build_hamiltonian_generic(df: DerivedFrequencies, M: float) -> QuadraticHamiltonian:
    """Symmetric-gauge planar Hamiltonian.

    ``(p_x^2 + p_y^2)/2M + M w1^2 x~^2/2 + M w2^2 y~^2/2 - wB (x~ p_y - y~ p_x)``
    """
    h = np.zeros((4, 4))
    h[0, 0] = M * df.omega_1**2
    h[1, 1] = 1.0 / M
    h[2, 2] = M * df.omega_2**2
    h[3, 3] = 1.0 / M
    h[0, 3] = h[3, 0] = -df.omega_B
    h[1, 2] = h[2, 1] = df.omega_B
    return QuadraticHamiltonian(h, Configuration.GENERIC)


def build_hamiltonian_tilted(df: DerivedFrequencies, M: float) -> QuadraticHamiltonian:
    """Landau-gauge Hamiltonian of the tilted field, single ``-2 wB x~ p_y`` coupling."""
    h = np.zeros((4, 4))
    h[0, 0] = M * df.tilde_omega_1**2
    h[1, 1] = 1.0 / M
    h[2, 2] = M * df.tilde_omega_2**2
    h[3, 3] = 1.0 / M
    h[0, 3] = h[3, 0] = -2.0 * df.omega_B
    return QuadraticHamiltonian(h, Configuration.TILTED_B)


def omega_matrix(hamiltonian: QuadraticHamiltonian) -> np.ndarray:
    omega = 1j * SIGMA_Y @ hamiltonian.matrix
    return np.real_if_close(omega).astype(float)


def _roots_from_bc(b, c, sqrt_delta):
    if c <= 0 or b <= 0:
        raise ZeroMode("a normal-mode frequency vanishes (omega_x = 0 or omega_y = 0); "
                       "the ladder-operator construction does not apply")
    s1_sq = 0.5 * (b + sqrt_delta)
    return math.sqrt(s1_sq), math.sqrt(c / s1_sq)


def characteristic_roots(omega: np.ndarray, tol: float = 1e-14) -> tuple[float, float]:
    """Normal-mode frequencies from the biquadratic ``l^4 + b l^2 + c``.

    ``b`` is the sum of the 2x2 principal minors of ``omega`` and ``c`` its
    determinant.
    """
    omega = np.asarray(omega, dtype=float)
    b = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            b += omega[i, i] * omega[j, j] - omega[i, j] * omega[j, i]
    c = float(np.linalg.det(omega))
    if c <= tol * max(b * b, 1e-300):
        raise ZeroMode("characteristic polynomial has a zero root (c <= 0)")
    delta = max(b * b - 4.0 * c, 0.0)
    return _roots_from_bc(b, c, math.sqrt(delta))


def mode_frequencies(omega_x: float, omega_y: float, omega_B: float) -> tuple[float, float]:
    """sigma1 >= sigma2 from trap frequencies and the Larmor-type frequency.

    ``omega_y`` is the effective y frequency (``tilde_omega_2`` for the tilted field).
    """
    wx2, wy2, wb2 = omega_x**2, omega_y**2, omega_B**2
    b = wx2 + wy2 + 4.0 * wb2
    c = wx2 * wy2
    delta = (wx2 - wy2) ** 2 + 8.0 * wb2 * (wx2 + wy2 + 2.0 * wb2)
    if c <= 0:
        raise ZeroMode("omega_x = 0 or omega_y = 0: one normal-mode frequency is zero")
    return _roots_from_bc(b, c, math.sqrt(delta))


def _sigma_sq_minus_wy_sq(omega_x, omega_y, omega_B):
    """(sigma_i^2 - omega_y^2) for i = 1, 2 without cancellation.

    The two values are ``(d + 4 wB^2 +- sqrt(Delta))/2`` with ``d = wx^2 - wy^2``;
    their product is ``-4 wB^2 wy^2``.
    """
    wx2, wy2, wb2 = omega_x**2, omega_y**2, omega_B**2
    d = wx2 - wy2 + 4.0 * wb2
    sq = math.sqrt((wx2 - wy2) ** 2 + 8.0 * wb2 * (wx2 + wy2 + 2.0 * wb2))
    prod = -4.0 * wb2 * wy2
    if d >= 0:
        r1 = 0.5 * (d + sq)
        r2 = prod / r1 if r1 != 0 else 0.0
    else:
        r2 = 0.5 * (d - sq)
        r1 = prod / r2
    return r1, r2


def gauge_shear(omega_B: float, M: float) -> np.ndarray:
    """Symplectic map X_symmetric = T X_landau between the two gauges."""
    T = np.eye(4)
    T[1, 2] = -M * omega_B
    T[3, 0] = -M * omega_B
    return T


def _pure_axis_mode(M, omega, axis):
    u = np.zeros(4, dtype=complex)
    u[2 * axis] = -1j * M * omega
    u[2 * axis + 1] = 1.0
    return u / math.sqrt(2.0 * M * omega)


def left_eigenvectors(omega_x: float, omega_y: float, omega_B: float,
                      sigmas: tuple[float, float], M: float) -> np.ndarray:
    """Rows u1, u2 with ``u_i Omega = -i sigma_i u_i`` (symmetric gauge).

    Closed form with real positive normalization constants. When the field
    vanishes and a mode coincides with the bare y oscillation the formula is
    0/0; that mode is then the pure y mode.
    """
    r = _sigma_sq_minus_wy_sq(omega_x, omega_y, omega_B)
    rows = []
    decoupled = abs(omega_B) < DEGENERATE_FIELD_TOL
    y_taken = False
    for i, (sigma, ri) in enumerate(zip(sigmas, r)):
        if decoupled and abs(ri) < DEGENERATE_REL_TOL * max(sigma**2, omega_y**2):
            # isotropic and field free: both modes land here, y first then x
            rows.append(_pure_axis_mode(M, omega_x, 0) if y_taken else _pure_axis_mode(M, omega_y, 1))
            y_taken = True
            continue
        norm_sq = 2.0 * M * sigma * (ri * ri + 4.0 * omega_B**2 * omega_y**2)
        if norm_sq <= 0:
            raise DegenerateMode(f"mode {i + 1}: normalization constant is singular")
        K = 1.0 / math.sqrt(norm_sq)
        rows.append(K * np.array([
            -1j * M * sigma * (ri - 2.0 * omega_B**2),
            ri,
            M * omega_B * (ri + 2.0 * omega_y**2),
            2j * omega_B * sigma,
        ]))
    return np.array(rows)


@dataclass(frozen=True)
class NormalModes:
    """Normal-mode data; all arrays are complex except ``omega`` and ``hamiltonian``.

    ``u`` holds the left eigenvectors as rows, ``v`` the right ones as
    columns. ``epsilon[i] = +1`` means ``v_i = -Sigma_y u_i^dagger``.
    """

    sigma1: float
    sigma2: float
    u: np.ndarray
    v: np.ndarray
    Q: np.ndarray
    Q_inv: np.ndarray
    epsilon: tuple[int, int]
    hamiltonian: QuadraticHamiltonian
    omega: np.ndarray

    @property
    def sigmas(self) -> tuple[float, float]:
        return (self.sigma1, self.sigma2)

    @property
    def xi(self) -> np.ndarray:
        """Position coefficients of the annihilation operators (rows = modes)."""
        return self.u[:, [0, 2]]

    @property
    def eta(self) -> np.ndarray:
        """Momentum coefficients of the annihilation operators."""
        return self.u[:, [1, 3]]


def assemble(u: np.ndarray, hamiltonian: QuadraticHamiltonian,
             sigmas: tuple[float, float]) -> NormalModes:
    u = np.asarray(u, dtype=complex)
    omega = omega_matrix(hamiltonian)
    for i in range(2):
        res = u[i] @ omega + 1j * sigmas[i] * u[i]
        if np.max(np.abs(res)) > 1e-10 * max(1.0, np.max(np.abs(u[i])) * np.max(np.abs(omega))):
            raise NormalizationFailure(f"u_{i + 1} is not a left eigenvector (residual {np.max(np.abs(res)):.3g})")
    eps = []
    vs = []
    for i in range(2):
        w = u[i] @ SIGMA_Y
        quad = np.real(w @ hamiltonian.matrix @ w.conj()) / sigmas[i]
        e = 1 if quad > 0 else -1
        eps.append(e)
        vs.append(-e * SIGMA_Y @ u[i].conj())
    v = np.column_stack(vs)
    for i in range(2):
        if abs(u[i] @ v[:, i] - 1.0) > 1e-8:
            raise NormalizationFailure(f"u_{i + 1} v_{i + 1} = {u[i] @ v[:, i]} after sign fixing")
    Q = np.column_stack([v[:, 0], v[:, 0].conj(), v[:, 1], v[:, 1].conj()])
    Q_inv = np.vstack([u[0], u[0].conj(), u[1], u[1].conj()])
    return NormalModes(sigmas[0], sigmas[1], u, v, Q, Q_inv, tuple(eps), hamiltonian, omega)


def effective_omega_y(system: PhysicalSystem, kind: Configuration | None = None) -> float:
    kind = kind or classify(system).kind
    return derive(system).tilde_omega_2 if kind is Configuration.TILTED_B else system.omega_y


def solve_modes(system: PhysicalSystem, kind: Configuration | None = None) -> NormalModes:
    """Normal modes of the reduced Hamiltonian of a Generic or TiltedB system."""
    kind = kind or classify(system).kind
    df = derive(system)
    M = system.mass
    if kind is Configuration.GENERIC:
        hamiltonian = build_hamiltonian_generic(df, M)
        wy = system.omega_y
    elif kind is Configuration.TILTED_B:
        hamiltonian = build_hamiltonian_tilted(df, M)
        wy = df.tilde_omega_2
    else:
        raise ZeroMode(f"{kind.value} configuration has a zero normal-mode frequency; "
                       "no ladder-operator normal modes")
    sigmas = mode_frequencies(system.omega_x, wy, df.omega_B)
    u = left_eigenvectors(system.omega_x, wy, df.omega_B, sigmas, M)
    if kind is Configuration.TILTED_B:
        u = u @ gauge_shear(df.omega_B, M)
    return assemble(u, hamiltonian, sigmas)


def identity_residuals(modes: NormalModes) -> dict[str, float]:
    """Max-abs residuals of the structural identities of the normal modes."""
    u, v, Q, Qi = modes.u, modes.v, modes.Q, modes.Q_inv
    sig = np.diag([-1j * modes.sigma1, 1j * modes.sigma1, -1j * modes.sigma2, 1j * modes.sigma2])
    out = {
        "left_eigen": max(np.max(np.abs(u[i] @ modes.omega + 1j * modes.sigmas[i] * u[i])) for i in range(2)),
        "right_eigen": max(np.max(np.abs(modes.omega @ v[:, i] + 1j * modes.sigmas[i] * v[:, i])) for i in range(2)),
        "biorthonormal": float(np.max(np.abs(u @ v - np.eye(2)))),
        "conjugate_orthogonal": float(np.max(np.abs(u @ v.conj()))),
        "inverse": float(np.max(np.abs(Qi @ Q - np.eye(4)))),
        "diagonalization": float(np.max(np.abs(Qi @ modes.omega @ Q - sig))),
        "dagger_relation": float(np.max(np.abs(Q.conj().T + SIGMA_Z @ Qi @ SIGMA_Y))),
        "commutators": float(np.max(np.abs(Qi @ (-SIGMA_Y) @ Qi.T - LADDER_COMMUTATOR))),
        "hamiltonian": float(np.max(np.abs(Q.conj().T @ modes.hamiltonian.matrix @ Q
                                           - np.diag([modes.sigma1, modes.sigma1, modes.sigma2, modes.sigma2])))),
    }
    return {k: float(val) for k, val in out.items()}


def format_modes(modes: NormalModes) -> str:
    """Plain-text dump with 17 significant digits."""
    def fmt(z):
        z = complex(z)
        return f"{z.real:.17g}{z.imag:+.17g}j"

    lines = [f"sigma1 = {modes.sigma1:.17g}", f"sigma2 = {modes.sigma2:.17g}",
             f"epsilon = {modes.epsilon[0]:d},{modes.epsilon[1]:d}", "Omega ="]
    lines += ["  " + " ".join(f"{x:.17g}" for x in row) for row in modes.omega]
    lines.append("Q =")
    lines += ["  " + " ".join(fmt(x) for x in row) for row in modes.Q]
    lines.append("Q_inv =")
    lines += ["  " + " ".join(fmt(x) for x in row) for row in modes.Q_inv]
    lines.append("residuals =")
    lines += [f"  {k} = {val:.17g}" for k, val in identity_residuals(modes).items()]
    return "\n".join(lines) + "\n"
