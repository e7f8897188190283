"""Independent numerical ground truth on finite-difference grids.

The discrete Hamiltonian is

    H = -(hbar^2/2M) (Dxx + Dyy) + V(x, y) + sym(f_x p_x) + sym(f_y p_y)

with ``p = -i hbar D``, ``sym(f p) = (f p + p f)/2`` and central-difference
stencils of order 2 or 4. Wave functions vanish outside the grid (Dirichlet),
so every node carries the same quadrature weight ``hx*hy`` and the operator
is Hermitian for that inner product by construction.

Nothing here uses the closed-form eigenvectors; the analytic modules are only
consulted to size grids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, ResolutionError, SolverStall
from .params import Configuration, PhysicalSystem, classify, derive

logger = logging.getLogger(__name__)

_FIRST = {
    2: {-1: -0.5, 1: 0.5},
    4: {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12},
}
_SECOND = {
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    4: {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12},
}


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid ``x = cx + linspace(-Lx, Lx, nx)`` (same for y)."""

    nx: int
    ny: int
    Lx: float
    Ly: float
    cx: float = 0.0
    cy: float = 0.0

    def __post_init__(self):
        if self.nx < 32 or self.ny < 32:
            raise ValueError("grids need at least 32 points per axis")
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("half-widths must be positive")

    @property
    def hx(self) -> float:
        return 2.0 * self.Lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return 2.0 * self.Ly / (self.ny - 1)

    @property
    def x(self) -> np.ndarray:
        return self.cx + np.linspace(-self.Lx, self.Lx, self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.cy + np.linspace(-self.Ly, self.Ly, self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def weight(self) -> float:
        return self.hx * self.hy


@dataclass(frozen=True)
class GridField:
    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(self.grid.nx, self.grid.ny)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid field has non-finite entries")
        object.__setattr__(self, "values", v)

    def inner(self, other: "GridField") -> complex:
        return complex(np.vdot(self.values, other.values) * self.grid.weight)

    def norm(self) -> float:
        return math.sqrt(self.inner(self).real)

    def normalized(self) -> "GridField":
        return GridField(self.values / self.norm(), self.grid)

    @classmethod
    def sample(cls, func, grid: GridSpec) -> "GridField":
        X, Y = grid.mesh()
        return cls(func(X, Y), grid)


def _band(n, stencil, h, power):
    offsets = sorted(stencil)
    diags = [np.full(n - abs(o), stencil[o]) for o in offsets]
    return sp.diags(diags, offsets, shape=(n, n), format="csr") / h**power


@dataclass
class DiscreteHamiltonian:
    """Sparse grid Hamiltonian plus the pieces needed for moments."""

    matrix: sp.csr_matrix
    grid: GridSpec
    mass: float
    hbar: float
    Dx: sp.csr_matrix
    Dy: sp.csr_matrix
    Dxx: sp.csr_matrix
    Dyy: sp.csr_matrix
    origin: tuple[float, float] = (0.0, 0.0)
    order: int = 4
    label: str = ""
    bound: float = 0.0

    @property
    def size(self) -> int:
        return self.grid.nx * self.grid.ny

    def apply(self, field: GridField) -> GridField:
        return GridField(self.matrix @ field.values.ravel(), field.grid)

    def expectation(self, field: GridField) -> float:
        psi = field.values.ravel()
        return float(np.real(np.vdot(psi, self.matrix @ psi)) / np.real(np.vdot(psi, psi)))

    def lower_bound(self) -> float:
        """Lower bound of the continuum operator (minimum of V - M f^2/2)."""
        return self.bound


def build_operator(grid: GridSpec, mass: float, hbar: float, potential, fx=None, fy=None,
                   order: int = 4, origin=(0.0, 0.0), label: str = "") -> DiscreteHamiltonian:
    """Assemble ``p^2/2M + V + sym(fx p_x) + sym(fy p_y)`` on ``grid``.

    ``potential``, ``fx`` and ``fy`` are callables of the mesh arrays (X, Y).
    """
    if order not in _FIRST:
        raise ValueError("order must be 2 or 4")
    Ix, Iy = sp.identity(grid.nx, format="csr"), sp.identity(grid.ny, format="csr")
    Dx = sp.kron(_band(grid.nx, _FIRST[order], grid.hx, 1), Iy, format="csr")
    Dy = sp.kron(Ix, _band(grid.ny, _FIRST[order], grid.hy, 1), format="csr")
    Dxx = sp.kron(_band(grid.nx, _SECOND[order], grid.hx, 2), Iy, format="csr")
    Dyy = sp.kron(Ix, _band(grid.ny, _SECOND[order], grid.hy, 2), format="csr")
    X, Y = grid.mesh()
    V = np.asarray(potential(X, Y), dtype=float).ravel()
    H = (-(hbar**2) / (2.0 * mass)) * (Dxx + Dyy) + sp.diags(V)
    bound_terms = V.copy()
    for coef, D in ((fx, Dx), (fy, Dy)):
        if coef is None:
            continue
        f = np.asarray(coef(X, Y), dtype=float).ravel()
        if not np.any(f):
            continue
        F = sp.diags(f)
        P = -1j * hbar * D
        H = H + 0.5 * (F @ P + P @ F)
        # p^2/2M + f p >= -M f^2/2 pointwise in the continuum
        bound_terms -= 0.5 * mass * f**2
    H = sp.csr_matrix(H, dtype=complex)
    return DiscreteHamiltonian(H, grid, mass, hbar, Dx, Dy, Dxx, Dyy, tuple(origin), order, label,
                               float(bound_terms.min()))


def grid_lambdas(system: PhysicalSystem) -> tuple[float, float]:
    """Gaussian width scales (lambda_x, lambda_y) used to size and check grids."""
    from .normal_modes import solve_modes
    from .states import system_ground_form

    form = system_ground_form(system, solve_modes(system))
    return form.lambda_x, form.lambda_y


def default_grid(system: PhysicalSystem, n: int = 128, half_width: float = 8.0,
                 center=(0.0, 0.0)) -> GridSpec:
    """Square-point grid covering ``+-half_width/lambda_min`` on both axes."""
    lam = min(grid_lambdas(system))
    L = half_width / lam
    return GridSpec(n, n, L, L, center[0], center[1])


def check_resolution(grid: GridSpec, lambdas, min_half_width: float = 6.0, max_step: float = 0.25):
    for name, h, L, lam in (("x", grid.hx, grid.Lx, lambdas[0]), ("y", grid.hy, grid.Ly, lambdas[1])):
        if h > max_step / lam:
            raise ResolutionError(f"h{name} = {h:.4g} exceeds {max_step}/lambda_{name} = {max_step / lam:.4g}")
        if L < min_half_width / lam:
            raise ResolutionError(f"L{name} = {L:.4g} is below {min_half_width}/lambda_{name} = {min_half_width / lam:.4g}")


def discretize(system: PhysicalSystem, grid: GridSpec, frame: str = "reduced", k: float = 0.0,
               order: int = 4, check: bool = True) -> DiscreteHamiltonian:
    """Grid Hamiltonian of a Generic or TiltedB system.

    ``frame="reduced"`` builds the planar quadratic Hamiltonian in the shifted
    coordinates (grid centred on the origin). ``frame="lab"`` builds the
    untransformed Hamiltonian, electric field and (for the tilted field) the
    z plane wave ``exp(i k z)`` included, in gauges centred on the
    coordinate origin, so its eigenvalues are total energies.
    """
    tag = classify(system)
    if tag.kind not in (Configuration.GENERIC, Configuration.TILTED_B):
        raise ValueError(f"2D oracle supports Generic and TiltedB, got {tag.name}")
    if check:
        check_resolution(grid, grid_lambdas(system))
    df = derive(system)
    M, q, hbar = system.mass, system.charge, system.hbar
    wB = df.omega_B
    if frame not in ("reduced", "lab"):
        raise ValueError("frame must be 'reduced' or 'lab'")

    if tag.kind is Configuration.GENERIC:
        # symmetric gauge A = B(-y, x)/2 about the origin of the chosen coordinates
        def V(X, Y):
            out = 0.5 * M * (df.omega_1**2 * X**2 + df.omega_2**2 * Y**2)
            if frame == "lab":
                out = out - q * (system.E_x * X + system.E_y * Y)
            return out

        return build_operator(grid, M, hbar, V, fx=lambda X, Y: wB * Y, fy=lambda X, Y: -wB * X,
                              order=order, label=f"generic-{frame}")

    wBp = df.omega_Bp
    if frame == "reduced":
        def V(X, Y):
            return 0.5 * M * (df.tilde_omega_1**2 * X**2 + df.tilde_omega_2**2 * Y**2)
    else:
        # gauge A = (0, B x, B' y), p_z = hbar k
        def V(X, Y):
            return (0.5 * M * system.omega_x**2 * X**2 + 2.0 * M * wB**2 * X**2 - q * system.E_x * X
                    + (hbar * k - 2.0 * M * wBp * Y) ** 2 / (2.0 * M)
                    + 0.5 * M * system.omega_y**2 * Y**2 - q * system.E_y * Y)
    return build_operator(grid, M, hbar, V, fy=lambda X, Y: -2.0 * wB * X,
                          order=order, label=f"tilted-{frame}")


@dataclass
class EigenResult:
    energies: np.ndarray
    fields: list
    residuals: np.ndarray
    solves: int

    def pairs(self):
        return list(zip(self.energies, self.fields))


def lowest_eigenpairs(op: DiscreteHamiltonian, m: int = 6, shift: float | None = None,
                      tol: float = 1e-8, max_solves: int = 10_000, block: int = 4,
                      max_basis: int = 160, seed: int = 0) -> EigenResult:
    """Lowest ``m`` eigenpairs by shift-invert block Krylov iteration.

    The shift defaults to a lower bound of the spectrum, so the eigenvalues
    nearest the shift are the lowest ones. Every new block is orthogonalized
    twice against the whole basis; Ritz pairs come from a Rayleigh-Ritz
    projection of ``H`` itself. A block of size ``block`` resolves
    degeneracies of that multiplicity.
    """
    if not 1 <= m <= 8:
        raise ValueError("m must be between 1 and 8")
    n = op.size
    H = op.matrix
    if shift is None:
        bound = op.lower_bound()
        shift = bound - 0.05 * max(abs(bound), 1.0)
    lu = spla.splu(sp.csc_matrix(H - shift * sp.identity(n, format="csc")))
    rng = np.random.default_rng(seed)
    start = rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block))
    V = np.linalg.qr(start)[0]
    HV = H @ V
    frontier = V
    solves = 0
    while True:
        W = lu.solve(frontier)
        solves += W.shape[1]
        for _ in range(2):
            W -= V @ (V.conj().T @ W)
        W, R = np.linalg.qr(W)
        keep = np.abs(np.diag(R)) > 1e-12 * max(np.abs(np.diag(R)).max(), 1e-300)
        W = W[:, keep]
        if W.shape[1] == 0:
            W = np.linalg.qr(rng.standard_normal((n, block)) + 0j)[0]
            W -= V @ (V.conj().T @ W)
            W = np.linalg.qr(W)[0]
        V = np.hstack([V, W])
        HV = np.hstack([HV, H @ W])
        frontier = W
        if V.shape[1] >= m + block:
            T = V.conj().T @ HV
            theta, Y = scipy.linalg.eigh(0.5 * (T + T.conj().T))
            ritz = V @ Y[:, :m]
            res = np.linalg.norm(HV @ Y[:, :m] - ritz * theta[:m], axis=0)
            logger.debug("basis %d, residuals %s", V.shape[1], res)
            if np.all(res < tol):
                fields = []
                for j in range(m):
                    psi = ritz[:, j]
                    # fix the arbitrary phase: largest component real positive
                    psi = psi * np.exp(-1j * np.angle(psi[np.argmax(np.abs(psi))]))
                    fields.append(GridField(psi / math.sqrt(op.grid.weight), op.grid))
                return EigenResult(theta[:m].copy(), fields, res, solves)
            if V.shape[1] + block > max_basis:
                keep_n = m + block
                V = V @ Y[:, :keep_n]
                HV = HV @ Y[:, :keep_n]
                frontier = V[:, :block]
        if solves > max_solves:
            raise ConvergenceFailure(f"no convergence after {solves} shifted solves")


# ---------------------------------------------------------------- moments & propagation


def grid_moments(field: GridField, op: DiscreteHamiltonian):
    """Means and standard deviations of (x~, p_x, y~, p_y) measured from ``op.origin``."""
    psi = field.values.ravel()
    w = op.grid.weight
    norm2 = np.real(np.vdot(psi, psi)) * w
    X, Y = op.grid.mesh()
    xs = X.ravel() - op.origin[0]
    ys = Y.ravel() - op.origin[1]
    dens = np.abs(psi) ** 2 * w / norm2
    hbar = op.hbar
    mx, my = dens @ xs, dens @ ys
    vx = dens @ xs**2 - mx**2
    vy = dens @ ys**2 - my**2
    mpx = np.real(np.vdot(psi, -1j * hbar * (op.Dx @ psi))) * w / norm2
    mpy = np.real(np.vdot(psi, -1j * hbar * (op.Dy @ psi))) * w / norm2
    px2 = np.real(np.vdot(psi, -(hbar**2) * (op.Dxx @ psi))) * w / norm2
    py2 = np.real(np.vdot(psi, -(hbar**2) * (op.Dyy @ psi))) * w / norm2
    means = np.array([mx, mpx, my, mpy])
    variances = np.array([vx, px2 - mpx**2, vy, py2 - mpy**2])
    return means, np.sqrt(np.clip(variances, 0, None))


@dataclass
class Propagation:
    times: np.ndarray
    means: np.ndarray
    deltas: np.ndarray
    norms: np.ndarray
    max_norm_drift: float
    final: GridField
    refinements: int = 0
    extra: dict = field(default_factory=dict)


def propagate(op: DiscreteHamiltonian, initial: GridField, dt: float, steps: int,
              energy_shift: float | None = None, record_every: int = 1, tol: float = 1e-10,
              max_refine: int = 8, track_moments: bool = True) -> Propagation:
    """Crank-Nicolson propagation with per-step moments.

    The energy shift (default: the initial energy expectation) only changes
    the global phase but keeps the time-step error of the relevant energy
    differences small. Each implicit solve reuses one sparse LU factorization
    and is refined until the relative residual is below ``tol``.
    """
    n = op.size
    if energy_shift is None:
        energy_shift = op.expectation(initial)
    Hs = op.matrix - energy_shift * sp.identity(n, format="csr")
    a = 0.5j * dt / op.hbar
    A = sp.csc_matrix(sp.identity(n, format="csc") + a * Hs)
    B = sp.csr_matrix(sp.identity(n, format="csr") - a * Hs)
    lu = spla.splu(A)
    psi = initial.values.ravel().astype(complex)
    w = op.grid.weight
    times, means, deltas, norms = [], [], [], []
    refinements = 0
    max_drift = 0.0
    prev_norm = math.sqrt(np.real(np.vdot(psi, psi)) * w)

    def record(step):
        times.append(step * dt)
        norms.append(prev_norm)
        if track_moments:
            m, d = grid_moments(GridField(psi, op.grid), op)
            means.append(m)
            deltas.append(d)

    record(0)
    for step in range(1, steps + 1):
        rhs = B @ psi
        psi = lu.solve(rhs)
        rhs_norm = np.linalg.norm(rhs)
        for it in range(max_refine + 1):
            r = rhs - A @ psi
            if np.linalg.norm(r) <= tol * rhs_norm:
                break
            if it == max_refine:
                raise SolverStall(f"step {step}: implicit solve stalled at residual "
                                  f"{np.linalg.norm(r) / rhs_norm:.3g}")
            psi = psi + lu.solve(r)
            refinements += 1
        new_norm = math.sqrt(np.real(np.vdot(psi, psi)) * w)
        max_drift = max(max_drift, abs(new_norm - prev_norm))
        prev_norm = new_norm
        if step % record_every == 0 or step == steps:
            record(step)
    return Propagation(np.array(times), np.array(means), np.array(deltas), np.array(norms),
                       max_drift, GridField(psi, op.grid), refinements)


# ---------------------------------------------------------------- 1D solver


@dataclass(frozen=True)
class Grid1D:
    n: int
    L: float
    center: float = 0.0

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.center + np.linspace(-self.L, self.L, self.n)


def solve_1d(potential, grid: Grid1D, m: int = 4, mass: float = 1.0, hbar: float = 1.0,
             order: int = 4):
    """Lowest ``m`` eigenpairs of ``p^2/2M + V(x)`` with Dirichlet ends.

    Returns ``(energies, samples)`` with samples normalized to unit
    trapezoidal norm and a positive value at their largest component.
    """
    x = grid.x
    V = np.asarray(potential(x), dtype=float)
    stencil = _SECOND[order]
    half = max(stencil)
    c = -(hbar**2) / (2.0 * mass * grid.h**2)
    # upper banded storage for eig_banded
    band = np.zeros((half + 1, grid.n))
    for off in range(half + 1):
        band[half - off, off:] = c * stencil[off]
    band[half] += V
    energies, vecs = scipy.linalg.eig_banded(band, select="i", select_range=(0, m - 1))
    vecs = vecs / math.sqrt(grid.h)
    signs = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    return energies, (vecs * signs).T


# ---------------------------------------------------------------- classical & spectral helpers


def rk4(omega: np.ndarray, x0, times) -> np.ndarray:
    """Classical RK4 for ``dX/dt = omega X`` sampled at ``times`` (substeps of at most 1e-3/||omega||)."""
    omega = np.asarray(omega, dtype=float)
    times = np.asarray(times, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    out = [x.copy()]
    max_dt = 1e-3 / max(np.linalg.norm(omega, 2), 1e-300)
    for t0, t1 in zip(times[:-1], times[1:]):
        nsub = max(1, int(math.ceil((t1 - t0) / max_dt)))
        h = (t1 - t0) / nsub
        for _ in range(nsub):
            k1 = omega @ x
            k2 = omega @ (x + 0.5 * h * k1)
            k3 = omega @ (x + 0.5 * h * k2)
            k4 = omega @ (x + h * k3)
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(x.copy())
    return np.array(out)


def spectral_gradient(values: np.ndarray, grid: GridSpec):
    """FFT derivatives along x and y (accurate for fields that decay to ~0 at the edges)."""
    kx = 2 * np.pi * np.fft.fftfreq(grid.nx, d=grid.hx)
    ky = 2 * np.pi * np.fft.fftfreq(grid.ny, d=grid.hy)
    f = np.fft.fft2(values)
    dx = np.fft.ifft2(1j * kx[:, None] * f)
    dy = np.fft.ifft2(1j * ky[None, :] * f)
    return dx, dy


def annihilation_residuals(modes, form, grid: GridSpec):
    """Relative norm of ``a_i psi00`` for the sampled ground state, i = 1, 2.

    The lowering operators are applied with FFT derivatives. Each residual is
    scaled by the sizes of the position and momentum parts it cancels.
    """
    from .states import ground_state

    psi = GridField.sample(ground_state(form), grid).values
    X, Y = grid.mesh()
    X = X - form.center[0]
    Y = Y - form.center[1]
    dx, dy = spectral_gradient(psi, grid)
    hbar = form.hbar
    out = []
    for i in range(2):
        xi, eta = modes.xi[i], modes.eta[i]
        pos = xi[0] * X * psi + xi[1] * Y * psi
        mom = -1j * hbar * (eta[0] * dx + eta[1] * dy)
        scale = np.linalg.norm(pos) + np.linalg.norm(mom)
        out.append(float(np.linalg.norm(pos + mom) / scale))
    return out


def gaussian_from_covariance(cov: np.ndarray, hbar: float = 1.0):
    """Centred pure Gaussian ``exp(-x^T Lambda x / 2 hbar)`` with the given symmetrized covariance.

    ``cov`` is ordered (x~, p_x, y~, p_y). Returns ``(Lambda, psi)`` where
    ``psi(x, y)`` is normalized.
    """
    from .states import GaussianForm, ground_state

    cov = np.asarray(cov, dtype=float)
    pos, mom = [0, 2], [1, 3]
    gxx = cov[np.ix_(pos, pos)]
    gxp = cov[np.ix_(pos, mom)]
    inv = np.linalg.inv(gxx)
    Lam = 0.5 * hbar * inv - 1j * (inv @ gxp)
    form = GaussianForm(Lam, hbar)
    return form.Lambda, ground_state(form)


def ladder_matrices(modes, op: DiscreteHamiltonian):
    """Sparse lowering operators ``a_i = (xi_i . x~ - i hbar eta_i . grad)/sqrt(hbar)`` on the grid."""
    X, Y = op.grid.mesh()
    Xd = sp.diags(X.ravel() - op.origin[0])
    Yd = sp.diags(Y.ravel() - op.origin[1])
    rh = math.sqrt(op.hbar)
    out = []
    for i in range(2):
        xi, eta = modes.xi[i], modes.eta[i]
        out.append(sp.csr_matrix((xi[0] * Xd + xi[1] * Yd - 1j * op.hbar * (eta[0] * op.Dx + eta[1] * op.Dy)) / rh))
    return out


def squeeze_on_grid(field: GridField, zetas, modes, op: DiscreteHamiltonian) -> GridField:
    """Apply ``prod_i exp(zeta_i a_i^+2/2 - zeta_i^* a_i^2/2)`` to a grid field.

    The two generators are summed before exponentiating; on the continuum
    they commute, on the grid the difference is of stencil order.
    """
    gen = None
    for a, z in zip(ladder_matrices(modes, op), zetas):
        if z == 0:
            continue
        ad = a.conj().T
        term = 0.5 * (z * (ad @ ad) - np.conj(z) * (a @ a))
        gen = term if gen is None else gen + term
    if gen is None:
        return field
    return GridField(spla.expm_multiply(sp.csr_matrix(gen), field.values.ravel()), field.grid)
