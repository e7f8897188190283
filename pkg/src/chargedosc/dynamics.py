"""Coherent (displaced) and squeezed states of the planar normal modes.

Displaced states are available as wave functions; squeezed states only
through their first and second moments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeRadicand
from .normal_modes import NormalModes


@dataclass(frozen=True)
class CoherentSpec:
    alpha1: complex = 0j
    alpha2: complex = 0j

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2])


@dataclass(frozen=True)
class SqueezeSpec:
    """Parameters of ``S(zeta) = prod_i exp(zeta_i a_i^+2/2 - zeta_i^* a_i^2/2)``."""

    zeta1: complex = 0j
    zeta2: complex = 0j

    def __post_init__(self):
        for name in ("zeta1", "zeta2"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def rho(self) -> tuple[float, float]:
        return (abs(self.zeta1), abs(self.zeta2))

    @property
    def phi(self) -> tuple[float, float]:
        return (cmath.phase(self.zeta1), cmath.phase(self.zeta2))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    centers: np.ndarray
    uncertainties: np.ndarray | None = None

    def __post_init__(self):
        if len(self.times) != len(self.centers):
            raise ValueError("times and centers differ in length")


def displacement_shift(spec: CoherentSpec, modes: NormalModes, hbar: float):
    """Position and momentum shifts ``(x_D, p_D)`` (2-vectors) of the displacement operator."""
    a = spec.alphas
    rh = math.sqrt(hbar)
    xD = 1j * rh * (a @ modes.eta.conj() - a.conj() @ modes.eta)
    pD = -1j * rh * (a @ modes.xi.conj() - a.conj() @ modes.xi)
    return xD.real, pD.real


def displaced_wavefunction(base, spec: CoherentSpec, modes: NormalModes, hbar: float, x, y):
    """Amplitude of ``D(alpha1, alpha2)|base>`` at reduced coordinates (x~, y~).

    ``base`` is any callable ``base(x~, y~)``.
    """
    xD, pD = displacement_shift(spec, modes, hbar)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phase = np.exp(-0.5j / hbar * (xD @ pD)) * np.exp(1j / hbar * (pD[0] * x + pD[1] * y))
    return phase * base(x - xD[0], y - xD[1])


def evolve_coherent(spec: CoherentSpec, sigmas, t: float) -> CoherentSpec:
    return CoherentSpec(cmath.exp(-1j * sigmas[0] * t) * spec.alpha1,
                        cmath.exp(-1j * sigmas[1] * t) * spec.alpha2)


def evolve_squeeze(spec: SqueezeSpec, sigmas, t: float) -> SqueezeSpec:
    return SqueezeSpec(cmath.exp(-2j * sigmas[0] * t) * spec.zeta1,
                       cmath.exp(-2j * sigmas[1] * t) * spec.zeta2)


def center_trajectory(spec: CoherentSpec, modes: NormalModes, hbar: float, times) -> Trajectory:
    """Expectation of ``X = (x~, p_x, y~, p_y)`` in a displaced number state."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(-1j * np.outer(times, modes.sigmas)) * spec.alphas
    centers = 2.0 * math.sqrt(hbar) * np.real(phases @ modes.v.T)
    return Trajectory(times, centers)


def squeezed_covariance(spec: SqueezeSpec, modes: NormalModes, hbar: float,
                        n1: int = 0, n2: int = 0, t: float = 0.0) -> np.ndarray:
    """Symmetrized covariance of X in the squeezed number state evolved to time t."""
    out = np.zeros((4, 4))
    for j, (rho, phi, n) in enumerate(zip(spec.rho, spec.phi, (n1, n2))):
        v = modes.v[:, j]
        aa = 0.5 * math.sinh(2 * rho) * cmath.exp(1j * (phi - 2.0 * modes.sigmas[j] * t)) * (2 * n + 1)
        sym = 0.5 * math.cosh(2 * rho) * (2 * n + 1)
        out += 2.0 * hbar * (np.real(aa * np.outer(v, v)) + sym * np.real(np.outer(v, v.conj())))
    return out


def squeezed_uncertainties(spec: SqueezeSpec, modes: NormalModes, hbar: float,
                           n1: int = 0, n2: int = 0, t: float = 0.0):
    """``(means, deltas)`` of X in a squeezed number state at time t.

    The means vanish identically; each delta sums the contributions of
    both modes.
    """
    rad = np.zeros(4)
    for j, (rho, phi, n) in enumerate(zip(spec.rho, spec.phi, (n1, n2))):
        v = modes.v[:, j]
        rad += hbar * (2 * n + 1) * (np.abs(v) ** 2 * math.cosh(2 * rho)
                                     + np.real(v**2 * cmath.exp(1j * (phi - 2.0 * modes.sigmas[j] * t)))
                                     * math.sinh(2 * rho))
    if np.any(rad < -1e-12):
        raise NegativeRadicand(f"negative variance {rad.min():.3g}: eigenvector normalization is broken")
    return np.zeros(4), np.sqrt(np.clip(rad, 0.0, None))


def squeezed_trajectory(spec: SqueezeSpec, modes: NormalModes, hbar: float, times,
                        n1: int = 0, n2: int = 0) -> Trajectory:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    deltas = np.array([squeezed_uncertainties(spec, modes, hbar, n1, n2, t)[1] for t in times])
    return Trajectory(times, np.zeros((len(times), 4)), deltas)


def number_state_uncertainties(modes: NormalModes, hbar: float, n1: int = 0, n2: int = 0) -> np.ndarray:
    """Time-independent deltas of a (displaced) number state."""
    return squeezed_uncertainties(SqueezeSpec(), modes, hbar, n1, n2)[1]


def coherent_trajectory(spec: CoherentSpec, modes: NormalModes, hbar: float, times,
                        n1: int = 0, n2: int = 0) -> Trajectory:
    traj = center_trajectory(spec, modes, hbar, times)
    deltas = np.tile(number_state_uncertainties(modes, hbar, n1, n2), (len(traj.times), 1))
    return Trajectory(traj.times, traj.centers, deltas)
