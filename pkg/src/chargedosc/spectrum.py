"""Energy levels for every solvable configuration.

Every result carries its decomposition so the constant offsets produced by
the electric field (and, for continuum-labelled states, the plane-wave
momentum) are visible individually.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

from .errors import ContinuumSpectrum, DegenerateAxis, ZeroMode
from .normal_modes import NormalModes, solve_modes
from .params import (Configuration, PhysicalSystem, ZMotion, center_shift,
                     classify, derive, is_zero, landau_frame, UNSOLVABLE_REASON)


@dataclass(frozen=True)
class LevelIndex:
    n1: int = 0
    n2: int = 0
    n3: int = 0
    k: float = 0.0

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            n = getattr(self, name)
            if int(n) != n or n < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {n!r}")
            object.__setattr__(self, name, int(n))
        object.__setattr__(self, "k", float(self.k))


@dataclass(frozen=True)
class EnergyResult:
    value: float
    decomposition: tuple[tuple[str, float], ...] = field(default=())

    @classmethod
    def from_terms(cls, terms):
        terms = tuple((name, float(v)) for name, v in terms)
        return cls(math.fsum(v for _, v in terms), terms)

    def term(self, name: str) -> float:
        return math.fsum(v for n, v in self.decomposition if n == name)


class ContinuumTag(enum.Enum):
    """Spectrum of the z motion when there is no trap along z.

    ``FREE_Z``: free motion, ``E_z >= 0`` continuous.
    ``LINEAR_Z``: uniform force, ``E_z`` takes any real value.
    """

    FREE_Z = "FreeZ"
    LINEAR_Z = "LinearZ"


def planar_levels(modes: NormalModes, idx: LevelIndex, hbar: float) -> EnergyResult:
    return EnergyResult.from_terms([
        ("mode1", hbar * modes.sigma1 * (idx.n1 + 0.5)),
        ("mode2", hbar * modes.sigma2 * (idx.n2 + 0.5)),
    ])


def z_levels(system: PhysicalSystem, n3: int):
    """Discrete z level, or a :class:`ContinuumTag` for untrapped z motion."""
    if is_zero(system.omega_z):
        return ContinuumTag.FREE_Z if is_zero(system.E_z) else ContinuumTag.LINEAR_Z
    offset = -(system.charge * system.E_z) ** 2 / (2.0 * system.mass * system.omega_z**2)
    return EnergyResult.from_terms([
        ("mode3", system.hbar * system.omega_z * (n3 + 0.5)),
        ("electric_z", offset),
    ])


def full_levels(system: PhysicalSystem, idx: LevelIndex, modes: NormalModes | None = None) -> EnergyResult:
    """Total energy of a Generic configuration with a trapped z axis."""
    tag = classify(system)
    if tag.kind is Configuration.UNSOLVABLE:
        raise DegenerateAxis(UNSOLVABLE_REASON)
    if tag.kind is not Configuration.GENERIC:
        raise ValueError(f"full_levels needs a Generic configuration, got {tag.name}")
    z = z_levels(system, idx.n3)
    if isinstance(z, ContinuumTag):
        raise ContinuumSpectrum(f"z motion is a continuum ({z.value}); no discrete n3 levels")
    modes = modes or solve_modes(system, tag.kind)
    shift = center_shift(system, tag)
    terms = list(planar_levels(modes, idx, system.hbar).decomposition)
    terms += [(n, v) for n, v in shift.contributions if n != "electric_z"]
    terms += list(z.decomposition)
    return EnergyResult.from_terms(terms)


def landau_levels(system: PhysicalSystem, n1: int, k: float) -> EnergyResult:
    """Planar energy with one free axis: oscillator in x, plane wave e^{iky} in y."""
    tag = classify(system)
    if tag.kind not in (Configuration.LANDAU_Y, Configuration.BOTH_PLANAR_FREE):
        if tag.kind is Configuration.UNSOLVABLE:
            raise DegenerateAxis(UNSOLVABLE_REASON)
        raise ValueError(f"landau_levels needs LandauY or BothPlanarFree, got {tag.name}")
    s = landau_frame(system, tag)
    df = derive(s)
    w1 = df.tilde_omega_1
    if w1 == 0:
        raise ZeroMode("no trap and no magnetic field in the plane: free motion")
    hbar, M = s.hbar, s.mass
    drive = s.charge * s.E_x + 2.0 * k * hbar * df.omega_B
    return EnergyResult.from_terms([
        ("mode1", hbar * w1 * (n1 + 0.5)),
        ("shift_x", -drive**2 / (2.0 * M * w1**2)),
        ("plane_wave", hbar**2 * k**2 / (2.0 * M)),
    ])


def tilted_levels(system: PhysicalSystem, idx: LevelIndex, modes: NormalModes | None = None) -> EnergyResult:
    """Total energy for ``B = B_x e_x + B_z e_z``; ``idx.k`` is the z wavenumber."""
    tag = classify(system)
    if tag.kind is not Configuration.TILTED_B:
        raise ValueError(f"tilted_levels needs a TiltedB configuration, got {tag.name}")
    modes = modes or solve_modes(system, tag.kind)
    df = derive(system)
    hbar, M, k = system.hbar, system.mass, idx.k
    shift = center_shift(system, tag)
    drive = system.charge * system.E_y + 2.0 * k * hbar * df.omega_Bp
    terms = list(planar_levels(modes, idx, hbar).decomposition)
    terms += list(shift.contributions)
    terms += [("shift_y", -drive**2 / (2.0 * M * df.tilde_omega_2**2)),
              ("plane_wave", hbar**2 * k**2 / (2.0 * M))]
    return EnergyResult.from_terms(terms)


def lowest_planar(modes: NormalModes, hbar: float, count: int):
    """The ``count`` lowest (n1, n2, energy) triples, ties broken by (n1, n2)."""
    # n_i up to count covers every candidate among the lowest `count`
    cands = [(hbar * (modes.sigma1 * (a + 0.5) + modes.sigma2 * (b + 0.5)), a, b)
             for a, b in itertools.product(range(count), repeat=2)]
    cands.sort()
    return [(a, b, e) for e, a, b in cands[:count]]


def energy(system: PhysicalSystem, idx: LevelIndex) -> EnergyResult:
    """Dispatch on the configuration and return the total energy.

    Untrapped z motion contributes nothing here (its continuum is reported by
    :func:`z_levels`); for the tilted field ``idx.k`` is the z wavenumber, for
    Landau configurations it is the y wavenumber.
    """
    tag = classify(system)
    if tag.kind is Configuration.UNSOLVABLE:
        raise DegenerateAxis(UNSOLVABLE_REASON)
    if tag.kind is Configuration.TILTED_B:
        return tilted_levels(system, idx)
    if tag.kind is Configuration.GENERIC:
        if tag.z_motion is ZMotion.HARMONIC:
            return full_levels(system, idx)
        modes = solve_modes(system, tag.kind)
        shift = center_shift(system, tag)
        return EnergyResult.from_terms(list(planar_levels(modes, idx, system.hbar).decomposition)
                                       + list(shift.contributions))
    planar = landau_levels(system, idx.n1, idx.k)
    z = z_levels(system, idx.n3)
    terms = list(planar.decomposition)
    if isinstance(z, EnergyResult):
        terms += list(z.decomposition)
    return EnergyResult.from_terms(terms)
