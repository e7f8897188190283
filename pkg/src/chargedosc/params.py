"""Physical inputs, derived frequencies, electric-field shifts and configuration tags.

All quantities are kept in whatever consistent unit system the caller uses;
``hbar`` and ``light_speed`` default to 1 but are never silently dropped.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError, DegenerateAxis, InvalidSystem

#: absolute tolerance for "is this parameter zero" decisions
ZERO_TOL = 1e-12


def is_zero(value: float) -> bool:
    return abs(value) <= ZERO_TOL


@dataclass(frozen=True)
class PhysicalSystem:
    """Charged particle in an anisotropic trap with static uniform E and B fields.

    The magnetic field is ``B_x e_x + B_z e_z``; a nonzero ``B_x`` is only
    supported when there is no confinement and no electric field along z.
    """

    mass: float
    charge: float
    omega_x: float
    omega_y: float
    omega_z: float
    E_x: float = 0.0
    E_y: float = 0.0
    E_z: float = 0.0
    B_z: float = 0.0
    B_x: float = 0.0
    hbar: float = 1.0
    light_speed: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidSystem(f"{f.name} must be a finite real number, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        for name in ("mass", "hbar", "light_speed"):
            if getattr(self, name) <= 0:
                raise InvalidSystem(f"{name} must be positive")
        for name in ("omega_x", "omega_y", "omega_z"):
            if getattr(self, name) < 0:
                raise InvalidSystem(f"{name} must be non-negative")
        if not is_zero(self.B_x) and not (is_zero(self.omega_z) and is_zero(self.E_z)):
            raise InvalidSystem("B_x != 0 requires omega_z = 0 and E_z = 0")


@dataclass(frozen=True)
class DerivedFrequencies:
    omega_B: float
    omega_Bp: float
    omega_1: float
    omega_2: float
    tilde_omega_1: float
    tilde_omega_2: float
    omega_x: float
    omega_y: float


def derive(system: PhysicalSystem) -> DerivedFrequencies:
    """Cyclotron-type frequencies and the field-dressed trap frequencies."""
    s = system
    omega_B = s.charge * s.B_z / (2.0 * s.mass * s.light_speed)
    omega_Bp = s.charge * s.B_x / (2.0 * s.mass * s.light_speed)
    return DerivedFrequencies(
        omega_B=omega_B,
        omega_Bp=omega_Bp,
        omega_1=math.sqrt(s.omega_x**2 + omega_B**2),
        omega_2=math.sqrt(s.omega_y**2 + omega_B**2),
        tilde_omega_1=math.sqrt(s.omega_x**2 + 4.0 * omega_B**2),
        tilde_omega_2=math.sqrt(s.omega_y**2 + 4.0 * omega_Bp**2),
        omega_x=s.omega_x,
        omega_y=s.omega_y,
    )


class Configuration(enum.Enum):
    GENERIC = "Generic"
    LANDAU_Y = "LandauY"
    UNSOLVABLE = "Unsolvable"
    BOTH_PLANAR_FREE = "BothPlanarFree"
    TILTED_B = "TiltedB"


class ZMotion(enum.Enum):
    HARMONIC = "Harmonic"
    FREE = "FreeZ"
    LINEAR = "LinearZ"


@dataclass(frozen=True)
class ConfigurationTag:
    """Result of :func:`classify`.

    ``kind`` describes the planar problem. ``z_motion`` describes the
    separable z motion (always ``FREE`` for the tilted field, where p_z is
    conserved). ``swapped_axes`` marks the mirror of the ``omega_y = 0`` case
    (``omega_x = 0``) which is handled by exchanging x and y;
    ``rotation_angle`` is the in-plane rotation that removes ``E_y`` when both
    planar trap frequencies vanish.
    """

    kind: Configuration
    z_motion: ZMotion
    swapped_axes: bool = False
    rotation_angle: float = 0.0

    @property
    def name(self) -> str:
        return self.kind.value


def _z_motion(system: PhysicalSystem) -> ZMotion:
    if not is_zero(system.omega_z):
        return ZMotion.HARMONIC
    return ZMotion.FREE if is_zero(system.E_z) else ZMotion.LINEAR


def classify(system: PhysicalSystem) -> ConfigurationTag:
    """Tag the field/trap configuration.

    Precedence: tilted field, then planar degeneracies, then the z axis.
    """
    zm = _z_motion(system)
    if not is_zero(system.B_x):
        return ConfigurationTag(Configuration.TILTED_B, ZMotion.FREE)
    wx0, wy0 = is_zero(system.omega_x), is_zero(system.omega_y)
    if wx0 and wy0:
        angle = math.atan2(system.E_y, system.E_x)
        return ConfigurationTag(Configuration.BOTH_PLANAR_FREE, zm, rotation_angle=angle)
    if wy0:
        kind = Configuration.LANDAU_Y if is_zero(system.E_y) else Configuration.UNSOLVABLE
        return ConfigurationTag(kind, zm)
    if wx0:
        kind = Configuration.LANDAU_Y if is_zero(system.E_x) else Configuration.UNSOLVABLE
        return ConfigurationTag(kind, zm, swapped_axes=True)
    return ConfigurationTag(Configuration.GENERIC, zm)


UNSOLVABLE_REASON = (
    "a trap axis with zero frequency carries a nonzero electric field; the "
    "Hamiltonian cannot be reduced to a quadratic form and the problem "
    "could not be solved analytically"
)


def landau_frame(system: PhysicalSystem, tag: ConfigurationTag | None = None) -> PhysicalSystem:
    """Equivalent system in which ``omega_y = 0`` and ``E_y = 0``.

    Exchanging x and y is a reflection, so B_z changes sign. For two free
    planar axes the plane is rotated until the field lies along x.
    """
    tag = tag or classify(system)
    if tag.kind is Configuration.LANDAU_Y and not tag.swapped_axes:
        return system
    if tag.kind is Configuration.LANDAU_Y:
        return replace(system, omega_x=system.omega_y, omega_y=system.omega_x,
                       E_x=system.E_y, E_y=system.E_x, B_z=-system.B_z)
    if tag.kind is Configuration.BOTH_PLANAR_FREE:
        return replace(system, omega_x=0.0, omega_y=0.0,
                       E_x=math.hypot(system.E_x, system.E_y), E_y=0.0)
    if tag.kind is Configuration.UNSOLVABLE:
        raise DegenerateAxis(UNSOLVABLE_REASON)
    raise ValueError(f"{tag.name} has no Landau-gauge frame")


@dataclass(frozen=True)
class CenterShift:
    """Equilibrium displacement per axis and the constant energy it removes.

    A shift is ``None`` where it is undefined (no trap along that axis) or
    depends on a conserved momentum.
    """

    x0: float | None
    y0: float | None
    z0: float | None
    energy_offset: float
    contributions: tuple = ()


def _axis_shift(system, field, omega):
    shift = system.charge * field / (system.mass * omega**2)
    energy = -(system.charge * field) ** 2 / (2.0 * system.mass * omega**2)
    return shift, energy


def center_shift(system: PhysicalSystem, tag: ConfigurationTag | None = None) -> CenterShift:
    tag = tag or classify(system)
    if tag.kind is Configuration.UNSOLVABLE:
        raise DegenerateAxis(UNSOLVABLE_REASON)
    contributions = []
    x0 = y0 = z0 = None

    if tag.kind is Configuration.GENERIC:
        x0, ex = _axis_shift(system, system.E_x, system.omega_x)
        y0, ey = _axis_shift(system, system.E_y, system.omega_y)
        contributions += [("electric_x", ex), ("electric_y", ey)]
    elif tag.kind is Configuration.TILTED_B:
        if not is_zero(system.omega_x):
            x0, ex = _axis_shift(system, system.E_x, system.omega_x)
            contributions.append(("electric_x", ex))
        elif not is_zero(system.E_x):
            raise DegenerateAxis("TiltedB with omega_x = 0 and E_x != 0: " + UNSOLVABLE_REASON)

    if tag.z_motion is ZMotion.HARMONIC:
        z0, ez = _axis_shift(system, system.E_z, system.omega_z)
        contributions.append(("electric_z", ez))

    offset = math.fsum(v for _, v in contributions)
    return CenterShift(x0, y0, z0, offset, tuple(contributions))


# ---------------------------------------------------------------- config files

REQUIRED_KEYS = ("mass", "charge", "omega_x", "omega_y", "omega_z",
                 "E_x", "E_y", "E_z", "B_z")
OPTIONAL_KEYS = ("B_x", "hbar", "light_speed")


def parse_system(text: str) -> PhysicalSystem:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    known = set(REQUIRED_KEYS) | set(OPTIONAL_KEYS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"value for {key!r} is not a number: {value!r}", lineno, key) from None
        if not math.isfinite(number):
            raise ConfigError(f"value for {key!r} is not finite", lineno, key)
        values[key] = number
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", key=key)
    try:
        return PhysicalSystem(**values)
    except InvalidSystem as exc:
        raise ConfigError(str(exc)) from exc


def load_system(path) -> PhysicalSystem:
    return parse_system(Path(path).read_text())


def format_system(system: PhysicalSystem) -> str:
    return "\n".join(f"{f.name} = {getattr(system, f.name)!r}" for f in fields(system)) + "\n"
