"""Named parameter sets used by the test suite and the ``oracle`` command.

Generic fixtures (trapped in all three directions)::

    name        M    q     omega_x omega_y omega_z  B_z   E_x   E_y   E_z   omega_B
    aniso       1    1     1.0     2.0     1.0      1.4   0     0     0     0.7
    reversed    1    1     1.5     1.0     0.8     -0.8   0.2   0     0    -0.4
    isotropic   1    1     1.0     1.0     1.0      1.0   0     0     0     0.5
    fieldfree   1    1     0.8     1.3     1.1      0     0     0.1   0     0
    charged     2   -1     1.2     0.7     0.9      2.0   0.15 -0.1   0.2  -0.5

Tilted-field fixtures (omega_z = 0, plane wave along z with wavenumber k)::

    tilted      M=1 q=1 omega_x=1.0 omega_y=1.5 B_z=1.0 B_x=0.6 E_x=0.1  E_y=0    k=0
    tilted_k    M=1 q=1 omega_x=1.2 omega_y=0.9 B_z=0.8 B_x=1.0 E_x=0    E_y=0.1  k=0.7

Landau fixture: ``landau`` has omega_y = 0, omega_x = 1, omega_B = 0.5,
E_x = 0.3 and is evaluated at k = 0.8. ``free_landau`` is the pure Landau
problem (omega_x = omega_y = 0, E = 0). ``decoupled`` is the field-free
isotropic oscillator with hbar*omega = 1 per axis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .params import PhysicalSystem


@dataclass(frozen=True)
class Fixture:
    name: str
    system: PhysicalSystem
    k: float = 0.0
    kind: str = "generic"


def _sys(**kw) -> PhysicalSystem:
    base = dict(mass=1.0, charge=1.0, omega_z=1.0)
    base.update(kw)
    return PhysicalSystem(**base)


GENERIC = {
    "aniso": Fixture("aniso", _sys(omega_x=1.0, omega_y=2.0, B_z=1.4)),
    "reversed": Fixture("reversed", _sys(omega_x=1.5, omega_y=1.0, omega_z=0.8, B_z=-0.8, E_x=0.2)),
    "isotropic": Fixture("isotropic", _sys(omega_x=1.0, omega_y=1.0, B_z=1.0)),
    "fieldfree": Fixture("fieldfree", _sys(omega_x=0.8, omega_y=1.3, omega_z=1.1, E_y=0.1)),
    "charged": Fixture("charged", _sys(mass=2.0, charge=-1.0, omega_x=1.2, omega_y=0.7, omega_z=0.9,
                                       B_z=2.0, E_x=0.15, E_y=-0.1, E_z=0.2)),
}

TILTED = {
    "tilted": Fixture("tilted", _sys(omega_x=1.0, omega_y=1.5, omega_z=0.0, B_z=1.0, B_x=0.6, E_x=0.1),
                      kind="tilted"),
    "tilted_k": Fixture("tilted_k", _sys(omega_x=1.2, omega_y=0.9, omega_z=0.0, B_z=0.8, B_x=1.0, E_y=0.1),
                        k=0.7, kind="tilted"),
}

OTHER = {
    "landau": Fixture("landau", _sys(omega_x=1.0, omega_y=0.0, B_z=1.0, E_x=0.3), k=0.8, kind="landau"),
    "free_landau": Fixture("free_landau", _sys(omega_x=0.0, omega_y=0.0, B_z=1.0), kind="landau"),
    "decoupled": Fixture("decoupled", _sys(omega_x=1.0, omega_y=1.0)),
}

ALL = {**GENERIC, **TILTED, **OTHER}


def get(name: str) -> Fixture:
    try:
        return ALL[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(sorted(ALL))}") from None
