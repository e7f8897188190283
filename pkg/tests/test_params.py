import math

import pytest

from chargedosc.errors import ConfigError, DegenerateAxis, InvalidSystem
from chargedosc.params import (Configuration, PhysicalSystem, ZMotion, center_shift, classify, derive,
                               format_system, landau_frame, parse_system)

BASE = """\
# comment line
mass = 2
charge = -1
omega_x = 1.5
omega_y = 0.5   # trailing comment
omega_z = 1
E_x = 0.2
E_y = 0
E_z = 0.1
B_z = 3
"""


def sys_(**kw):
    base = dict(mass=1.0, charge=1.0, omega_x=1.0, omega_y=1.0, omega_z=1.0)
    base.update(kw)
    return PhysicalSystem(**base)


def test_parse_and_round_trip():
    s = parse_system(BASE)
    assert s.mass == 2 and s.charge == -1 and s.omega_y == 0.5 and s.B_z == 3
    assert s.hbar == 1 and s.light_speed == 1 and s.B_x == 0
    assert parse_system(format_system(s)) == s


@pytest.mark.parametrize("text,line", [
    (BASE + "bogus = 1\n", 11),
    (BASE + "mass = 3\n", 11),
    (BASE.replace("omega_x = 1.5", "omega_x = fast"), 4),
    (BASE.replace("omega_x = 1.5", "omega_x 1.5"), 4),
    (BASE.replace("E_x = 0.2", "E_x = nan"), 7),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_system(text)
    assert exc.value.lineno == line
    assert str(exc.value).startswith(f"line {line}:")


def test_missing_key_is_named():
    with pytest.raises(ConfigError, match="omega_z") as exc:
        parse_system(BASE.replace("omega_z = 1\n", ""))
    assert exc.value.key == "omega_z"


def test_invalid_values():
    with pytest.raises(InvalidSystem):
        sys_(mass=0.0)
    with pytest.raises(InvalidSystem):
        sys_(omega_x=-1.0)
    with pytest.raises(InvalidSystem):
        sys_(omega_x=math.inf)
    # a tilted field requires free z motion without a z field
    with pytest.raises(InvalidSystem):
        sys_(B_x=1.0)
    with pytest.raises(ConfigError):
        parse_system(BASE.replace("mass = 2", "mass = -2"))


def test_derived_frequencies():
    s = sys_(mass=2.0, charge=-1.0, omega_x=1.5, omega_y=0.5, B_z=3.0, light_speed=2.0)
    df = derive(s)
    assert df.omega_B == pytest.approx(-3.0 / 8.0, rel=1e-15)
    assert df.omega_1 == pytest.approx(math.hypot(1.5, 3 / 8), rel=1e-15)
    assert df.omega_2 == pytest.approx(math.hypot(0.5, 3 / 8), rel=1e-15)
    assert df.tilde_omega_1 == pytest.approx(math.hypot(1.5, 3 / 4), rel=1e-15)


@pytest.mark.parametrize("kw,kind,zm", [
    (dict(), Configuration.GENERIC, ZMotion.HARMONIC),
    (dict(omega_z=0.0), Configuration.GENERIC, ZMotion.FREE),
    (dict(omega_z=0.0, E_z=0.5), Configuration.GENERIC, ZMotion.LINEAR),
    (dict(omega_y=0.0), Configuration.LANDAU_Y, ZMotion.HARMONIC),
    (dict(omega_y=0.0, E_y=0.3), Configuration.UNSOLVABLE, ZMotion.HARMONIC),
    (dict(omega_x=0.0, E_x=0.3), Configuration.UNSOLVABLE, ZMotion.HARMONIC),
    (dict(omega_x=0.0, omega_y=0.0, E_x=1.0, E_y=1.0), Configuration.BOTH_PLANAR_FREE, ZMotion.HARMONIC),
    (dict(omega_z=0.0, B_x=0.5), Configuration.TILTED_B, ZMotion.FREE),
    (dict(omega_y=1e-13), Configuration.LANDAU_Y, ZMotion.HARMONIC),
])
def test_classify(kw, kind, zm):
    tag = classify(sys_(**kw))
    assert tag.kind is kind
    assert tag.z_motion is zm


def test_generic_iff_trapped_plane_without_tilt(rng):
    for _ in range(200):
        wx, wy = rng.choice([0.0, 1.0]), rng.choice([0.0, 1.3])
        bx = rng.choice([0.0, 0.4])
        s = sys_(omega_x=wx, omega_y=wy, B_x=bx, omega_z=0.0, B_z=rng.uniform(-1, 1))
        generic = classify(s).kind is Configuration.GENERIC
        assert generic == (wx > 0 and wy > 0 and bx == 0)


def test_mirrored_landau_frame():
    s = sys_(omega_x=0.0, omega_y=1.2, E_y=0.4, B_z=0.7)
    tag = classify(s)
    assert tag.kind is Configuration.LANDAU_Y and tag.swapped_axes
    f = landau_frame(s, tag)
    assert (f.omega_x, f.omega_y, f.E_x, f.E_y, f.B_z) == (1.2, 0.0, 0.4, 0.0, -0.7)


def test_both_free_rotation():
    s = sys_(omega_x=0.0, omega_y=0.0, E_x=0.3, E_y=0.4)
    tag = classify(s)
    assert tag.rotation_angle == pytest.approx(math.atan2(0.4, 0.3))
    assert landau_frame(s, tag).E_x == pytest.approx(0.5, rel=1e-15)


def test_center_shift_generic():
    s = sys_(mass=2.0, charge=-1.0, omega_x=1.5, omega_y=0.5, E_x=0.2, E_y=-0.3, E_z=0.1)
    sh = center_shift(s)
    assert sh.x0 == pytest.approx(-0.2 / (2 * 1.5**2), rel=1e-15)
    assert sh.y0 == pytest.approx(0.3 / (2 * 0.25), rel=1e-15)
    assert sh.z0 == pytest.approx(-0.1 / 2, rel=1e-15)
    assert dict(sh.contributions)["electric_x"] == pytest.approx(-0.04 / (4 * 1.5**2), rel=1e-15)
    assert sh.energy_offset == pytest.approx(math.fsum(v for _, v in sh.contributions), rel=1e-15)


def test_center_shift_unsolvable():
    with pytest.raises(DegenerateAxis, match="could not be solved analytically"):
        center_shift(sys_(omega_y=0.0, E_y=0.3))
    with pytest.raises(DegenerateAxis):
        center_shift(sys_(omega_x=0.0, omega_z=0.0, B_x=1.0, E_x=0.2))
