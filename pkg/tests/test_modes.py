import pytest

from ponderomotive.errors import ParseError, ValidationError
from ponderomotive.modes import (
    MechanicalMode,
    ModeTable,
    default_modes,
    format_modes,
    load_modes,
    parse_modes,
    save_modes,
)

CSV = """# cantilever modes
label,frequency_hz,quality_factor,effective_mass_kg
yaw,4300,17000,5e-10
fundamental,876,17000,2e-11
twist,54000,8000,8e-10
"""


def test_parse_sorted():
    t = parse_modes(CSV)
    assert len(t) == 3
    assert [m.label for m in t] == ["fundamental", "yaw", "twist"]
    assert t.frequencies == [876.0, 4300.0, 54000.0]


def test_duplicate_frequency():
    with pytest.raises(ValidationError):
        parse_modes(CSV + "again,876,100,1e-11\n")


def test_duplicate_label():
    with pytest.raises(ValidationError):
        parse_modes(CSV + "yaw,900,100,1e-11\n")


def test_header_only():
    with pytest.raises(ValidationError):
        parse_modes("label,frequency_hz,quality_factor,effective_mass_kg\n")


def test_bad_header():
    with pytest.raises(ParseError) as ei:
        parse_modes("name,f,q,m\n")
    assert ei.value.line == 1


def test_bad_number():
    with pytest.raises(ParseError) as ei:
        parse_modes(CSV + "x,abc,1,1\n")
    assert ei.value.line == 6 and ei.value.token == "abc"


def test_wrong_columns():
    with pytest.raises(ParseError):
        parse_modes(CSV + "x,1,2\n")


@pytest.mark.parametrize("field", ["resonance_frequency", "quality_factor", "effective_mass"])
def test_nonpositive(field):
    kw = dict(label="m", resonance_frequency=1.0, quality_factor=1.0, effective_mass=1.0)
    kw[field] = 0.0
    with pytest.raises(ValidationError):
        MechanicalMode(**kw)


def test_default_table():
    a, b = default_modes(), default_modes()
    assert a == b
    assert 4300.0 in a.frequencies and 54000.0 in a.frequencies
    assert a[0].resonance_frequency < 4300.0


def test_default_overrides():
    t = default_modes(overrides={"yaw": {"quality_factor": 123.0}})
    assert t[1].quality_factor == 123.0


def test_round_trip(tmp_path):
    t = default_modes()
    save_modes(t, tmp_path / "m.csv")
    back = load_modes(tmp_path / "m.csv")
    assert back.modes == t.modes
    assert format_modes(back) == format_modes(t)


def test_scaled():
    t = default_modes().scaled(quality_factor=10.0, mass_factor=2.0)
    assert all(m.quality_factor == 10.0 for m in t)
    assert t[0].effective_mass == 2 * default_modes()[0].effective_mass


def test_empty_table():
    with pytest.raises(ValidationError):
        ModeTable(())
