"""TOML configuration files for :class:`~ponderomotive.model.SimConfig`.

Layout::

    [cavity]
    length_m = 0.01
    input_transmission_ppm = 220
    round_trip_loss_ppm = 250
    wavelength_m = 1.064e-6

    [carrier]
    power_w = 0.2816
    detuning = 0.3

    [subcarrier]
    power_w = 0.2238
    detuning = -1.5

    [mechanics]
    quality_factor = 17000        # optional, applied to every default mode
    fundamental_hz = 876          # optional
    fundamental_mass_kg = 2e-11   # optional
    modes_csv = "modes.csv"       # optional, relative to the config file

    [environment]
    temperature_k = 295
    zero_point = true

Omitted keys keep their defaults. Unknown sections or keys are errors.
"""
from __future__ import annotations

from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, InputError
from .model import CarrierConfig, SimConfig
from .modes import MechanicalMode, ModeTable, default_modes, load_modes

__all__ = ["load_config", "config_from_dict", "parse_config", "dump_config"]

_SCHEMA = {
    "cavity": {"length_m", "input_transmission_ppm", "round_trip_loss_ppm", "wavelength_m"},
    "carrier": {"power_w", "detuning"},
    "subcarrier": {"power_w", "detuning"},
    "mechanics": {"quality_factor", "fundamental_hz", "fundamental_mass_kg", "modes_csv", "modes"},
    "environment": {"temperature_k", "zero_point"},
}


def _num(section: dict, key: str, where: str, default: float) -> float:
    if key not in section:
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {val!r}", field=f"{where}.{key}")
    return float(val)


def config_from_dict(data: dict, base_dir: Path | None = None) -> SimConfig:
    """Build a :class:`SimConfig` from parsed TOML data.

    Raises
    ------
    ConfigError
        Unknown section or key, wrong type, or a value outside its range;
        ``field`` names the offending entry.
    """
    base = SimConfig()
    for sec, body in data.items():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", field=sec)
        if not isinstance(body, dict):
            raise ConfigError(f"[{sec}] must be a table", field=sec)
        extra = set(body) - _SCHEMA[sec]
        if extra:
            key = sorted(extra)[0]
            raise ConfigError(f"unknown key {sec}.{key}", field=f"{sec}.{key}")

    cav = data.get("cavity", {})
    env = data.get("environment", {})
    mech = data.get("mechanics", {})

    carriers = []
    for name, dflt in (("carrier", base.carrier), ("subcarrier", base.subcarrier)):
        sec = data.get(name, {})
        p = _num(sec, "power_w", name, dflt.circulating_power)
        d = _num(sec, "detuning", name, dflt.detuning)
        try:
            carriers.append(CarrierConfig(p, d))
        except ConfigError as exc:
            raise ConfigError(str(exc), field=f"{name}.{exc.field}") from None

    modes = _modes_from(mech, base_dir)

    zp = env.get("zero_point", base.zero_point)
    if not isinstance(zp, bool):
        raise ConfigError("environment.zero_point must be true or false", field="environment.zero_point")

    fields = {
        "temperature": ("environment.temperature_k", _num(env, "temperature_k", "environment", base.temperature)),
        "cavity_length": ("cavity.length_m", _num(cav, "length_m", "cavity", base.cavity_length)),
        "input_transmission": (
            "cavity.input_transmission_ppm",
            _num(cav, "input_transmission_ppm", "cavity", base.input_transmission),
        ),
        "round_trip_loss": (
            "cavity.round_trip_loss_ppm",
            _num(cav, "round_trip_loss_ppm", "cavity", base.round_trip_loss),
        ),
        "wavelength": ("cavity.wavelength_m", _num(cav, "wavelength_m", "cavity", base.wavelength)),
    }
    try:
        return SimConfig(
            carrier=carriers[0],
            subcarrier=carriers[1],
            modes=modes,
            zero_point=zp,
            **{k: v for k, (_, v) in fields.items()},
        )
    except ConfigError as exc:
        path = fields.get(exc.field, (exc.field,))[0]
        raise ConfigError(f"{path}: {exc}", field=path) from None


def _modes_from(mech: dict, base_dir: Path | None) -> ModeTable:
    if "modes_csv" in mech and "modes" in mech:
        raise ConfigError("give either mechanics.modes_csv or mechanics.modes, not both", field="mechanics")
    q = mech.get("quality_factor")
    if "modes_csv" in mech:
        path = Path(mech["modes_csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"mode table not found: {path}", field="mechanics.modes_csv")
        table = load_modes(path)
    elif "modes" in mech:
        rows = mech["modes"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError("mechanics.modes must be a nonempty array of tables", field="mechanics.modes")
        try:
            table = ModeTable(
                tuple(
                    MechanicalMode(r["label"], r["frequency_hz"], r["quality_factor"], r["effective_mass_kg"])
                    for r in rows
                ),
                "config",
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"mechanics.modes entry is missing {exc}", field="mechanics.modes") from None
        except InputError as exc:
            raise ConfigError(f"mechanics.modes: {exc}", field="mechanics.modes") from None
    else:
        kw = {}
        if "fundamental_hz" in mech:
            kw["fundamental_hz"] = _num(mech, "fundamental_hz", "mechanics", 0.0)
        if "fundamental_mass_kg" in mech:
            kw["fundamental_mass"] = _num(mech, "fundamental_mass_kg", "mechanics", 0.0)
        try:
            table = default_modes(**kw)
        except InputError as exc:
            raise ConfigError(f"mechanics: {exc}", field="mechanics") from None
    if q is not None:
        qv = _num(mech, "quality_factor", "mechanics", 0.0)
        try:
            table = table.scaled(quality_factor=qv)
        except InputError as exc:
            raise ConfigError(f"mechanics.quality_factor: {exc}", field="mechanics.quality_factor") from None
    return table


def parse_config(text: str, base_dir: Path | None = None) -> SimConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return config_from_dict(data, base_dir)


def load_config(path) -> SimConfig:
    """Read a TOML configuration file.

    Raises
    ------
    ConfigError
        Missing file, syntax error or invalid value.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", field="config") from None
    return parse_config(text, path.parent)


def dump_config(cfg: SimConfig) -> str:
    """Serialize a configuration to TOML with the modes written inline."""
    g = lambda x: format(float(x), ".17g")  # noqa: E731
    lines = [
        "[cavity]",
        f"length_m = {g(cfg.cavity_length)}",
        f"input_transmission_ppm = {g(cfg.input_transmission)}",
        f"round_trip_loss_ppm = {g(cfg.round_trip_loss)}",
        f"wavelength_m = {g(cfg.wavelength)}",
        "",
        "[carrier]",
        f"power_w = {g(cfg.carrier.circulating_power)}",
        f"detuning = {g(cfg.carrier.detuning)}",
        "",
        "[subcarrier]",
        f"power_w = {g(cfg.subcarrier.circulating_power)}",
        f"detuning = {g(cfg.subcarrier.detuning)}",
        "",
        "[mechanics]",
        "modes = [",
    ]
    for m in cfg.modes:
        lines.append(
            f'  {{ label = "{m.label}", frequency_hz = {g(m.resonance_frequency)}, '
            f"quality_factor = {g(m.quality_factor)}, effective_mass_kg = {g(m.effective_mass)} }},"
        )
    lines += [
        "]",
        "",
        "[environment]",
        f"temperature_k = {g(cfg.temperature)}",
        f"zero_point = {'true' if cfg.zero_point else 'false'}",
        "",
    ]
    return "\n".join(lines)
