"""Mechanical mode tables for the cantilever mirror.

CSV schema: ``label,frequency_hz,quality_factor,effective_mass_kg``, UTF-8,
with ``#`` comment lines.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ParseError, ValidationError

__all__ = [
    "MechanicalMode",
    "ModeTable",
    "load_modes",
    "parse_modes",
    "save_modes",
    "format_modes",
    "default_modes",
    "CSV_HEADER",
]

CSV_HEADER = ("label", "frequency_hz", "quality_factor", "effective_mass_kg")

# Calibration defaults for the built-in table.
FUNDAMENTAL_HZ = 876.0
FUNDAMENTAL_MASS_KG = 20e-12
DEFAULT_Q = 17000.0
YAW_HZ = 4300.0
YAW_MASS_FACTOR = 25.0
TRANSLATION_YAW_HZ = 54000.0
TRANSLATION_YAW_MASS_FACTOR = 40.0
TRANSLATION_YAW_Q = 8000.0


@dataclass(frozen=True)
class MechanicalMode:
    """One resonance of the mirror.

    Parameters
    ----------
    label : str
    resonance_frequency : float
        Hz, positive.
    quality_factor : float
        Positive; sets the structural loss angle ``1/Q``.
    effective_mass : float
        kg, positive.
    """

    label: str
    resonance_frequency: float
    quality_factor: float
    effective_mass: float

    def __post_init__(self):
        for name in ("resonance_frequency", "quality_factor", "effective_mass"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0:
                raise ValidationError(f"mode {self.label!r}: {name} must be positive, got {val}")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "label", str(self.label))

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.resonance_frequency


@dataclass(frozen=True)
class ModeTable:
    """Ordered, validated list of modes.

    Frequencies are strictly increasing and labels unique; construction
    sorts by frequency before checking.
    """

    modes: tuple = ()
    source: str = "builtin"

    def __post_init__(self):
        modes = tuple(sorted(self.modes, key=lambda m: m.resonance_frequency))
        if not modes:
            raise ValidationError("mode table is empty")
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            dup = sorted({l for l in labels if labels.count(l) > 1})
            raise ValidationError(f"duplicate mode labels: {', '.join(dup)}")
        for a, b in zip(modes, modes[1:]):
            if not b.resonance_frequency > a.resonance_frequency:
                raise ValidationError(
                    f"frequencies must be strictly increasing: {a.label!r} and {b.label!r} "
                    f"share {a.resonance_frequency} Hz"
                )
        object.__setattr__(self, "modes", modes)

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def frequencies(self) -> list[float]:
        return [m.resonance_frequency for m in self.modes]

    def with_modes(self, modes: Iterable[MechanicalMode], source: str | None = None) -> "ModeTable":
        return ModeTable(tuple(modes), self.source if source is None else source)

    def scaled(self, *, quality_factor: float | None = None, mass_factor: float = 1.0) -> "ModeTable":
        """Copy with every Q replaced and/or every mass multiplied."""
        new = [
            MechanicalMode(
                m.label,
                m.resonance_frequency,
                m.quality_factor if quality_factor is None else quality_factor,
                m.effective_mass * mass_factor,
            )
            for m in self.modes
        ]
        return self.with_modes(new)


def default_modes(
    fundamental_hz: float = FUNDAMENTAL_HZ,
    fundamental_mass: float = FUNDAMENTAL_MASS_KG,
    quality_factor: float = DEFAULT_Q,
    overrides: dict | None = None,
) -> ModeTable:
    """Built-in cantilever table: fundamental, yaw at 4.3 kHz, translation/yaw at 54 kHz.

    Higher modes carry effective masses scaled from the fundamental. The
    54 kHz mode defaults to a lower Q; ``overrides`` maps a label to a dict
    of replacement field values.
    """
    rows = [
        ("fundamental", fundamental_hz, quality_factor, fundamental_mass),
        ("yaw", YAW_HZ, quality_factor, fundamental_mass * YAW_MASS_FACTOR),
        ("translation_yaw", TRANSLATION_YAW_HZ, TRANSLATION_YAW_Q, fundamental_mass * TRANSLATION_YAW_MASS_FACTOR),
    ]
    overrides = overrides or {}
    modes = []
    for label, f, q, m in rows:
        o = overrides.get(label, {})
        modes.append(
            MechanicalMode(
                label,
                o.get("resonance_frequency", f),
                o.get("quality_factor", q),
                o.get("effective_mass", m),
            )
        )
    return ModeTable(tuple(modes), "builtin")


def parse_modes(text: str, source: str = "<string>") -> ModeTable:
    """Parse CSV text into a validated :class:`ModeTable`.

    Raises
    ------
    ParseError
        Malformed header, wrong column count or non-numeric field; carries
        the 1-based line number.
    ValidationError
        Empty table, duplicates or nonpositive values.
    """
    header_seen = False
    modes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if not header_seen:
            if tuple(f.lower() for f in fields) != CSV_HEADER:
                raise ParseError(f"expected header {','.join(CSV_HEADER)}", line=lineno, token=line)
            header_seen = True
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, found {len(fields)}", line=lineno)
        label = fields[0]
        vals = []
        for tok in fields[1:]:
            try:
                vals.append(float(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", line=lineno, token=tok) from None
        try:
            modes.append(MechanicalMode(label, *vals))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    if not header_seen:
        raise ParseError("missing CSV header", line=1)
    return ModeTable(tuple(modes), source)


def load_modes(path) -> ModeTable:
    """Load and validate a mode table CSV file."""
    path = Path(path)
    return parse_modes(path.read_text(encoding="utf-8"), source=str(path))


def format_modes(table: ModeTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for m in table:
        w.writerow(
            [
                m.label,
                format(m.resonance_frequency, ".17g"),
                format(m.quality_factor, ".17g"),
                format(m.effective_mass, ".17g"),
            ]
        )
    return buf.getvalue()


def save_modes(table: ModeTable, path) -> None:
    Path(path).write_text(format_modes(table), encoding="utf-8")
