"""Gridded parameter sweeps, peak finding and cavity-length profiles.

A sweep varies one or two parameters. When neither axis is the sideband
frequency, every cell is evaluated at a fixed frequency (20 kHz by default).
Cells sharing all non-frequency parameters are evaluated together as one
frequency batch; batches are independent, so the result does not depend on
the number of workers or the evaluation order.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .duan import duan_check
from .errors import ConfigError, ModelError
from .gaussian import CovarianceMatrix, log_negativity_batch
from .model import (
    CarrierConfig,
    SimConfig,
    StabilityReport,
    output_covariance_batch,
    quantum_thermal_ratio,
    stability_check,
    uncertainty_min_eigenvalue,
)

__all__ = [
    "PARAMETERS",
    "SweepAxis",
    "SweepResult",
    "PointReport",
    "PeakResult",
    "LengthProfile",
    "parse_axis",
    "apply_parameter",
    "evaluate_point",
    "evaluate_frequencies",
    "run_sweep",
    "find_peak",
    "cavity_length_profile",
    "CSV_COLUMNS",
]

DEFAULT_FREQUENCY_HZ = 20e3
PHYSICAL_TOL = 1e-9
CSV_COLUMNS = ("axis1", "axis2", "E_N", "duan_R", "qt_ratio", "stable")

PARAMETERS = {
    "frequency": "sideband frequency [Hz]",
    "temperature": "bath temperature [K]",
    "loss_ppm": "round-trip loss [ppm]",
    "cavity_length": "cavity length [m]",
    "power1": "carrier circulating power [W]",
    "power2": "subcarrier circulating power [W]",
    "detuning1": "carrier detuning [half-linewidths]",
    "detuning2": "subcarrier detuning [half-linewidths]",
    "quality_factor": "Q of every mechanical mode",
    "input_transmission_ppm": "input coupler transmission [ppm]",
    "wavelength": "laser wavelength [m]",
}
_ALIASES = {
    "length": "cavity_length",
    "loss": "loss_ppm",
    "round_trip_loss": "loss_ppm",
    "temperature_k": "temperature",
    "freq": "frequency",
    "frequency_hz": "frequency",
    "input_transmission": "input_transmission_ppm",
    "q": "quality_factor",
}


def _canonical(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {name!r}; choose from {', '.join(PARAMETERS)}", field=name)
    return key


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension.

    ``points == 1`` is accepted when ``start == stop`` and gives a single
    value, which makes point evaluations expressible as sweeps.
    """

    parameter: str
    scale: str = "log"
    start: float = 1.0
    stop: float = 10.0
    points: int = 64

    def __post_init__(self):
        object.__setattr__(self, "parameter", _canonical(self.parameter))
        scale = str(self.scale).lower()
        if scale not in ("linear", "log"):
            raise ConfigError(f"axis scale must be 'linear' or 'log', got {self.scale!r}", field="scale")
        object.__setattr__(self, "scale", scale)
        start, stop, pts = float(self.start), float(self.stop), int(self.points)
        if pts < 1 or pts != self.points:
            raise ConfigError(f"axis points must be a positive integer, got {self.points!r}", field="points")
        if pts == 1:
            if start != stop:
                raise ConfigError("a 1-point axis needs start == stop", field="points")
        elif not start < stop:
            raise ConfigError(f"axis needs start < stop, got {start} >= {stop}", field="start")
        if scale == "log" and not start > 0:
            raise ConfigError("log axis needs a positive start", field="start")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "stop", stop)
        object.__setattr__(self, "points", pts)

    @property
    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "scale": self.scale,
            "start": self.start,
            "stop": self.stop,
            "points": self.points,
            "values": self.values.tolist(),
        }

    def spec(self) -> str:
        return f"{self.parameter}:{self.scale}:{self.start!r}:{self.stop!r}:{self.points}"


def parse_axis(text: str) -> SweepAxis:
    """Parse ``param:scale:start:stop:points``.

    >>> parse_axis("frequency:log:1e3:1e5:64").points
    64
    """
    parts = text.split(":")
    if len(parts) != 5:
        raise ConfigError(f"axis spec {text!r} must look like param:scale:start:stop:points", field=text)
    name, scale, a, b, n = parts
    try:
        start, stop = float(a), float(b)
    except ValueError:
        raise ConfigError(f"axis spec {text!r}: start/stop must be numbers", field=text) from None
    try:
        points = int(n)
    except ValueError:
        raise ConfigError(f"axis spec {text!r}: points must be an integer", field=text) from None
    return SweepAxis(name, scale, start, stop, points)


def apply_parameter(cfg: SimConfig, parameter: str, value: float) -> SimConfig:
    """Return ``cfg`` with one sweep parameter overridden (not frequency)."""
    p = _canonical(parameter)
    value = float(value)
    if p == "temperature":
        return cfg.replace(temperature=value)
    if p == "loss_ppm":
        return cfg.replace(round_trip_loss=value)
    if p == "cavity_length":
        return cfg.replace(cavity_length=value)
    if p == "input_transmission_ppm":
        return cfg.replace(input_transmission=value)
    if p == "wavelength":
        return cfg.replace(wavelength=value)
    if p == "power1":
        return cfg.replace(carrier=CarrierConfig(value, cfg.carrier.detuning))
    if p == "power2":
        return cfg.replace(subcarrier=CarrierConfig(value, cfg.subcarrier.detuning))
    if p == "detuning1":
        return cfg.replace(carrier=CarrierConfig(cfg.carrier.circulating_power, value))
    if p == "detuning2":
        return cfg.replace(subcarrier=CarrierConfig(cfg.subcarrier.circulating_power, value))
    if p == "quality_factor":
        return cfg.replace(modes=cfg.modes.scaled(quality_factor=value))
    raise ConfigError(f"{parameter!r} cannot be applied to a configuration", field=parameter)


# --- point evaluation --------------------------------------------------------


def _stability_key(cfg: SimConfig) -> SimConfig:
    # the loop gain does not depend on the bath
    return cfg.replace(temperature=0.0, zero_point=True)


def evaluate_frequencies(cfg: SimConfig, frequencies_hz, stability: StabilityReport | None = None) -> dict:
    """Evaluate every measure for one configuration over a frequency batch.

    Returns a dict of arrays keyed ``V, E_N, nonphysical, duan_R,
    qt_ratio, physical`` plus the scalar ``stable`` flag and a list of
    per-cell diagnostic strings. Model errors are captured, never raised.
    """
    f = np.asarray(frequencies_hz, dtype=float)
    n = f.size
    out = {
        "V": np.full((n, 4, 4), np.nan),
        "E_N": np.zeros(n),
        "nonphysical": np.zeros(n, dtype=bool),
        "duan_R": np.full(n, np.nan),
        "qt_ratio": np.full(n, np.nan),
        "physical": np.zeros(n, dtype=bool),
        "diagnostics": [""] * n,
        "stable": False,
    }
    try:
        rep = stability if stability is not None else stability_check(cfg)
        out["stable"] = bool(rep.stable)
    except ModelError as exc:
        out["diagnostics"] = [f"stability: {exc}"] * n
    try:
        V = output_covariance_batch(cfg, 2.0 * math.pi * f)
    except (ModelError, ValueError) as exc:
        out["diagnostics"] = [f"{type(exc).__name__}: {exc}"] * n
        return out
    en, flag = log_negativity_batch(V)
    out["V"] = V
    out["E_N"] = en
    out["nonphysical"] = flag
    out["physical"] = uncertainty_min_eigenvalue(V) >= -PHYSICAL_TOL
    if cfg.temperature > 0:
        out["qt_ratio"] = np.asarray(quantum_thermal_ratio(cfg, 2.0 * math.pi * f), dtype=float)
    diags = list(out["diagnostics"])
    for i in range(n):
        verdict = duan_check(V[i])
        out["duan_R"][i] = verdict.R
        notes = []
        if not verdict.applicable:
            notes.append(f"duan: {verdict.reason}")
        if flag[i]:
            notes.append("nonphysical for negativity")
        if not out["physical"][i]:
            notes.append("uncertainty check failed")
        if notes:
            diags[i] = "; ".join(filter(None, [diags[i]] + notes))
    out["diagnostics"] = diags
    return out


@dataclass
class PointReport:
    """All measures at one configuration and frequency."""

    frequency_hz: float
    V: CovarianceMatrix
    E_N: float
    nonphysical: bool
    duan_R: float
    qt_ratio: float
    stability: StabilityReport
    physical: bool

    def to_dict(self) -> dict:
        return {
            "frequency_hz": self.frequency_hz,
            "V": self.V.entries.tolist(),
            "E_N": self.E_N,
            "nonphysical": self.nonphysical,
            "duan_R": _json_float(self.duan_R),
            "qt_ratio": _json_float(self.qt_ratio),
            "physical": self.physical,
            "stability": self.stability.to_dict(),
        }


def evaluate_point(cfg: SimConfig, frequency_hz: float = DEFAULT_FREQUENCY_HZ) -> PointReport:
    """Covariance, negativity, Duan metric, noise ratio and stability at one frequency.

    Raises
    ------
    ModelError
        If the model cannot be evaluated at this point.
    """
    rep = stability_check(cfg)
    V = output_covariance_batch(cfg, [2.0 * math.pi * frequency_hz])
    row = evaluate_frequencies(cfg, [frequency_hz], stability=rep)
    return PointReport(
        float(frequency_hz),
        CovarianceMatrix(V[0]),
        float(row["E_N"][0]),
        bool(row["nonphysical"][0]),
        float(row["duan_R"][0]),
        float(row["qt_ratio"][0]),
        rep,
        bool(row["physical"][0]),
    )


# --- sweeps ------------------------------------------------------------------


@dataclass
class SweepResult:
    """Gridded sweep output.

    Arrays have shape ``(len(axes[0]),)`` or ``(len(axes[0]), len(axes[1]))``;
    ``V`` has two extra trailing dimensions of size 4.
    """

    axes: tuple
    base: SimConfig
    frequency_hz: float | None
    E_N: np.ndarray
    duan_R: np.ndarray
    qt_ratio: np.ndarray
    stable: np.ndarray
    nonphysical: np.ndarray
    physical: np.ndarray
    V: np.ndarray
    diagnostics: list = field(default_factory=list)

    @property
    def shape(self) -> tuple:
        return self.E_N.shape

    def axis_index(self, along) -> int:
        if isinstance(along, int):
            if not 0 <= along < len(self.axes):
                raise IndexError(f"axis {along} out of range")
            return along
        name = _canonical(along)
        for i, ax in enumerate(self.axes):
            if ax.parameter == name:
                return i
        raise KeyError(f"sweep has no axis {along!r}")

    def rows(self):
        """Yield long-format records ``(axis1, axis2, E_N, duan_R, qt_ratio, stable)``."""
        v0 = self.axes[0].values
        if len(self.axes) == 1:
            for i in range(v0.size):
                yield (v0[i], None, self.E_N[i], self.duan_R[i], self.qt_ratio[i], bool(self.stable[i]))
        else:
            v1 = self.axes[1].values
            for i in range(v0.size):
                for j in range(v1.size):
                    yield (
                        v0[i],
                        v1[j],
                        self.E_N[i, j],
                        self.duan_R[i, j],
                        self.qt_ratio[i, j],
                        bool(self.stable[i, j]),
                    )

    def to_csv(self, path=None) -> str:
        """Long-format CSV; ``#`` lines before the header record the context."""
        buf = io.StringIO()
        buf.write("# " + " ".join(ax.spec() for ax in self.axes) + "\n")
        if self.frequency_hz is not None:
            buf.write(f"# frequency_hz={self.frequency_hz!r}\n")
        buf.write(f"# reference_loss_ppm={self.base.round_trip_loss!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for a1, a2, en, r, q, st in self.rows():
            w.writerow([_g(a1), "" if a2 is None else _g(a2), _g(en), _g(r), _g(q), int(st)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self) -> dict:
        return {
            "axes": [ax.to_dict() for ax in self.axes],
            "frequency_hz": self.frequency_hz,
            "reference_loss_ppm": self.base.round_trip_loss,
            "base_config": self.base.to_dict(),
            "shape": list(self.shape),
            "E_N": self.E_N.tolist(),
            "duan_R": _nan_to_none(self.duan_R),
            "qt_ratio": _nan_to_none(self.qt_ratio),
            "stable": self.stable.tolist(),
            "nonphysical": self.nonphysical.tolist(),
            "physical": self.physical.tolist(),
            "diagnostics": self.diagnostics,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=1, allow_nan=False)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _g(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else format(x, ".17g")


def _json_float(x):
    x = float(x)
    return None if not math.isfinite(x) else x


def _nan_to_none(a: np.ndarray):
    return np.where(np.isfinite(a), a, None).tolist()


def _eval_task(task):
    cfg, freqs = task
    return evaluate_frequencies(cfg, freqs)


def run_sweep(
    base: SimConfig,
    axes: Sequence[SweepAxis],
    workers: int = 1,
    frequency_hz: float = DEFAULT_FREQUENCY_HZ,
) -> SweepResult:
    """Evaluate all measures on a 1-D or 2-D parameter grid.

    Parameters
    ----------
    base : SimConfig
        Values not on an axis come from here.
    axes : sequence of SweepAxis
        One or two axes over distinct parameters.
    workers : int, optional
        Process count; results are identical for every value.
    frequency_hz : float, optional
        Evaluation frequency when no axis is ``frequency``.

    Returns
    -------
    SweepResult
    """
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ConfigError("a sweep needs one or two axes", field="axes")
    if len(axes) == 2 and axes[0].parameter == axes[1].parameter:
        raise ConfigError("sweep axes must reference distinct parameters", field="axes")
    shape = tuple(ax.points for ax in axes)
    freq_axis = next((i for i, ax in enumerate(axes) if ax.parameter == "frequency"), None)
    other = [i for i in range(len(axes)) if i != freq_axis]

    # one task per combination of the non-frequency axes
    tasks, slots = [], []
    if freq_axis is None:
        freqs = np.array([frequency_hz])
    else:
        freqs = axes[freq_axis].values
    stab_cache: dict = {}
    for combo in itertools.product(*(range(axes[i].points) for i in other)):
        cfg = base
        for i, ci in zip(other, combo):
            cfg = apply_parameter(cfg, axes[i].parameter, axes[i].values[ci])
        tasks.append((cfg, freqs))
        slots.append(combo)

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = []
        for cfg, f in tasks:
            key = _stability_key(cfg)
            if key not in stab_cache:
                try:
                    stab_cache[key] = stability_check(cfg)
                except ModelError:
                    stab_cache[key] = None
            results.append(evaluate_frequencies(cfg, f, stability=stab_cache[key]))

    E_N = np.zeros(shape)
    R = np.full(shape, np.nan)
    Q = np.full(shape, np.nan)
    stable = np.zeros(shape, dtype=bool)
    nonphys = np.zeros(shape, dtype=bool)
    physical = np.zeros(shape, dtype=bool)
    V = np.full(shape + (4, 4), np.nan)
    diags = np.empty(shape, dtype=object)
    for slot, res in zip(slots, results):
        for k in range(freqs.size):
            idx = [0] * len(axes)
            for i, s in zip(other, slot):
                idx[i] = s
            if freq_axis is not None:
                idx[freq_axis] = k
            idx = tuple(idx)
            E_N[idx] = res["E_N"][k]
            R[idx] = res["duan_R"][k]
            Q[idx] = res["qt_ratio"][k]
            stable[idx] = res["stable"]
            nonphys[idx] = res["nonphysical"][k]
            physical[idx] = res["physical"][k]
            V[idx] = res["V"][k]
            diags[idx] = res["diagnostics"][k]
    return SweepResult(
        axes,
        base,
        None if freq_axis is not None else float(frequency_hz),
        E_N,
        R,
        Q,
        stable,
        nonphys,
        physical,
        V,
        diags.tolist(),
    )


# --- peaks -------------------------------------------------------------------


@dataclass(frozen=True)
class PeakResult:
    """Grid maximum of ``E_N``.

    ``location`` maps parameter names to grid values; ``refined_location``
    and ``refined_value`` come from a parabola through the neighbours along
    ``along`` (in log coordinates on log axes).
    """

    index: tuple
    location: dict
    value: float
    refined_location: float
    refined_value: float
    all_zero: bool

    def to_dict(self) -> dict:
        return {
            "index": list(self.index),
            "location": self.location,
            "value": self.value,
            "refined_location": self.refined_location,
            "refined_value": self.refined_value,
            "all_zero": self.all_zero,
        }


def find_peak(result: SweepResult, along=0, at: int | None = None) -> PeakResult:
    """Locate the largest ``E_N``.

    Parameters
    ----------
    result : SweepResult
    along : int or str, optional
        Axis used for the parabolic refinement.
    at : int, optional
        For 2-D sweeps, restrict to the slice where the other axis has this
        index. Without it the whole grid is searched.

    Notes
    -----
    Ties go to the first cell in axis order, i.e. the lower parameter value.
    """
    k = result.axis_index(along)
    data = result.E_N
    if data.size == 0:
        raise ValueError("empty sweep result")
    if data.ndim == 2 and at is not None:
        sl = [slice(None), slice(None)]
        sl[1 - k] = at
        line = data[tuple(sl)]
        i = int(np.argmax(line))
        idx = [0, 0]
        idx[k], idx[1 - k] = i, at
        idx = tuple(idx)
    else:
        idx = np.unravel_index(int(np.argmax(data)), data.shape)
        idx = tuple(int(i) for i in idx)
    value = float(data[idx])
    location = {ax.parameter: float(ax.values[i]) for ax, i in zip(result.axes, idx)}
    ax = result.axes[k]
    vals = ax.values
    x = np.log(vals) if ax.scale == "log" else vals
    i = idx[k]
    ref_loc, ref_val = float(vals[i]), value
    if 0 < i < vals.size - 1:
        def at_(j):
            t = list(idx)
            t[k] = j
            return float(data[tuple(t)])

        y0, ym, yp = value, at_(i - 1), at_(i + 1)
        curv = ym - 2 * y0 + yp
        if curv < 0:
            off = float(np.clip(0.5 * (ym - yp) / curv, -0.5, 0.5))
            step = x[i + 1] - x[i] if off >= 0 else x[i] - x[i - 1]
            xr = x[i] + off * step
            ref_loc = float(np.exp(xr)) if ax.scale == "log" else float(xr)
            ref_val = y0 - 0.25 * (ym - yp) * off
    return PeakResult(idx, location, value, ref_loc, ref_val, bool(np.all(data == 0)))


# --- cavity length -----------------------------------------------------------


@dataclass
class LengthProfile:
    """``E_N`` at a fixed frequency versus cavity length, one row per temperature."""

    lengths: np.ndarray
    temperatures: np.ndarray
    frequency_hz: float
    E_N: np.ndarray

    def profile(self, temperature: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.temperatures - temperature)))
        if not math.isclose(self.temperatures[i], temperature, rel_tol=1e-12):
            raise KeyError(f"no profile at T = {temperature} K")
        return self.E_N[i]

    def relative_difference(self, t_a: float, t_b: float) -> np.ndarray:
        """``|E_a - E_b| / max(E_a, E_b)`` per length; 0 where both vanish."""
        a, b = self.profile(t_a), self.profile(t_b)
        top = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(top > 0, np.abs(a - b) / np.where(top > 0, top, 1.0), 0.0)

    @property
    def saturation_4k(self) -> float | None:
        """Largest relative gap between the 1 K and 4 K profiles, if both exist."""
        try:
            return float(np.max(self.relative_difference(1.0, 4.0)))
        except KeyError:
            return None

    def to_dict(self) -> dict:
        return {
            "lengths_m": self.lengths.tolist(),
            "temperatures_k": self.temperatures.tolist(),
            "frequency_hz": self.frequency_hz,
            "E_N": self.E_N.tolist(),
            "saturation_4k": self.saturation_4k,
        }


def cavity_length_profile(
    base: SimConfig,
    lengths: Sequence[float],
    temperatures: Sequence[float],
    frequency_hz: float = DEFAULT_FREQUENCY_HZ,
) -> LengthProfile:
    """``E_N`` at ``frequency_hz`` over the product of lengths and temperatures."""
    L = np.asarray(lengths, dtype=float)
    T = np.asarray(temperatures, dtype=float)
    if np.any(~(L > 0)):
        raise ConfigError("cavity lengths must be positive", field="lengths")
    out = np.zeros((T.size, L.size))
    w = [2.0 * math.pi * frequency_hz]
    for i, t in enumerate(T):
        for j, length in enumerate(L):
            cfg = base.replace(temperature=float(t), cavity_length=float(length))
            try:
                V = output_covariance_batch(cfg, w)
            except ModelError:
                out[i, j] = np.nan
                continue
            out[i, j] = log_negativity_batch(V)[0][0]
    return LengthProfile(L, T, float(frequency_hz), out)
