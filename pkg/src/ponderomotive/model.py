"""Linearized two-carrier optomechanical cavity in the two-photon picture.

One cavity holds two orthogonally polarized carriers that share a movable
cantilever mirror. Each carrier's sideband quadratures ``(X, Y)`` (amplitude,
phase) propagate through its own detuned cavity resolvent; radiation pressure
from both amplitude quadratures drives the mirror, and the mirror motion
writes back onto both phase quadratures. Solving that loop exactly at every
sideband frequency gives a linear map from the eight vacuum ports (coupler and
loss port per carrier) plus the external force to the four output quadratures.

Conventions
-----------
* Fourier convention ``x(t) ~ x(Omega) exp(+i Omega t)``, so the mechanical
  susceptibility is ``1/(m (Omega_k^2 - Omega^2 + i Omega_k^2/Q_k))``.
* A positive dimensionless detuning ``d`` places the laser below the cavity
  resonance (red side): ``delta = -d * gamma`` enters the resolvent.
* Vacuum ports carry variance 1/2 per quadrature. Force spectral densities
  are one-sided; they enter the covariance at half weight, the two-sided
  density that matches the port normalization.
* Angular frequencies are in rad/s throughout this module.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

from . import _kernels
from .constants import C_LIGHT, HBAR, K_B
from .errors import ConfigError, GridTooCoarse, SingularSusceptibility, SingularSystem
from .gaussian import CovarianceMatrix, Normalization, symplectic_form
from .modes import MechanicalMode, ModeTable, default_modes

__all__ = [
    "CarrierConfig",
    "SimConfig",
    "Linewidth",
    "TransferModel",
    "StabilityReport",
    "half_linewidth",
    "mech_susceptibility",
    "optical_spring",
    "total_spring",
    "effective_susceptibility",
    "thermal_force_psd",
    "zero_point_force_psd",
    "build_transfer",
    "output_covariance",
    "output_covariance_batch",
    "output_spectral_matrix",
    "sideband_covariance",
    "uncertainty_min_eigenvalue",
    "stability_check",
    "quantum_thermal_ratio",
    "qrpn_force_psd",
]


@dataclass(frozen=True)
class CarrierConfig:
    """Circulating power [W] and detuning in units of the cavity half-linewidth."""

    circulating_power: float
    detuning: float

    def __post_init__(self):
        p = float(self.circulating_power)
        d = float(self.detuning)
        if not math.isfinite(p) or p < 0:
            raise ConfigError(f"circulating_power must be >= 0, got {p}", field="circulating_power")
        if not math.isfinite(d):
            raise ConfigError("detuning must be finite", field="detuning")
        object.__setattr__(self, "circulating_power", p)
        object.__setattr__(self, "detuning", d)


@dataclass(frozen=True)
class SimConfig:
    """Full parameter set for one simulation point.

    Attributes
    ----------
    temperature : float
        Mirror bath temperature [K].
    carrier, subcarrier : CarrierConfig
    round_trip_loss : float
        Round-trip loss excluding the input coupler [ppm].
    cavity_length : float
        [m].
    input_transmission : float
        Input coupler power transmission [ppm].
    wavelength : float
        [m].
    modes : ModeTable
    zero_point : bool
        Include the mechanical bath's zero-point force noise. Needed for the
        output state to stay pure at zero temperature without optical loss.
    """

    temperature: float = 295.0
    carrier: CarrierConfig = CarrierConfig(0.2816, 0.3)
    subcarrier: CarrierConfig = CarrierConfig(0.2238, -1.5)
    round_trip_loss: float = 250.0
    cavity_length: float = 0.01
    input_transmission: float = 220.0
    wavelength: float = 1064e-9
    modes: ModeTable = field(default_factory=default_modes)
    zero_point: bool = True

    def __post_init__(self):
        checks = {
            "temperature": lambda v: v >= 0,
            "round_trip_loss": lambda v: v >= 0,
            "cavity_length": lambda v: v > 0,
            "input_transmission": lambda v: v > 0,
            "wavelength": lambda v: v > 0,
        }
        for name, ok in checks.items():
            try:
                val = float(getattr(self, name))
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be a number", field=name) from None
            if not math.isfinite(val) or not ok(val):
                raise ConfigError(f"{name} out of range: {val}", field=name)
            object.__setattr__(self, name, val)
        for name in ("carrier", "subcarrier"):
            if not isinstance(getattr(self, name), CarrierConfig):
                raise ConfigError(f"{name} must be a CarrierConfig", field=name)
        modes = self.modes
        if not isinstance(modes, ModeTable):
            modes = ModeTable(tuple(modes), "inline")
            object.__setattr__(self, "modes", modes)
        if len(modes) == 0:
            raise ConfigError("modes must be nonempty", field="modes")

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    @property
    def carriers(self) -> tuple[CarrierConfig, CarrierConfig]:
        return (self.carrier, self.subcarrier)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, CarrierConfig):
                val = {"circulating_power": val.circulating_power, "detuning": val.detuning}
            elif isinstance(val, ModeTable):
                val = [
                    {
                        "label": m.label,
                        "frequency_hz": m.resonance_frequency,
                        "quality_factor": m.quality_factor,
                        "effective_mass_kg": m.effective_mass,
                    }
                    for m in val
                ]
            out[f.name] = val
        return out


class Linewidth(NamedTuple):
    gamma: float
    gamma_in: float
    gamma_loss: float


def half_linewidth(cfg: SimConfig) -> Linewidth:
    """Cavity amplitude decay rates ``gamma = c (T_in + L_s) / (4 L)`` [rad/s]."""
    scale = C_LIGHT / (4.0 * cfg.cavity_length)
    g_in = scale * cfg.input_transmission * 1e-6
    g_loss = scale * cfg.round_trip_loss * 1e-6
    return Linewidth(g_in + g_loss, g_in, g_loss)


class _Optics(NamedTuple):
    lw: Linewidth
    coupling: float  # G = omega0 / L
    nbar: tuple
    delta: tuple  # laser-minus-cavity, rad/s
    gx: tuple
    gf: tuple


def _optics(cfg: SimConfig) -> _Optics:
    lw = half_linewidth(cfg)
    omega0 = 2.0 * math.pi * C_LIGHT / cfg.wavelength
    G = omega0 / cfg.cavity_length
    nbar = tuple(2.0 * c.circulating_power * cfg.cavity_length / (HBAR * omega0 * C_LIGHT) for c in cfg.carriers)
    delta = tuple(-c.detuning * lw.gamma for c in cfg.carriers)
    abar = tuple(math.sqrt(n) for n in nbar)
    gx = tuple(math.sqrt(2.0) * G * a for a in abar)
    gf = tuple(HBAR * g for g in gx)
    return _Optics(lw, G, nbar, delta, gx, gf)


def _omega(omega) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(~(w > 0)):
        raise ValueError("sideband frequency must be positive")
    return w


def _squeeze(arr, scalar: bool):
    return arr[0] if scalar else arr


def mech_susceptibility(modes, omega):
    """Bare displacement response of the mirror [m/N].

    Sum over structurally damped modes,
    ``chi = sum_k 1/(m_k (Omega_k^2 - Omega^2 + i Omega_k^2/Q_k))``.

    Parameters
    ----------
    modes : ModeTable or iterable of MechanicalMode
    omega : float or array_like
        Angular frequency [rad/s], positive.
    """
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    chi = np.zeros(w.shape, dtype=complex)
    for m in modes:
        wk2 = m.angular_frequency**2
        chi += 1.0 / (m.effective_mass * (wk2 - w**2 + 1j * wk2 / m.quality_factor))
    return _squeeze(chi, scalar)


def _spring_terms(opt: _Optics, w: np.ndarray) -> np.ndarray:
    s = opt.lw.gamma + 1j * w
    out = np.zeros((2,) + w.shape, dtype=complex)
    for j in range(2):
        d = opt.delta[j]
        out[j] = 2.0 * HBAR * opt.coupling**2 * opt.nbar[j] * d / (s * s + d * d)
    return out


def optical_spring(carrier: CarrierConfig, cfg: SimConfig, omega):
    """Optical spring constant of one carrier [N/m].

    ``K = 2 hbar G^2 N delta / ((gamma + i Omega)^2 + delta^2)`` with
    ``delta = -d gamma``. Positive values stiffen the mirror; a carrier on
    the blue side (``d < 0``) gives a positive static spring.
    """
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    single = cfg.replace(carrier=carrier, subcarrier=CarrierConfig(0.0, 0.0))
    k = _spring_terms(_optics(single), w)[0]
    return _squeeze(k, scalar)


def total_spring(cfg: SimConfig, omega):
    """Sum of both carriers' optical springs [N/m]."""
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    return _squeeze(_spring_terms(_optics(cfg), w).sum(axis=0), scalar)


def effective_susceptibility(cfg: SimConfig, omega):
    """Spring-modified susceptibility ``1/(1/chi + K_total)`` [m/N].

    Raises
    ------
    SingularSusceptibility
        If ``|1/chi + K| < 1e-30`` at an evaluation point.
    """
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    denom = 1.0 / mech_susceptibility(cfg.modes, w) + total_spring(cfg, w)
    bad = np.abs(denom) < 1e-30
    if np.any(bad):
        raise SingularSusceptibility(f"pole at omega = {w[bad][0]:.6g} rad/s")
    return _squeeze(1.0 / denom, scalar)


def _inv_chi_imag(modes, w):
    return np.abs(np.imag(1.0 / mech_susceptibility(modes, w)))


def thermal_force_psd(modes, temperature: float, omega):
    """One-sided classical thermal force PSD [N^2/Hz].

    Fluctuation-dissipation with the dissipative part of the inverse total
    susceptibility, ``S_F = 4 k_B T |Im(1/chi)| / Omega``. For a single
    structurally damped mode this is ``4 k_B T m Omega_k^2 / (Q Omega)``.
    """
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    s = 4.0 * K_B * temperature / w * _inv_chi_imag(modes, w)
    return _squeeze(s, scalar)


def zero_point_force_psd(modes, omega):
    """One-sided zero-point force PSD of the mechanical bath, ``2 hbar |Im(1/chi)|``."""
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    return _squeeze(2.0 * HBAR * _inv_chi_imag(modes, w), scalar)


@dataclass(frozen=True)
class TransferModel:
    """Input-output map at one or more sideband frequencies.

    Attributes
    ----------
    frequency : ndarray
        Sideband frequencies [Hz].
    M : ndarray, shape (N, 4, 8)
        Outputs ``(X1, Y1, X2, Y2)`` versus ports ordered as carrier-in (X, Y),
        subcarrier-in (X, Y), carrier-loss (X, Y), subcarrier-loss (X, Y).
    v : ndarray, shape (N, 4)
        Outputs per unit external force on the mirror [1/N].
    S_F : ndarray, shape (N,)
        One-sided thermal force PSD [N^2/Hz].
    S_zp : ndarray, shape (N,)
        One-sided zero-point force PSD (zeros when disabled).
    """

    frequency: np.ndarray
    M: np.ndarray
    v: np.ndarray
    S_F: np.ndarray
    S_zp: np.ndarray

    @property
    def force_psd(self) -> np.ndarray:
        return self.S_F + self.S_zp


def build_transfer(cfg: SimConfig, omega, backend=None) -> TransferModel:
    """Solve the closed optomechanical loop at each sideband frequency.

    Parameters
    ----------
    cfg : SimConfig
    omega : float or array_like
        Angular sideband frequencies [rad/s].
    backend : module, optional
        Kernel implementation; the package default when omitted.

    Raises
    ------
    SingularSystem
        If the linear system cannot be solved at some frequency.
    """
    w = _omega(omega)
    kern = backend or _kernels
    opt = _optics(cfg)
    inv_chi = 1.0 / mech_susceptibility(cfg.modes, w)
    try:
        M, v = kern.transfer_batch(w, inv_chi, opt.lw.gamma_in, opt.lw.gamma_loss, opt.delta, opt.gx, opt.gf)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"closed-loop solve failed: {exc}", omega=float(w[0])) from exc
    bad = ~np.all(np.isfinite(M.reshape(len(w), -1)), axis=1) | ~np.all(np.isfinite(v), axis=1)
    if np.any(bad):
        w_bad = float(w[bad][0])
        raise SingularSystem(f"closed-loop system is singular at omega = {w_bad:.6g} rad/s", omega=w_bad)
    S_F = thermal_force_psd(cfg.modes, cfg.temperature, w)
    S_zp = zero_point_force_psd(cfg.modes, w) if cfg.zero_point else np.zeros_like(w)
    return TransferModel(w / (2.0 * math.pi), M, v, S_F, S_zp)


def output_covariance_batch(cfg: SimConfig, omega, backend=None) -> np.ndarray:
    """Output covariance matrices, shape ``(N, 4, 4)``, vacuum-half units.

    ``V = Re[M M^H / 2 + (S_F + S_zp) v v^H / 2]``.
    """
    tm = build_transfer(cfg, omega, backend)
    kern = backend or _kernels
    return kern.covariance_batch(tm.M, tm.v, tm.force_psd)


def output_covariance(cfg: SimConfig, omega: float) -> CovarianceMatrix:
    """Output covariance matrix at a single sideband frequency [rad/s]."""
    V = output_covariance_batch(cfg, [omega])[0]
    return CovarianceMatrix(V, Normalization.VacuumHalf)


def output_spectral_matrix(cfg: SimConfig, omega) -> np.ndarray:
    """Complex Hermitian cross-spectral matrix of the output quadratures.

    Its real part is the covariance returned by :func:`output_covariance_batch`;
    the imaginary part correlates in-phase and quadrature demodulations.
    """
    tm = build_transfer(cfg, omega)
    S = 0.5 * np.einsum("nik,njk->nij", tm.M, tm.M.conj())
    S += 0.5 * tm.force_psd[:, None, None] * tm.v[:, :, None] * tm.v.conj()[:, None, :]
    return 0.5 * (S + S.conj().transpose(0, 2, 1))


def sideband_covariance(cfg: SimConfig, omega) -> np.ndarray:
    """Real 8x8 covariance of cosine and sine demodulated quadratures.

    Ordered ``(X1c, Y1c, X2c, Y2c, X1s, Y1s, X2s, Y2s)``; the symplectic form is
    block diagonal over the cosine and sine halves.
    """
    S = output_spectral_matrix(cfg, omega)
    top = np.concatenate([S.real, -S.imag], axis=2)
    bot = np.concatenate([S.imag, S.real], axis=2)
    return np.concatenate([top, bot], axis=1)


def uncertainty_min_eigenvalue(V) -> np.ndarray:
    """Smallest eigenvalue of ``V + i Omega / 2`` for a stack of covariance matrices.

    Works for 4x4 and for 8x8 sideband matrices.
    """
    V = np.asarray(V, dtype=float)
    n_modes = V.shape[-1] // 2
    om = symplectic_form(n_modes)
    return np.linalg.eigvalsh(V + 0.5j * om)[..., 0]


# --- stability -------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    """Nyquist verdict for the optical-spring loop.

    Attributes
    ----------
    stable : bool
        No net encirclement of the origin by ``1 + L``.
    margin : float
        Smallest ``|1 + L|`` on the grid, the distance of ``L`` from -1.
    winding : int
        Net counterclockwise encirclements of the origin over the full
        frequency axis (negative frequencies by conjugate symmetry).
    refined : bool
        Whether local refinement was applied.
    coarse : bool
        Whether the phase step limit was still exceeded after refinement.
    margin_frequency : float
        Frequency [Hz] at which the margin is attained.
    """

    stable: bool
    margin: float
    winding: int
    refined: bool = False
    coarse: bool = False
    margin_frequency: float = math.nan

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "margin": self.margin,
            "winding": self.winding,
            "refined": self.refined,
            "coarse": self.coarse,
            "margin_frequency_hz": self.margin_frequency,
        }


def _open_loop(cfg: SimConfig, w: np.ndarray) -> np.ndarray:
    # positive K stiffens: 1/chi_eff = (1/chi)(1 + chi K)
    return mech_susceptibility(cfg.modes, w) * total_spring(cfg, w)


def _wrap(phi):
    return (phi + np.pi) % (2.0 * np.pi) - np.pi


def stability_check(
    cfg: SimConfig,
    f_min: float = 1.0,
    f_max: float = 1e7,
    points: int = 4096,
    max_step: float = math.pi / 2,
) -> StabilityReport:
    """Nyquist test of the double optical spring.

    Evaluates ``L = chi * K_total`` on a logarithmic grid and counts how many
    times ``1 + L`` encircles the origin as the frequency sweeps the whole
    real axis. All open-loop poles (cavity and damped mechanics) lie in the
    stable half plane, so any net encirclement means instability.

    Intervals where the phase of ``1 + L`` jumps by more than ``max_step``
    are refined once; a :class:`GridTooCoarse` warning is issued if the
    refined grid still has such jumps.
    """
    f = np.geomspace(f_min, f_max, points)
    w = 2.0 * math.pi * f
    z = 1.0 + _open_loop(cfg, w)
    dphi = _wrap(np.diff(np.angle(z)))
    refined = False
    big = np.nonzero(np.abs(dphi) > max_step)[0]
    if big.size:
        refined = True
        pieces = [f[: big[0] + 1]]
        for i, k in enumerate(big):
            fine = np.geomspace(f[k], f[k + 1], 258)[1:-1]
            pieces.append(fine)
            stop = big[i + 1] + 1 if i + 1 < big.size else f.size
            pieces.append(f[k + 1 : stop])
        f = np.concatenate(pieces)
        w = 2.0 * math.pi * f
        z = 1.0 + _open_loop(cfg, w)
        dphi = _wrap(np.diff(np.angle(z)))
    coarse = bool(np.any(np.abs(dphi) > max_step))
    if coarse:
        warnings.warn(
            "Nyquist locus phase step exceeds the limit after refinement; verdict may be unreliable",
            GridTooCoarse,
            stacklevel=2,
        )
    # positive-frequency sweep, its conjugate mirror, and the short hop across zero
    phase_pos = float(np.sum(dphi))
    phi0 = float(np.angle(z[0]))
    hop = float(_wrap(2.0 * phi0))
    tail = float(np.angle(z[-1]))  # residual phase at f_max, ideally ~0
    total = 2.0 * phase_pos + hop - 2.0 * tail
    winding = int(round(total / (2.0 * math.pi)))
    dist = np.abs(z)
    k = int(np.argmin(dist))
    return StabilityReport(winding == 0, float(dist[k]), winding, refined, coarse, float(f[k]))


# --- noise budget ----------------------------------------------------------


def qrpn_force_psd(cfg: SimConfig, omega):
    """One-sided quantum radiation-pressure force PSD [N^2/Hz].

    Each carrier contributes ``2 (sqrt(2) hbar G abar)^2`` times the
    intracavity amplitude-quadrature variance driven by its vacuum ports.
    """
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    opt = _optics(cfg)
    g = opt.lw.gamma
    s = g + 1j * w
    total = np.zeros_like(w)
    for j in range(2):
        d = opt.delta[j]
        var = g * (np.abs(s) ** 2 + d * d) / np.abs(s * s + d * d) ** 2
        total += 2.0 * opt.gf[j] ** 2 * var
    return _squeeze(total, scalar)


def quantum_thermal_ratio(cfg: SimConfig, omega):
    """Ratio of radiation-pressure to thermal force noise.

    Raises
    ------
    ConfigError
        If the temperature is not positive.
    """
    if not cfg.temperature > 0:
        raise ConfigError("quantum/thermal ratio needs a positive temperature", field="temperature")
    scalar = np.ndim(omega) == 0
    w = _omega(omega)
    ratio = qrpn_force_psd(cfg, w) / thermal_force_psd(cfg.modes, cfg.temperature, w)
    return _squeeze(ratio, scalar)
