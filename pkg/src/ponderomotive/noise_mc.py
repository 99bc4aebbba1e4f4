"""Monte-Carlo propagation of covariance-estimate noise into the negativity.

Each draw perturbs the ten independent entries of a symmetric 4x4 matrix
with Gaussian noise and evaluates the log-negativity, keeping nonphysical
draws (they score zero and are counted as clamped).

Random numbers come from NumPy's Philox counter-based generator. Draws are
generated in fixed-size chunks; chunk ``k`` is seeded from
``SeedSequence(seed, spawn_key=(k,))``, so results are bit-identical for any
number of workers and the same standard normals are reused for every noise
level (common random numbers).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NotAchievable
from .gaussian import CovarianceMatrix, log_negativity, log_negativity_batch

__all__ = [
    "McConfig",
    "McResult",
    "perturb_cm",
    "perturb_batch",
    "standard_normals",
    "en_distribution",
    "required_precision",
    "CHUNK",
]

CHUNK = 4096
_IU = np.triu_indices(4)
CI_LOW, CI_HIGH = 0.165, 0.835


@dataclass(frozen=True)
class McConfig:
    """Noise level and sampling plan.

    Attributes
    ----------
    relative_sigma : float
        Standard deviation relative to each entry's magnitude, or an absolute
        standard deviation when ``absolute`` is set.
    samples : int
    seed : int
        Nonnegative 64-bit seed.
    absolute : bool
    """

    relative_sigma: float
    samples: int = 10_000
    seed: int = 0
    absolute: bool = False

    def __post_init__(self):
        s = float(self.relative_sigma)
        if not math.isfinite(s) or s < 0:
            raise ValueError(f"sigma must be >= 0, got {self.relative_sigma}")
        if int(self.samples) < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "relative_sigma", s)
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class McResult:
    """Summary statistics of the sampled negativity."""

    mean_EN: float
    std_EN: float
    ci67_low: float
    ci67_high: float
    clamped_fraction: float
    samples: int
    sigma: float
    nominal_EN: float
    absolute: bool = False

    def to_dict(self) -> dict:
        return {
            "mean": self.mean_EN,
            "std": self.std_EN,
            "ci67": [self.ci67_low, self.ci67_high],
            "clamped_fraction": self.clamped_fraction,
            "samples": self.samples,
            "sigma": self.sigma,
            "sigma_mode": "absolute" if self.absolute else "relative",
            "nominal_E_N": self.nominal_EN,
        }


def _entries(V) -> np.ndarray:
    if isinstance(V, CovarianceMatrix):
        return V.entries
    return np.asarray(V, dtype=float)


def _entry_std(E: np.ndarray, sigma: float, absolute: bool) -> np.ndarray:
    upper = E[_IU]
    if absolute:
        return np.full(upper.shape, sigma)
    mag = np.abs(upper)
    fill = np.mean(np.abs(np.diag(E)))
    return sigma * np.where(mag > 0, mag, fill)


def perturb_batch(V, sigma: float, normals: np.ndarray, absolute: bool = False) -> np.ndarray:
    """Apply noise to a matrix for every row of ``normals`` (shape ``(N, 10)``)."""
    E = _entries(V)
    z = np.asarray(normals, dtype=float)
    upper = E[_IU] + _entry_std(E, sigma, absolute) * z
    out = np.empty((z.shape[0], 4, 4))
    out[:, _IU[0], _IU[1]] = upper
    out[:, _IU[1], _IU[0]] = upper
    return out


def perturb_cm(V, relative_sigma: float, draw, absolute: bool = False) -> CovarianceMatrix:
    """One noisy copy of ``V``.

    Parameters
    ----------
    V : CovarianceMatrix or array_like
    relative_sigma : float
    draw : numpy.random.Generator or array_like of 10 floats
        Source of the standard normals for the upper-triangle entries, in
        row-major order.
    absolute : bool, optional

    Returns
    -------
    CovarianceMatrix
        Symmetric, not projected back onto physical states.
    """
    if isinstance(draw, np.random.Generator):
        z = draw.standard_normal(10)
    else:
        z = np.asarray(draw, dtype=float).reshape(10)
    norm = V.normalization if isinstance(V, CovarianceMatrix) else "vacuum_half"
    return CovarianceMatrix(perturb_batch(V, relative_sigma, z[None])[0], norm)


def standard_normals(seed: int, chunk: int, size: int = CHUNK) -> np.ndarray:
    """Standard normals of chunk ``chunk``, shape ``(size, 10)``."""
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.Philox(ss)).standard_normal((size, 10))


def _chunk_en(args):
    E, sigma, absolute, seed, k, size = args
    z = standard_normals(seed, k, CHUNK)[:size]
    en, flag = log_negativity_batch(perturb_batch(E, sigma, z, absolute))
    return en, flag


def _sample(E, sigma, samples, seed, absolute, workers=1):
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    tasks = [(E, sigma, absolute, seed, k, s) for k, s in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_en, tasks))
    else:
        parts = [_chunk_en(t) for t in tasks]
    en = np.concatenate([p[0] for p in parts])
    flag = np.concatenate([p[1] for p in parts])
    return en, flag


def _std(en: np.ndarray) -> float:
    # shifting by one draw keeps identical samples at exactly zero spread
    return float(np.std(en - en[0], ddof=1)) if en.size > 1 else 0.0


def en_distribution(V, mc: McConfig, workers: int = 1, return_draws: bool = False):
    """Sample the negativity of noisy copies of ``V``.

    Parameters
    ----------
    V : CovarianceMatrix or array_like
        Vacuum-half matrix.
    mc : McConfig
    workers : int, optional
        Thread count; does not change the result.
    return_draws : bool, optional
        Also return the per-draw ``E_N`` array.

    Returns
    -------
    McResult or (McResult, ndarray)

    Examples
    --------
    >>> from ponderomotive.gaussian import tmsv
    >>> en_distribution(tmsv(0.5), McConfig(0.0, samples=100)).std_EN
    0.0
    """
    E = _entries(V)
    nominal = log_negativity(E)
    en, flag = _sample(E, mc.relative_sigma, mc.samples, mc.seed, mc.absolute, workers)
    n = en.size
    std = _std(en)
    lo, hi = np.quantile(en, [CI_LOW, CI_HIGH])
    clamped = float(np.count_nonzero(flag | (en == 0.0))) / n
    mean = float(en[0] + np.mean(en - en[0]))
    res = McResult(mean, std, float(lo), float(hi), clamped, n, mc.relative_sigma, nominal, mc.absolute)
    return (res, en) if return_draws else res


def required_precision(
    V,
    target_ratio: float = 1.0,
    samples: int = 10_000,
    seed: int = 0,
    lo: float = 1e-6,
    hi: float = 1e-1,
    rel_tol: float = 0.05,
    max_iter: int = 60,
    scan_per_decade: int = 4,
) -> float:
    """Noise level at which ``std(E_N) / E_N(V)`` first reaches ``target_ratio``.

    The ratio is not monotone in the noise: once most draws turn
    nonphysical they are clamped to zero and the spread shrinks again. A
    coarse logarithmic scan from ``lo`` upward therefore brackets the first
    crossing, which is then bisected in ``log(sigma)`` with common random
    numbers until the ratio is within ``rel_tol`` of the target.

    Returns
    -------
    float
        The crossing, or ``hi`` if the ratio stays below the target on the
        whole bracket.

    Raises
    ------
    ValueError
        If ``E_N(V)`` is zero.
    NotAchievable
        If even ``lo`` overshoots the target.
    """
    E = _entries(V)
    e0 = log_negativity(E)
    if not e0 > 0:
        raise ValueError("required_precision needs an entangled matrix (E_N > 0)")

    def ratio(sigma):
        en, _ = _sample(E, sigma, samples, seed, False)
        return _std(en) / e0

    r_lo = ratio(lo)
    if r_lo > target_ratio * (1.0 + rel_tol):
        raise NotAchievable(f"std/E_N = {r_lo:.3g} exceeds {target_ratio} even at sigma = {lo:g}")
    n_scan = max(2, int(math.ceil(math.log10(hi / lo) * scan_per_decade)) + 1)
    grid = np.geomspace(lo, hi, n_scan)
    a = math.log(lo)
    for s in grid[1:]:
        if ratio(s) > target_ratio:
            b = math.log(s)
            break
        a = math.log(s)
    else:
        return hi
    mid = 0.5 * (a + b)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        r = ratio(math.exp(mid))
        if abs(r - target_ratio) <= rel_tol * target_ratio:
            break
        if r < target_ratio:
            a = mid
        else:
            b = mid
    return math.exp(mid)
