"""Duan inseparability test via reduction to standard form II.

All quantities here use the vacuum-one convention (vacuum = identity).
Vacuum-half inputs are rescaled on entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateBlock, DegenerateState, ModelError, NoConvergence, NoRealSolution
from .gaussian import CovarianceMatrix, Normalization, rescale

__all__ = [
    "Substandard",
    "DuanStandardForm",
    "DuanVerdict",
    "duan_substandard",
    "duan_standard_form",
    "duan_R",
    "duan_check",
]

DISC_TOL = 1e-10
DEGEN_TOL = 1e-9
SYMMETRIC_TOL = 1e-12
RESIDUAL_TOL = 1e-8
DECISION_TOL = 1e-9

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class Substandard:
    """Standard form I parameters ``(n, m, c, c')`` with ``|c| >= |c'|``."""

    n: float
    m: float
    c: float
    cp: float

    def __iter__(self):
        return iter((self.n, self.m, self.c, self.cp))


@dataclass(frozen=True)
class DuanStandardForm:
    """Standard form II reached from ``(n, m, c, c')`` by local squeezing.

    Attributes
    ----------
    n1, n2, m1, m2, c1, c2 : float
        Diagonal variances and correlations of the standard form.
    r1, r2 : float
        Local squeezing scalings solving the standard-form conditions.
    degenerate : bool
        True when a marginal is pure and the scalings were set to one.
    residuals : tuple of float
        Residuals of the two defining conditions at ``(r1, r2)``.
    """

    n1: float
    n2: float
    m1: float
    m2: float
    c1: float
    c2: float
    r1: float = 1.0
    r2: float = 1.0
    degenerate: bool = False
    residuals: tuple = field(default=(0.0, 0.0))


@dataclass(frozen=True)
class DuanVerdict:
    """Result of :func:`duan_check`.

    ``applicable`` is False when the reduction could not be completed; the
    ``reason`` field then names the failure and ``entangled`` is False.
    """

    R: float
    residual1: float
    residual2: float
    entangled: bool
    applicable: bool = True
    reason: str = ""
    form: DuanStandardForm | None = None

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "residual1": self.residual1,
            "residual2": self.residual2,
            "entangled": self.entangled,
            "applicable": self.applicable,
            "reason": self.reason,
        }


def duan_substandard(V) -> Substandard:
    """Reduce a covariance matrix to the invariants ``(n, m, c, c')``.

    Parameters
    ----------
    V : CovarianceMatrix or array_like
        Arrays are taken as vacuum-half and rescaled.

    Returns
    -------
    Substandard
        ``n = sqrt(det A)``, ``m = sqrt(det C)``, with ``c c' = det B`` and
        ``(nm - c^2)(nm - c'^2) = det V``. The larger root goes to ``c >= 0``
        and ``c'`` carries the sign of ``det B``.

    Raises
    ------
    DegenerateBlock
        If ``det A <= 0`` or ``det C <= 0``.
    NoRealSolution
        If the quadratic in ``c^2`` has no nonnegative real roots.
    """
    cm = V if isinstance(V, CovarianceMatrix) else CovarianceMatrix(V)
    E = rescale(cm, Normalization.VacuumOne).entries
    detA = float(np.linalg.det(E[:2, :2]))
    detC = float(np.linalg.det(E[2:, 2:]))
    if detA <= 0 or detC <= 0:
        raise DegenerateBlock(f"local block determinants must be positive (det A={detA:.3g}, det C={detC:.3g})")
    n, m = math.sqrt(detA), math.sqrt(detC)
    A, B, C = E[:2, :2], E[:2, 2:], E[2:, 2:]
    p = float(np.linalg.det(B))
    nm = n * m
    # n^2 m^2 + p^2 - det V as a trace invariant, free of cancellation
    s = float(np.trace(A @ _J @ B @ _J @ C @ _J @ B.T @ _J)) / nm
    disc = s * s - 4.0 * p * p
    if disc < -DISC_TOL * max(1.0, s * s) or s < -DISC_TOL * max(1.0, abs(nm)):
        raise NoRealSolution(f"no real (c, c') for this matrix (discriminant {disc:.3g})")
    root = math.sqrt(max(disc, 0.0))
    t_hi = max((s + root) / 2.0, 0.0)
    t_lo = max(s - t_hi, 0.0) if t_hi == 0.0 else max(p * p / t_hi, 0.0)
    c = math.sqrt(t_hi)
    cp = math.copysign(math.sqrt(t_lo), p) if p != 0.0 else 0.0
    return Substandard(n, m, c, cp)


def _r2_of_r1(r1: float, n: float, m: float) -> float:
    # equal squeezing ratios: (n/r1 - 1)/(n r1 - 1) = (m/r2 - 1)/(m r2 - 1)
    k = (n / r1 - 1.0) / (n * r1 - 1.0)
    if abs(k) < 1e-15:
        return m
    b = 1.0 - k
    return (-b + math.sqrt(b * b + 4.0 * k * m * m)) / (2.0 * k * m)


def _residuals(r1, r2, n, m, c, cp):
    an, bn = n * r1 - 1.0, n / r1 - 1.0
    am, bm = m * r2 - 1.0, m / r2 - 1.0
    g = math.sqrt(r1 * r2)
    res10 = g * abs(c) - abs(cp) / g - (math.sqrt(max(an * am, 0.0)) - math.sqrt(max(bn * bm, 0.0)))
    if an > 0 and am > 0:
        res11 = bn / an - bm / am
    else:
        res11 = bn * am - bm * an
    return res10, res11


def duan_standard_form(n: float, m: float, c: float, cp: float) -> DuanStandardForm:
    """Solve for the local scalings ``(r1, r2)`` and build standard form II.

    The second condition fixes ``r2`` as a function of ``r1`` in closed
    form, which leaves a scalar root search for ``r1`` on ``[1, n]``.

    Raises
    ------
    NoConvergence
        If the root is not bracketed or its residual exceeds ``1e-8``.
    """
    if n - 1.0 < DEGEN_TOL or m - 1.0 < DEGEN_TOL:
        return DuanStandardForm(n, n, m, m, c, cp, 1.0, 1.0, degenerate=True)
    if abs(abs(c) - abs(cp)) <= SYMMETRIC_TOL:
        res = _residuals(1.0, 1.0, n, m, c, cp)
        return DuanStandardForm(n, n, m, m, c, cp, 1.0, 1.0, residuals=res)

    def f(r1):
        return _residuals(r1, _r2_of_r1(r1, n, m), n, m, c, cp)[0]

    lo, hi = 1.0, n
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        r1 = lo
    elif fhi == 0.0:
        r1 = hi
    elif flo * fhi > 0:
        # |c| < |c'| puts the root below one; search the mirrored bracket
        lo, hi = 1.0 / n, 1.0
        flo, fhi = f(lo), f(hi)
        if flo * fhi > 0:
            raise NoConvergence("standard-form root is not bracketed")
        r1 = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    else:
        r1 = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    r2 = _r2_of_r1(r1, n, m)
    res = _residuals(r1, r2, n, m, c, cp)
    if max(abs(res[0]), abs(res[1])) > RESIDUAL_TOL:
        raise NoConvergence(f"standard-form residuals {res[0]:.2e}, {res[1]:.2e} exceed {RESIDUAL_TOL}")
    g = math.sqrt(r1 * r2)
    return DuanStandardForm(n * r1, n / r1, m * r2, m / r2, c * g, cp / g, r1, r2, residuals=res)


def duan_R(f: DuanStandardForm) -> float:
    """Duan metric ``R``; the state is separable iff ``R >= 1``.

    Raises
    ------
    DegenerateState
        If exactly one of ``n1``, ``m1`` equals one, which makes the local
        weight ``a^2 = sqrt((m1 - 1)/(n1 - 1))`` zero or infinite.
    """
    dn, dm = f.n1 - 1.0, f.m1 - 1.0
    if dn < DEGEN_TOL and dm < DEGEN_TOL:
        a2 = 1.0
    elif dn < DEGEN_TOL or dm < DEGEN_TOL:
        raise DegenerateState("R is undefined when only one marginal is pure")
    else:
        a2 = math.sqrt(dm / dn)
    num = a2 * (f.n1 + f.n2) / 2.0 + (f.m1 + f.m2) / (2.0 * a2) - abs(f.c1) - abs(f.c2)
    return num / (a2 + 1.0 / a2)


def duan_check(V) -> DuanVerdict:
    """Full Duan pipeline on a covariance matrix; never raises on model errors."""
    try:
        sub = duan_substandard(V)
        form = duan_standard_form(*sub)
        R = duan_R(form)
    except ModelError as exc:
        return DuanVerdict(math.nan, math.nan, math.nan, False, False, f"{type(exc).__name__}: {exc}")
    res1 = abs(form.c1) - math.sqrt(max((form.n1 - 1.0) * (form.m1 - 1.0), 0.0))
    res2 = abs(form.c2) - math.sqrt(max((form.n2 - 1.0) * (form.m2 - 1.0), 0.0))
    entangled = R < 1.0 - DECISION_TOL or res1 > DECISION_TOL or res2 > DECISION_TOL
    return DuanVerdict(R, res1, res2, bool(entangled), True, "", form)
