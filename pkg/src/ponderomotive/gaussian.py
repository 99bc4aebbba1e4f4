"""Two-mode Gaussian covariance matrices and the logarithmic negativity.

Quadratures are ordered ``(X1, Y1, X2, Y2)``. The default normalization puts
the vacuum at ``I/2``; the Duan reduction works with the vacuum at ``I`` and
converts automatically.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import NonPhysicalInput, NormalizationError, ParseError

__all__ = [
    "Normalization",
    "CovarianceMatrix",
    "ValidationReport",
    "NegativityResult",
    "symplectic_form",
    "validate_cm",
    "negativity_report",
    "log_negativity",
    "log_negativity_batch",
    "ppt_symplectic_eigenvalue",
    "rescale",
    "tmsv",
    "random_local_symplectic",
    "random_physical_cm",
    "cm_to_json",
    "cm_from_json",
    "cm_to_text",
    "cm_from_text",
    "load_cm",
    "save_cm",
]

PHYSICAL_TOL = 1e-9


class Normalization(enum.Enum):
    """Vacuum convention of a covariance matrix."""

    VacuumHalf = "vacuum_half"
    VacuumOne = "vacuum_one"

    @property
    def vacuum_variance(self) -> float:
        return 0.5 if self is Normalization.VacuumHalf else 1.0

    @classmethod
    def parse(cls, value) -> "Normalization":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower(), member.value.replace("_", "")):
                return member
        raise ValueError(f"unknown normalization {value!r}")


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


_OMEGA = symplectic_form(2)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric 4x4 quadrature covariance matrix.

    Parameters
    ----------
    entries : array_like, shape (4, 4)
        Quadrature variances in the order ``X1, Y1, X2, Y2``. The matrix is
        symmetrized on construction and stored read-only.
    normalization : Normalization or str, optional
        Vacuum convention, ``VacuumHalf`` by default.
    """

    entries: np.ndarray
    normalization: Normalization = Normalization.VacuumHalf

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (4, 4):
            raise ValueError(f"covariance matrix must be 4x4, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("covariance matrix has non-finite entries")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))

    @property
    def V11(self) -> np.ndarray:
        return self.entries[:2, :2]

    @property
    def V12(self) -> np.ndarray:
        return self.entries[:2, 2:]

    @property
    def V21(self) -> np.ndarray:
        return self.entries[2:, :2]

    @property
    def V22(self) -> np.ndarray:
        return self.entries[2:, 2:]

    @classmethod
    def vacuum(cls, normalization=Normalization.VacuumHalf) -> "CovarianceMatrix":
        norm = Normalization.parse(normalization)
        return cls(norm.vacuum_variance * np.eye(4), norm)

    @classmethod
    def from_blocks(cls, A, C, B, normalization=Normalization.VacuumHalf) -> "CovarianceMatrix":
        """Assemble from local blocks ``A``, ``C`` and the correlation block ``B``."""
        B = np.asarray(B, dtype=float)
        return cls(np.block([[A, B], [B.T, C]]), normalization)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return self.normalization is other.normalization and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.normalization, self.entries.tobytes()))

    def __repr__(self):
        return f"CovarianceMatrix({self.entries.tolist()!r}, {self.normalization.name})"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the uncertainty-principle check.

    Attributes
    ----------
    symmetry_residual : float
        ``max |V - V^T|`` of the stored entries.
    min_eigenvalue : float
        Smallest eigenvalue of ``V + i*v0*Omega`` with ``v0`` the vacuum
        variance, i.e. of ``V + i Omega / 2`` in vacuum-half units.
    passed : bool
        ``min_eigenvalue >= -tolerance`` and the symmetry residual is within tolerance.
    tolerance : float
    """

    symmetry_residual: float
    min_eigenvalue: float
    passed: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "symmetry_residual": self.symmetry_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "passed": self.passed,
            "tolerance": self.tolerance,
        }


def validate_cm(V, tol: float = PHYSICAL_TOL) -> ValidationReport:
    """Check symmetry and the Robertson-Schrodinger uncertainty relation.

    Always returns a report; never raises on unphysical input.

    Examples
    --------
    >>> validate_cm(CovarianceMatrix.vacuum()).passed
    True
    >>> validate_cm(CovarianceMatrix(0.1 * np.eye(4))).passed
    False
    """
    cm = _as_cm(V)
    E = cm.entries
    sym = float(np.max(np.abs(E - E.T)))
    herm = E + 1j * cm.normalization.vacuum_variance * _OMEGA
    lam = float(np.linalg.eigvalsh(herm)[0])
    return ValidationReport(sym, lam, bool(lam >= -tol and sym <= 1e-12), tol)


@dataclass(frozen=True)
class NegativityResult:
    """Log-negativity with its diagnostic flag.

    ``nonphysical`` is set when the inner radicand is negative beyond
    tolerance or the partially transposed eigenvalue is not positive; in that
    case ``value`` is reported as 0 and ``nu_minus`` as NaN.
    """

    value: float
    nu_minus: float
    nonphysical: bool


def _require_half(cm: CovarianceMatrix):
    if cm.normalization is not Normalization.VacuumHalf:
        raise NormalizationError(
            "log-negativity expects a vacuum-half matrix; rescale() it first"
        )


def negativity_report(V, base: str | float = "e") -> NegativityResult:
    """Log-negativity, smallest PPT symplectic eigenvalue and nonphysical flag."""
    cm = _as_cm(V)
    _require_half(cm)
    en, nu, flag = _kernels.negativity_batch(cm.entries[None])
    value = float(en[0]) / _log_base(base)
    return NegativityResult(value, float(nu[0]), bool(flag[0]))


def log_negativity(V, base: str | float = "e") -> float:
    """Logarithmic negativity of a two-mode Gaussian state.

    .. math:: E_N = \\max\\left[0, -\\ln\\sqrt{2\\eta - 2\\sqrt{\\eta^2 - 4\\det V}}\\right],
              \\quad \\eta = \\det V_{11} + \\det V_{22} - 2\\det V_{12}

    Parameters
    ----------
    V : CovarianceMatrix or array_like
        Vacuum-half covariance matrix. Plain arrays are taken as vacuum-half.
    base : {"e", 2} or float, optional
        Logarithm base; natural log by default.

    Returns
    -------
    float
        Nonnegative negativity. Nonphysical inputs give 0; use
        :func:`negativity_report` to see the flag.

    Raises
    ------
    NormalizationError
        If ``V`` is tagged ``VacuumOne``.
    """
    return negativity_report(V, base).value


def log_negativity_batch(V) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized negativity over an ``(N, 4, 4)`` stack; returns ``(E_N, flag)``."""
    V = np.ascontiguousarray(V, dtype=float)
    if V.ndim != 3 or V.shape[1:] != (4, 4):
        raise ValueError("expected an array of shape (N, 4, 4)")
    en, _, flag = _kernels.negativity_batch(V)
    return en, flag


def ppt_symplectic_eigenvalue(V) -> float:
    """Smallest symplectic eigenvalue of the partially transposed matrix.

    Raises
    ------
    NonPhysicalInput
        When the eigenvalue is not real and positive.
    """
    rep = negativity_report(V)
    if rep.nonphysical:
        raise NonPhysicalInput("partial-transpose spectrum is not real and positive")
    return rep.nu_minus


def _log_base(base) -> float:
    if base in ("e", None):
        return 1.0
    b = float(base)
    if b <= 0 or b == 1:
        raise ValueError(f"invalid logarithm base {base!r}")
    return math.log(b)


def rescale(V, target) -> CovarianceMatrix:
    """Convert between vacuum-half and vacuum-one conventions (factor 2)."""
    cm = _as_cm(V)
    target = Normalization.parse(target)
    if target is cm.normalization:
        return cm
    factor = 2.0 if target is Normalization.VacuumOne else 0.5
    return CovarianceMatrix(cm.entries * factor, target)


def tmsv(r: float, normalization=Normalization.VacuumHalf) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with squeezing parameter ``r``."""
    norm = Normalization.parse(normalization)
    a = norm.vacuum_variance * math.cosh(2 * r)
    b = norm.vacuum_variance * math.sinh(2 * r)
    return CovarianceMatrix.from_blocks(a * np.eye(2), a * np.eye(2), b * np.diag([1.0, -1.0]), norm)


def random_local_symplectic(rng: np.random.Generator, max_squeeze: float = 1.0) -> np.ndarray:
    """Random 4x4 local symplectic ``S1 (+) S2`` built from rotations and squeezers."""

    def single():
        t1, t2 = rng.uniform(0, 2 * np.pi, 2)
        s = rng.uniform(-max_squeeze, max_squeeze)
        R1 = np.array([[np.cos(t1), -np.sin(t1)], [np.sin(t1), np.cos(t1)]])
        R2 = np.array([[np.cos(t2), -np.sin(t2)], [np.sin(t2), np.cos(t2)]])
        return R1 @ np.diag([np.exp(s), np.exp(-s)]) @ R2

    S = np.zeros((4, 4))
    S[:2, :2] = single()
    S[2:, 2:] = single()
    return S


def random_physical_cm(rng: np.random.Generator, max_squeeze: float = 1.0, max_tries: int = 10000) -> CovarianceMatrix:
    """Random physical vacuum-half state: a standard form dressed by local symplectics.

    The standard form ``A = n I, C = m I, B = diag(c, c')`` is drawn at
    random and rejected until it satisfies the uncertainty relation.
    """
    for _ in range(max_tries):
        n, m = 0.5 + rng.exponential(1.5, 2)
        cmax = math.sqrt(max(n * m - 0.25, 0.0)) + 0.5
        c, cp = rng.uniform(-cmax, cmax, 2)
        std = CovarianceMatrix.from_blocks(n * np.eye(2), m * np.eye(2), np.diag([c, cp]))
        if validate_cm(std, tol=0.0).passed:
            S = random_local_symplectic(rng, max_squeeze)
            return CovarianceMatrix(S @ std.entries @ S.T)
    raise RuntimeError("failed to draw a physical state")


# --- serialization ---------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cm_to_json(V) -> str:
    cm = _as_cm(V)
    payload = {
        "normalization": cm.normalization.value,
        "entries": [[float(x) for x in row] for row in cm.entries],
    }
    return json.dumps(payload, indent=2)


def cm_from_json(text: str) -> CovarianceMatrix:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if isinstance(data, list):
        data = {"entries": data}
    if not isinstance(data, dict) or "entries" not in data:
        raise ParseError("JSON matrix needs an 'entries' field")
    try:
        arr = np.array(data["entries"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric matrix entry: {exc}") from exc
    if arr.shape != (4, 4):
        raise ParseError(f"matrix must be 4x4, got shape {arr.shape}")
    try:
        norm = Normalization.parse(data.get("normalization", "vacuum_half"))
    except ValueError as exc:
        raise ParseError(str(exc), token=str(data.get("normalization"))) from exc
    return CovarianceMatrix(arr, norm)


def cm_to_text(V) -> str:
    cm = _as_cm(V)
    lines = [f"# normalization={cm.normalization.value}"]
    lines += [" ".join(_fmt(x) for x in row) for row in cm.entries]
    return "\n".join(lines) + "\n"


def cm_from_text(text: str) -> CovarianceMatrix:
    """Parse four whitespace-separated rows; ``#`` lines are comments.

    A comment of the form ``# normalization=vacuum_one`` sets the tag.
    """
    norm = Normalization.VacuumHalf
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("normalization"):
                _, _, val = body.partition("=")
                try:
                    norm = Normalization.parse(val)
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno, token=val.strip()) from exc
            continue
        row = []
        for tok in line.replace(",", " ").split():
            try:
                row.append(float(tok))
            except ValueError:
                raise ParseError(f"cannot parse number {tok!r}", line=lineno, token=tok) from None
        if len(row) != 4:
            raise ParseError(f"expected 4 values, found {len(row)}", line=lineno)
        rows.append(row)
    if len(rows) != 4:
        raise ParseError(f"expected 4 matrix rows, found {len(rows)}")
    return CovarianceMatrix(np.array(rows), norm)


def load_cm(path) -> CovarianceMatrix:
    """Read a matrix file; ``.json`` files are JSON, anything else is text."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return cm_from_json(text)
    return cm_from_text(text)


def save_cm(V, path) -> None:
    path = Path(path)
    text = cm_to_json(V) if path.suffix.lower() == ".json" else cm_to_text(V)
    path.write_text(text, encoding="utf-8")


def _as_cm(V) -> CovarianceMatrix:
    return V if isinstance(V, CovarianceMatrix) else CovarianceMatrix(V)
