"""Reference NumPy implementations of the batched numerical kernels.

The transfer kernel here solves the full 5x5 closed-loop system with a
generic linear solver, which makes it an independent route from the
closed-form compiled kernel.
"""
import numpy as np

RADICAND_RTOL = 1e-12
# negativities below this are rounding noise on a separable state
EN_FLOOR = 1e-12

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def negativity_batch(V):
    """Log-negativity and PPT symplectic eigenvalue for a stack of 4x4 matrices.

    Parameters
    ----------
    V : ndarray, shape (N, 4, 4)
        Covariance matrices in vacuum-one-half normalization.

    Returns
    -------
    en : ndarray, shape (N,)
        Natural-log negativity, clamped at zero; 0 where flagged or
        below ``EN_FLOOR``.
    nu : ndarray, shape (N,)
        Smallest partially transposed symplectic eigenvalue (NaN where flagged).
    flag : ndarray of bool, shape (N,)
        True where the state is nonphysical for the measure.
    """
    V = np.asarray(V, dtype=float)
    A = V[:, :2, :2]
    B = V[:, :2, 2:]
    C = V[:, 2:, 2:]
    a, c, p = np.linalg.det(A), np.linalg.det(C), np.linalg.det(B)
    eta = a + c - 2.0 * p
    detv = np.linalg.det(V)
    # eta^2 - 4 det V through local invariants; exact (a - c)^2 when B = 0
    t = np.trace(A @ _J @ B @ _J @ C @ _J @ B.transpose(0, 2, 1) @ _J, axis1=1, axis2=2)
    rad = (a - c) ** 2 + 4.0 * (t - p * (a + c))
    flag = rad < -RADICAND_RTOL * np.maximum(1.0, eta * eta)
    root = np.sqrt(np.maximum(rad, 0.0))
    # 2*eta - 2*root rewritten as 8 det V / (eta + root) to avoid cancellation
    denom = eta + root
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(denom > 0.0, 8.0 * detv / np.where(denom > 0.0, denom, 1.0), -1.0)
    flag |= ~(arg > 0.0)
    safe = np.where(flag, 1.0, arg)
    en = np.maximum(0.0, -np.log(np.sqrt(safe))) + 0.0
    nu = np.sqrt(safe) / 2.0
    en[flag | (en <= EN_FLOOR)] = 0.0
    nu[flag] = np.nan
    return en, nu, flag


def transfer_batch(omega, inv_chi, gamma_in, gamma_loss, delta, gx, gf):
    """Closed-loop input-output map of the two-carrier cavity.

    Parameters
    ----------
    omega : ndarray, shape (N,)
        Sideband angular frequency [rad/s].
    inv_chi : ndarray of complex, shape (N,)
        Inverse bare mechanical susceptibility [N/m].
    gamma_in, gamma_loss : float
        Coupler and loss contributions to the half-linewidth [rad/s].
    delta : sequence of 2 floats
        Laser-minus-cavity detuning per carrier [rad/s].
    gx : sequence of 2 floats
        Field response to displacement, ``sqrt(2) G abar`` [1/(m s)].
    gf : sequence of 2 floats
        Force per unit amplitude quadrature, ``sqrt(2) hbar G abar``.

    Returns
    -------
    M : ndarray of complex, shape (N, 4, 8)
        Output quadratures versus the eight vacuum ports.
    v : ndarray of complex, shape (N, 4)
        Output quadratures per unit external force [1/N].
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.size
    gamma = gamma_in + gamma_loss
    s = gamma + 1j * omega
    A = np.zeros((n, 5, 5), dtype=complex)
    rhs = np.zeros((n, 5, 9), dtype=complex)
    eye2 = np.eye(2)
    for j in range(2):
        sl = slice(2 * j, 2 * j + 2)
        A[:, sl, sl] = s[:, None, None] * eye2 - delta[j] * _J
        A[:, 2 * j + 1, 4] = -gx[j]
        A[:, 4, 2 * j] = -gf[j]
        rhs[:, sl, 2 * j:2 * j + 2] = np.sqrt(2.0 * gamma_in) * eye2
        rhs[:, sl, 4 + 2 * j:6 + 2 * j] = np.sqrt(2.0 * gamma_loss) * eye2
    A[:, 4, 4] = inv_chi
    rhs[:, 4, 8] = 1.0
    sol = np.linalg.solve(A, rhs)
    out = np.sqrt(2.0 * gamma_in) * sol[:, :4, :]
    out[:, :, :4] -= np.eye(4)
    return np.ascontiguousarray(out[:, :, :8]), np.ascontiguousarray(out[:, :, 8])


def covariance_batch(M, v, s_force):
    """Real quadrature covariance ``Re[M M^H / 2 + s_force v v^H / 2]``.

    ``s_force`` is the one-sided force PSD; halving it gives the two-sided
    density matching the vacuum-half port normalization.
    """
    M = np.asarray(M)
    v = np.asarray(v)
    S = 0.5 * np.einsum("nik,njk->nij", M, M.conj())
    S += 0.5 * np.asarray(s_force)[:, None, None] * v[:, :, None] * v.conj()[:, None, :]
    V = S.real
    return 0.5 * (V + V.transpose(0, 2, 1))
