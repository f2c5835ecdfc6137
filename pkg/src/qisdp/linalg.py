"""Dense symmetric kernels: Cholesky log-det, extreme eigenvalue, rank-2 inverse updates.

Every low-rank change handled here is supported on the coordinates
``{0, i}``. With ``U = [e_0, e_i]`` and ``K = U^T W U`` the 2x2 block of the
current inverse, the push-through identity

    (W^{-1} - U M U^T)^{-1} = W + W U M (I - K M)^{-1} U^T W

holds for any symmetric 2x2 ``M`` (singular ones included) as long as
``I - K M`` is invertible, and ``det(W^{-1} - U M U^T) = det(W^{-1}) det(I - K M)``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import UpdateSingular
from .model import ConstraintMatrix

__all__ = [
    "UpdateSpec",
    "cholesky_logdet",
    "min_eigenvalue",
    "dense_inverse",
    "woodbury_apply",
    "woodbury_apply_inplace",
    "update_factor",
    "pd_window",
    "quad_window",
]

# det(I - K M) below this is treated as a singular pivot.
PIVOT_TOL = 1e-14


@dataclasses.dataclass(frozen=True)
class UpdateSpec:
    """A rank-<=2 change ``W^{-1} <- W^{-1} - U M U^T`` on coordinates ``{0, i}``.

    Use :meth:`rank_one` for ``W^{-1} - theta g g^T`` with ``g`` supported on ``{0, i}``.
    """

    i: int
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64).reshape(2, 2)
        if m[0, 1] != m[1, 0]:
            raise ValueError("update coefficient matrix must be symmetric")
        object.__setattr__(self, "m", m)

    @classmethod
    def coordinate_step(cls, cm: ConstraintMatrix, s: float, s0: float = 0.0) -> "UpdateSpec":
        """Update for ``y_coord += s`` (and ``y0 += s0``)."""
        return cls(cm.i, np.array([[s0 + s * cm.a00, s * cm.a0i], [s * cm.a0i, s * cm.aii]]))

    @classmethod
    def rank_one(cls, i: int, g0: float, gi: float, theta: float) -> "UpdateSpec":
        return cls(i, theta * np.array([[g0 * g0, g0 * gi], [g0 * gi, gi * gi]]))


def cholesky_logdet(S: np.ndarray) -> float | None:
    """``log det S`` if ``S`` is positive definite, otherwise ``None``."""
    try:
        c = scipy.linalg.cholesky(S, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        return None
    d = np.diag(c)
    if np.any(d <= 0.0):
        return None
    return float(2.0 * np.sum(np.log(d)))


def dense_inverse(S: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Inverse and log-determinant of a PD matrix via Cholesky, or ``None`` if not PD."""
    try:
        c, low = scipy.linalg.cho_factor(S, lower=True)
    except (np.linalg.LinAlgError, ValueError):
        return None
    d = np.diag(c)
    if np.any(d <= 0.0):
        return None
    inv = scipy.linalg.cho_solve((c, low), np.eye(S.shape[0]))
    inv = 0.5 * (inv + inv.T)
    return inv, float(2.0 * np.sum(np.log(d)))


def min_eigenvalue(S: np.ndarray) -> float:
    return float(scipy.linalg.eigvalsh(S, subset_by_index=[0, 0], check_finite=True)[0])


def _block(W, i):
    if i == 0:
        return float(W[0, 0]), 0.0, 0.0
    return float(W[0, 0]), float(W[0, i]), float(W[i, i])


def update_factor(W: np.ndarray, spec: UpdateSpec) -> tuple[np.ndarray, float]:
    """Return ``N = M (I - K M)^{-1}`` and ``det(I - K M)``.

    Raises:
      UpdateSingular: if ``det(I - K M)`` is not safely positive.
    """
    w00, w0i, wii = _block(W, spec.i)
    k = np.array([[w00, w0i], [w0i, wii]])
    m = spec.m if spec.i else np.array([[spec.m[0, 0], 0.0], [0.0, 0.0]])
    t = np.eye(2) - k @ m
    det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    if not det > PIVOT_TOL:
        raise UpdateSingular(f"det(I - K M) = {det:.3e} on coordinate {spec.i}")
    t_inv = np.array([[t[1, 1], -t[0, 1]], [-t[1, 0], t[0, 0]]]) / det
    n = m @ t_inv
    n = 0.5 * (n + n.T)
    return n, float(det)


def woodbury_apply_inplace(W: np.ndarray, spec: UpdateSpec) -> float:
    """Overwrite ``W`` with ``(W^{-1} - U M U^T)^{-1}``; returns ``log det(I - K M)``."""
    n, det = update_factor(W, spec)
    _kernels.rank2_update(W, spec.i, n[0, 0], n[0, 1], n[1, 1])
    return math.log(det)


def woodbury_apply(W: np.ndarray, spec: UpdateSpec) -> np.ndarray:
    out = np.array(W, dtype=np.float64, copy=True)
    woodbury_apply_inplace(out, spec)
    return out


def quad_window(c1: float, c2: float) -> tuple[float, float]:
    """Maximal open interval around 0 where ``1 + c1 s + c2 s^2 > 0``."""
    roots = []
    if c2 == 0.0:
        if c1 != 0.0:
            roots.append(-1.0 / c1)
    else:
        disc = c1 * c1 - 4.0 * c2
        if disc >= 0.0:
            sq = math.sqrt(disc)
            q = -0.5 * (c1 + math.copysign(sq, c1))
            # 1 + c1 s + c2 s^2 = 0 with stable root pairing.
            if q != 0.0:
                roots.extend([q / c2, 1.0 / q])
    lo = max((r for r in roots if r < 0.0), default=-math.inf)
    hi = min((r for r in roots if r > 0.0), default=math.inf)
    return lo, hi


def pd_window(W: np.ndarray, cm: ConstraintMatrix) -> tuple[float, float]:
    """Open interval of ``s`` around 0 keeping ``W^{-1} - s A`` positive definite.

    ``det(I - s K A_2) = 1 - tau s + kappa s^2`` with ``tau = <A, W>`` and
    ``kappa = det(K) det(A_2)``; the window ends at its nearest roots.
    """
    w00, w0i, wii = _block(W, cm.i)
    if cm.i == 0:
        return quad_window(-cm.a00 * w00, 0.0)
    tau = cm.a00 * w00 + 2.0 * cm.a0i * w0i + cm.aii * wii
    kappa = (w00 * wii - w0i * w0i) * (cm.a00 * cm.aii - cm.a0i * cm.a0i)
    return quad_window(-tau, kappa)
