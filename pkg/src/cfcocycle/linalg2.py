"""Closed-form 2x2 linear algebra.

Rotation factors R(phi) = [[cos, sin], [-sin, cos]], stretches
Z(lam) = diag(lam, 1/lam), a deterministic rotation-form SVD
M = sign * scale * R(phi) Z(lam) R(chi), and log-scaled products that keep
thousand-factor chains inside double range. Everything is closed form; no
iterative eigensolvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrixError

# Raw matrix products are forbidden beyond this many factors; norms grow
# geometrically and leave double range long before precision does.
MAX_RAW_PRODUCT = 64

# |det| <= RANK_TOL * ||M||_F^2 counts as rank deficient.
RANK_TOL = 1e-14

_HALF_PI = 0.5 * math.pi

# exp argument beyond which a double overflows
_EXP_MAX = 709.0


def rot(phi: float) -> np.ndarray:
    """Rotation factor R(phi) = [[cos phi, sin phi], [-sin phi, cos phi]]."""
    if not math.isfinite(phi):
        raise ValueError(f"rotation angle must be finite, got {phi!r}")
    c = math.cos(phi)
    s = math.sin(phi)
    return np.array([[c, s], [-s, c]])


def stretch(lam: float) -> np.ndarray:
    """Stretch factor Z(lam) = diag(lam, 1/lam); requires lam > 0."""
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"stretch must be a positive finite real, got {lam!r}")
    return np.array([[lam, 0.0], [0.0, 1.0 / lam]])


def det2(M) -> float:
    M = np.asarray(M, dtype=float)
    return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])


def frob(M) -> float:
    M = np.asarray(M, dtype=float)
    return float(np.sqrt(np.sum(M * M)))


def _sv_split(a: float, b: float, c: float, d: float) -> tuple[float, float]:
    """(s + 2 det, s - 2 det) for [[a, b], [c, d]], s the squared Frobenius
    norm, via the cancellation-free identities
    s + 2 det = (a + d)^2 + (b - c)^2 and s - 2 det = (a - d)^2 + (b + c)^2."""
    return (a + d) ** 2 + (b - c) ** 2, (a - d) ** 2 + (b + c) ** 2


def opnorm(M) -> float:
    """Largest singular value, from the closed form
    sigma_1 = (sqrt(s + 2|d|) + sqrt(s - 2|d|)) / 2 with s the squared
    Frobenius norm and d the determinant."""
    M = np.asarray(M, dtype=float)
    hi, lo = _sv_split(M[0, 0], M[0, 1], M[1, 0], M[1, 1])
    if lo > hi:
        hi, lo = lo, hi
    return 0.5 * (math.sqrt(hi) + math.sqrt(lo))


def canon_angle(a: float) -> tuple[float, int]:
    """Shift an angle into (-pi/2, pi/2].

    Returns (angle, flip) with flip = -1 when the shift negates the rotation
    factor, since R(a +- pi) = -R(a).
    """
    flip = 1
    while a > _HALF_PI:
        a -= math.pi
        flip = -flip
    while a <= -_HALF_PI:
        a += math.pi
        flip = -flip
    return a, flip


@dataclass(frozen=True)
class RzrDecomposition:
    """M = sign * scale * R(phi) Z(lam) R(chi) with lam >= 1, scale > 0,
    and both angles in (-pi/2, pi/2]."""

    phi: float
    lam: float
    chi: float
    sign: int
    scale: float = 1.0

    def matrix(self) -> np.ndarray:
        return (self.sign * self.scale) * (
            rot(self.phi) @ stretch(self.lam) @ rot(self.chi)
        )


def _rzr_angles(M: np.ndarray, sig1: float) -> tuple[float, float, int]:
    """Canonicalized SVD angles (phi, chi, sign) for a matrix with positive
    determinant and largest singular value sig1.

    The right singular direction is a kernel vector of (M^T M - sig1^2 I);
    the better-conditioned residual row is used, which keeps the direction
    error below (machine eps * ||M||^2) / (sig1^2 - sig2^2) and the
    reconstruction error at machine-level for every conditioning regime.
    """
    sig1sq = sig1 * sig1
    g11 = M[0, 0] * M[0, 0] + M[1, 0] * M[1, 0]
    g22 = M[0, 1] * M[0, 1] + M[1, 1] * M[1, 1]
    g12 = M[0, 0] * M[0, 1] + M[1, 0] * M[1, 1]
    if g11 >= g22:
        vx, vy = sig1sq - g22, g12
    else:
        vx, vy = g12, sig1sq - g11
    nv = math.hypot(vx, vy)
    if nv == 0.0:
        # M^T M is exactly isotropic, so M / sqrt(det) is a rotation up to
        # rounding; read the angle straight off the entries.
        phi, flip = canon_angle(math.atan2(M[0, 1], M[0, 0]))
        return phi, 0.0, flip
    vx /= nv
    vy /= nv
    ux = (M[0, 0] * vx + M[0, 1] * vy) / sig1
    uy = (M[1, 0] * vx + M[1, 1] * vy) / sig1
    chi = math.atan2(vy, vx)
    phi = math.atan2(-uy, ux)
    phi, f1 = canon_angle(phi)
    chi, f2 = canon_angle(chi)
    return phi, chi, f1 * f2


def svd_generic(M) -> RzrDecomposition:
    """Deterministic rotation-form SVD of a full-rank 2x2 matrix with
    positive determinant."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.all(np.isfinite(M)):
        raise ValueError("need a finite 2x2 matrix")
    s = float(np.sum(M * M))
    d = det2(M)
    if s == 0.0 or abs(d) <= RANK_TOL * s:
        raise DegenerateMatrixError(
            f"rank-deficient matrix: det={d!r}, squared Frobenius norm={s!r}"
        )
    if d < 0.0:
        raise DegenerateMatrixError(
            "negative determinant: rotation-stretch-rotation form requires det > 0"
        )
    scale = math.sqrt(d)
    hi, lo = _sv_split(M[0, 0], M[0, 1], M[1, 0], M[1, 1])
    sig1 = 0.5 * (math.sqrt(hi) + math.sqrt(lo))
    lam = max(sig1 / scale, 1.0)
    phi, chi, sign = _rzr_angles(M, sig1)
    return RzrDecomposition(phi=phi, lam=lam, chi=chi, sign=sign, scale=scale)


@dataclass(frozen=True)
class LogScaledMat2:
    """A 2x2 matrix exp(logScale) * unit with ||unit||_F = 1."""

    unit: np.ndarray
    logScale: float


@dataclass(frozen=True)
class ScaledRzr:
    """Rotation-form SVD of a log-scaled matrix; lam is kept as a log since
    long products overflow any linear representation."""

    phi: float
    chi: float
    sign: int
    logLambda: float

    @property
    def lam(self) -> float:
        return math.exp(self.logLambda) if self.logLambda < _EXP_MAX else math.inf


def scaled_identity() -> LogScaledMat2:
    return LogScaledMat2(unit=np.eye(2) / math.sqrt(2.0), logScale=0.5 * math.log(2.0))


def scaled_from(M) -> LogScaledMat2:
    M = np.asarray(M, dtype=float)
    f = frob(M)
    if f == 0.0 or not math.isfinite(f):
        raise DegenerateMatrixError("cannot represent a zero or non-finite matrix")
    return LogScaledMat2(unit=M / f, logScale=math.log(f))


def mul_scaled(acc: LogScaledMat2, M) -> LogScaledMat2:
    """Fold the next chain factor M into the running product.

    M enters on the left, so iterating over A_1, A_2, ... builds the
    arrow-ordered product A_n ... A_1. The unit part is renormalized to
    Frobenius norm 1 on every call.
    """
    raw = np.asarray(M, dtype=float) @ acc.unit
    f = frob(raw)
    if f == 0.0 or not math.isfinite(f):
        raise DegenerateMatrixError("chain factor is zero or non-finite")
    return LogScaledMat2(unit=raw / f, logScale=acc.logScale + math.log(f))


def product_scaled(mats) -> LogScaledMat2:
    """Arrow-ordered log-scaled product of an iterable of 2x2 matrices."""
    acc = scaled_identity()
    for M in mats:
        acc = mul_scaled(acc, M)
    return acc


def scaled_matrix(acc: LogScaledMat2) -> np.ndarray:
    """Represented matrix in linear scale; overflows for long products."""
    return math.exp(acc.logScale) * acc.unit


def scaled_opnorm_log(acc: LogScaledMat2) -> float:
    """log of the operator norm of the represented matrix."""
    return acc.logScale + math.log(opnorm(acc.unit))


def scaled_det(acc: LogScaledMat2) -> tuple[float, float]:
    """(sign, log|det|) of the represented matrix.

    Valid while |det(unit)| = |det repr| / ||repr||_F^2 is representable,
    i.e. while log|det repr| - 2 logScale > ~-700; beyond that the unit's
    determinant underflows and factor determinants must be tracked by the
    caller instead.
    """
    d = det2(acc.unit)
    s = float(np.sum(acc.unit * acc.unit))
    if abs(d) <= RANK_TOL * s:
        raise DegenerateMatrixError(
            "unit determinant is below the rounding floor; "
            "accumulate factor determinants externally"
        )
    return math.copysign(1.0, d), 2.0 * acc.logScale + math.log(abs(d))


def svd_scaled(acc: LogScaledMat2, det_repr: float = 1.0) -> ScaledRzr:
    """Rotation-form SVD of the represented matrix given its determinant.

    The determinant must be supplied because det(unit) underflows once the
    product norm passes ~1e150; for chains of det-1 factors pass 1.0.
    """
    if not (math.isfinite(det_repr) and det_repr > 0.0):
        raise DegenerateMatrixError(
            "represented determinant must be positive and finite"
        )
    U = acc.unit
    # sig1 of the unit from the cancellation-free entry forms; det(unit) may
    # underflow for long products but never enters explicitly here.
    hi, lo = _sv_split(U[0, 0], U[0, 1], U[1, 0], U[1, 1])
    sig1 = 0.5 * (math.sqrt(hi) + math.sqrt(lo))
    phi, chi, sign = _rzr_angles(U, sig1)
    log_lambda = acc.logScale + math.log(sig1) - 0.5 * math.log(det_repr)
    return ScaledRzr(phi=phi, chi=chi, sign=sign, logLambda=max(log_lambda, 0.0))


# Vectorized helpers on stacks of matrices, shape (N, 2, 2). These mirror the
# scalar routines exactly and exist for grid evaluation speed.


def rot_stack(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    out = np.empty(phi.shape + (2, 2))
    c = np.cos(phi)
    s = np.sin(phi)
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -s
    out[..., 1, 1] = c
    return out


def stretch_stack(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape + (2, 2))
    out[..., 0, 0] = lam
    out[..., 1, 1] = 1.0 / lam
    return out


def product_stack(stacks) -> tuple[np.ndarray, np.ndarray]:
    """Arrow-ordered product over a sequence of (N, 2, 2) stacks with
    per-entry Frobenius renormalization.

    Returns (unit, logScale) with unit of shape (N, 2, 2), each slice of
    Frobenius norm 1, and logScale of shape (N,).
    """
    it = iter(stacks)
    first = np.asarray(next(it), dtype=float)
    n = first.shape[0]
    unit = np.broadcast_to(np.eye(2) / math.sqrt(2.0), (n, 2, 2)).copy()
    log_scale = np.full(n, 0.5 * math.log(2.0))
    for M in [first, *it]:
        unit = np.asarray(M, dtype=float) @ unit
        f = np.sqrt(np.sum(unit * unit, axis=(1, 2)))
        if np.any(f == 0.0) or not np.all(np.isfinite(f)):
            raise DegenerateMatrixError("stack product hit a zero or non-finite slice")
        unit /= f[:, None, None]
        log_scale += np.log(f)
    return unit, log_scale


def svd_stack(
    unit: np.ndarray, log_scale: np.ndarray, det_repr: float = 1.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized svd_scaled over a renormalized stack.

    Returns (phi, chi, sign, logLambda) arrays. det_repr is the common
    determinant of the represented matrices (1 for det-1 chains).
    """
    U = np.asarray(unit, dtype=float)
    log_scale = np.asarray(log_scale, dtype=float)
    hi = (U[:, 0, 0] + U[:, 1, 1]) ** 2 + (U[:, 0, 1] - U[:, 1, 0]) ** 2
    lo = (U[:, 0, 0] - U[:, 1, 1]) ** 2 + (U[:, 0, 1] + U[:, 1, 0]) ** 2
    sig1 = 0.5 * (np.sqrt(hi) + np.sqrt(lo))
    sig1sq = sig1 * sig1
    g11 = U[:, 0, 0] ** 2 + U[:, 1, 0] ** 2
    g22 = U[:, 0, 1] ** 2 + U[:, 1, 1] ** 2
    g12 = U[:, 0, 0] * U[:, 0, 1] + U[:, 1, 0] * U[:, 1, 1]
    pick = g11 >= g22
    vx = np.where(pick, sig1sq - g22, g12)
    vy = np.where(pick, g12, sig1sq - g11)
    nv = np.hypot(vx, vy)
    iso = nv == 0.0
    nv_safe = np.where(iso, 1.0, nv)
    vx /= nv_safe
    vy /= nv_safe
    ux = (U[:, 0, 0] * vx + U[:, 0, 1] * vy) / sig1
    uy = (U[:, 1, 0] * vx + U[:, 1, 1] * vy) / sig1
    chi = np.arctan2(vy, vx)
    phi = np.arctan2(-uy, ux)
    # isotropic slices: angle from the entries, chi = 0
    phi = np.where(iso, np.arctan2(U[:, 0, 1], U[:, 0, 0]), phi)
    chi = np.where(iso, 0.0, chi)
    phi, f1 = canon_angle_arr(phi)
    chi, f2 = canon_angle_arr(chi)
    log_lambda = np.maximum(log_scale + np.log(sig1) - 0.5 * math.log(det_repr), 0.0)
    return phi, chi, f1 * f2, log_lambda


def canon_angle_arr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized canon_angle for inputs in (-pi, pi]."""
    a = np.asarray(a, dtype=float).copy()
    flip = np.ones_like(a, dtype=int)
    hi = a > _HALF_PI
    a[hi] -= math.pi
    flip[hi] = -1
    lo = a <= -_HALF_PI
    a[lo] += math.pi
    flip[lo] *= -1
    return a, flip
