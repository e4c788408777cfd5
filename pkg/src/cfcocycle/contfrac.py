"""Continued fractions and their transfer-matrix form.

A fraction is b0 + a1/(b1 + a2/(b2 + ...)). Convergents f_n = p_n / q_n
follow the three-term recurrence p_n = b_n p_{n-1} + a_n p_{n-2} with seeds
p_0 = b0, p_{-1} = 1, q_0 = 1, q_{-1} = 0. The transfer matrix of one step
is A(a, b) = [[b, a], [1, 0]], det = -a, and the arrow-ordered product
M_n = A_n ... A_1 recovers f_n = b0 + (M_n e2, e1) / (M_n e1, e1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, InvalidCFError
from .linalg2 import LogScaledMat2, mul_scaled, scaled_identity

# |q| below this (relative to max(|p|, 1)) counts as an infinite convergent
Q_ZERO_TOL = 1e-13


@dataclass(frozen=True)
class NumericCF:
    """Finite-horizon continued fraction: head term b0 and element pairs
    (a_j, b_j), j = 1..N."""

    b0: float
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) != len(b):
            raise ValueError(f"element arrays differ in length: {len(a)} vs {len(b)}")
        if not all(math.isfinite(x) for x in a) or not all(
            math.isfinite(x) for x in b
        ):
            raise ValueError("continued-fraction elements must be finite")
        b0 = float(self.b0)
        if not math.isfinite(b0):
            raise ValueError("head term b0 must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "b0", b0)

    @property
    def horizon(self) -> int:
        return len(self.a)

    def is_minus_one_form(self) -> bool:
        return all(x == -1.0 for x in self.a)


def constant_cf(b0: float, a: float, b: float, n: int) -> NumericCF:
    return NumericCF(b0=b0, a=(a,) * n, b=(b,) * n)


def minus_one_cf(b0: float, bs) -> NumericCF:
    bs = tuple(float(x) for x in bs)
    return NumericCF(b0=b0, a=(-1.0,) * len(bs), b=bs)


def transfer(b: float, a: float = -1.0) -> np.ndarray:
    """One-step transfer matrix [[b, a], [1, 0]]; det = -a exactly."""
    return np.array([[b, a], [1.0, 0.0]])


@dataclass(frozen=True)
class ConvergentState:
    """Numerator/denominator pairs after n steps of the recurrence."""

    p: float
    pPrev: float
    q: float
    qPrev: float
    n: int
    valueKind: str  # "finite" | "infinite"

    @property
    def value(self) -> float:
        if self.valueKind == "infinite":
            return math.inf if self.p >= 0 else -math.inf
        return self.p / self.q


def _value_kind(p: float, q: float) -> str:
    return "infinite" if abs(q) <= Q_ZERO_TOL * max(abs(p), 1.0) else "finite"


def convergents(cf: NumericCF, n: int) -> list:
    """States for k = 0..n; raw recurrence, suitable while p_n stays in
    double range (use the oracle's renormalized loop for long horizons)."""
    if not 0 <= n <= cf.horizon:
        raise ValueError(f"n must lie in [0, horizon={cf.horizon}], got {n}")
    p, pp = cf.b0, 1.0
    q, qq = 1.0, 0.0
    out = [ConvergentState(p=p, pPrev=pp, q=q, qPrev=qq, n=0, valueKind=_value_kind(p, q))]
    for k in range(1, n + 1):
        ak, bk = cf.a[k - 1], cf.b[k - 1]
        p, pp = bk * p + ak * pp, p
        q, qq = bk * q + ak * qq, q
        out.append(
            ConvergentState(p=p, pPrev=pp, q=q, qPrev=qq, n=k, valueKind=_value_kind(p, q))
        )
    return out


def convergents_via_cocycle(cf: NumericCF, n: int) -> list:
    """f_k, k = 0..n, read from the log-scaled arrow-ordered matrix product:
    f_k = b0 + (M_k e2, e1) / (M_k e1, e1). Returns +-inf for infinite
    convergents; raises if numerator and denominator vanish together."""
    if not 0 <= n <= cf.horizon:
        raise ValueError(f"n must lie in [0, horizon={cf.horizon}], got {n}")
    out = [cf.b0]
    acc = scaled_identity()
    for k in range(1, n + 1):
        acc = mul_scaled(acc, transfer(cf.b[k - 1], cf.a[k - 1]))
        den = acc.unit[0, 0]
        num = acc.unit[0, 1]
        if abs(den) <= Q_ZERO_TOL and abs(num) <= Q_ZERO_TOL:
            raise DegenerateStateError(
                f"numerator and denominator both vanish at step {k}"
            )
        if abs(den) <= Q_ZERO_TOL * max(abs(num), 1.0):
            out.append(math.inf if num >= 0 else -math.inf)
        else:
            out.append(cf.b0 + num / den)
    return out


@dataclass(frozen=True)
class EquivalenceFactors:
    """Scalars r_0 = 1, r_j != 0 with b'_j = r_j b_j, a'_j = r_j r_{j-1} a_j."""

    r: tuple


def to_minus_one_form(cf: NumericCF):
    """Equivalence transform onto a_j = -1 elements, preserving every
    convergent. Requires all a_j nonzero.

    The factors satisfy r_j r_{j-1} a_j = -1 identically, i.e.
    r_j = -1 / (a_j r_{j-1}) with r_0 = 1; magnitudes are accumulated in
    log form to delay overflow for wildly scaled inputs.
    """
    if any(x == 0.0 for x in cf.a):
        j = cf.a.index(0.0) + 1
        raise InvalidCFError(f"a_{j} = 0: the fraction terminates, no equivalent form")
    log_r = 0.0
    sign_r = 1.0
    rs = [1.0]
    new_b = []
    for j in range(1, cf.horizon + 1):
        aj = cf.a[j - 1]
        log_r = -(math.log(abs(aj)) + log_r)
        sign_r = -math.copysign(1.0, aj) * sign_r
        r = sign_r * math.exp(log_r)
        rs.append(r)
        new_b.append(r * cf.b[j - 1])
        if not math.isfinite(r) or r == 0.0:
            raise InvalidCFError(
                f"equivalence factor r_{j} left double range; rescale the input"
            )
    out = NumericCF(b0=cf.b0, a=(-1.0,) * cf.horizon, b=tuple(new_b))
    return out, EquivalenceFactors(r=tuple(rs))


@dataclass(frozen=True)
class ContractionSpec:
    """Strictly increasing 1-based indices n_k to keep."""

    xi: tuple

    def __post_init__(self):
        xi = tuple(int(k) for k in self.xi)
        if len(xi) == 0:
            raise ValueError("contraction needs at least one index")
        if xi[0] < 1 or any(b <= a for a, b in zip(xi, xi[1:])):
            raise ValueError(f"indices must be strictly increasing and >= 1: {xi}")
        object.__setattr__(self, "xi", xi)


def _block_product(bs, lo: int, hi: int):
    """Ascending product T_{lo+1} ... T_{hi} of columns-convention steps.

    T_m = [[b_m, 1], [-1, 0]] right-multiplies the joint-state matrix
    S_m = [[p_m, p_{m-1}], [q_m, q_{m-1}]], so S_hi = S_lo * (this product).
    Returned as (unit, log) with unit of Frobenius norm 1.
    """
    unit = np.eye(2)
    log_scale = 0.0
    for m in range(lo + 1, hi + 1):
        bm = bs[m - 1]
        unit = unit @ np.array([[bm, 1.0], [-1.0, 0.0]])
        mag = float(np.max(np.abs(unit)))
        if mag == 0.0 or not math.isfinite(mag):
            raise ValueError(f"degenerate contraction block ending at index {m}")
        if mag > 1e100:  # renormalize lazily so short blocks stay exact
            unit = unit / mag
            log_scale += math.log(mag)
    return unit, log_scale


def contract(cf: NumericCF, spec: ContractionSpec) -> NumericCF:
    """Contracted fraction whose k-th convergent equals f_{n_k}.

    The joint states satisfy w_{n_k} = alpha_k w_{n_{k-1}} + beta_k w_{n_{k-2}}
    (n_0 = 0, n_{-1} = -1); then b^_k = alpha_k, a^_k = beta_k.  Coefficients
    come from per-gap step products, not from solving against deep states: the
    latter lose the decaying direction and go singular for hyperbolic chains.
    With G over (n_{k-1}, n_k] and H over (n_{k-2}, n_{k-1}],

        alpha_k = G00 + G10 H11 / H10,   beta_k = -G10 det(H) / H10,

    and det(H) = 1 exactly in the minus-one form.  The first kept index reads
    alpha, beta directly against the seed basis [[b0, 1], [1, 0]].
    """
    if not cf.is_minus_one_form():
        raise ValueError("contract requires the minus-one form; convert first")
    if spec.xi[-1] > cf.horizon:
        raise ValueError(
            f"contraction index {spec.xi[-1]} exceeds horizon {cf.horizon}"
        )
    b_hat = []
    a_hat = []
    idx = list(spec.xi)
    prev_block = None  # (unit, log) of the block ending at n_{k-1}
    lo = 0
    for k, nk in enumerate(idx):
        g_unit, g_log = _block_product(cf.b, lo, nk)
        if k == 0:
            alpha = g_unit[0, 0] * math.exp(g_log)
            beta = g_unit[1, 0] * math.exp(g_log)
        else:
            h_unit, h_log = prev_block
            if abs(h_unit[1, 0]) <= 1e-14:
                raise ValueError(
                    f"contraction system singular at index {nk}: "
                    "kept states are linearly dependent"
                )
            alpha = (g_unit[0, 0]
                     + g_unit[1, 0] * h_unit[1, 1] / h_unit[1, 0]) * math.exp(g_log)
            beta = -g_unit[1, 0] / h_unit[1, 0] * math.exp(g_log - h_log)
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ValueError(
                f"contracted element at index {nk} overflows the double range"
            )
        b_hat.append(alpha)
        a_hat.append(beta)
        prev_block = (g_unit, g_log)
        lo = nk
    return NumericCF(b0=cf.b0, a=tuple(a_hat), b=tuple(b_hat))
