"""Convergence certificates for minus-one-form continued fractions.

Classical pointwise tests plus the hyperbolicity machinery: certified
stretch floors from pair minima, angle conditions with explicit constants,
inheritance of growth bounds under regrouping, the admissible two-block
window, and certification of chains whose angle condition fails only along
isolated index pairs.  Every certificate records the constants it was
checked with.  Failure is a verdict, not an exception; exceptions are
reserved for malformed inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cocycle import (
    _EXP_MAX,
    _merge_z,
    _tan_branch,
    accumulate,
    block_svd,
    build_rz_chain,
    merge,
    pair_svds,
)
from .contfrac import NumericCF


def strictly_greater(a: float, b: float, margin: float = 1e-9) -> bool:
    """a > b with a relative separation margin.

    Certified strict inequalities need clearance: a raw float comparison
    that succeeds by one ulp certifies nothing.
    """
    return a - b > margin * max(1.0, abs(a), abs(b))


def _cot(angle: float) -> float:
    t = math.tan(angle)
    return 1.0 / t if t != 0.0 else math.inf


# ---------------------------------------------------------------------------
# classical pointwise tests


@dataclass(frozen=True)
class ClassicalVerdict:
    """Outcome of one pointwise convergence test up to a finite horizon."""

    test: str
    holdsUpToHorizon: bool
    horizon: int
    witness: Optional[int] = None
    partialSum: Optional[float] = None


def classical_tests(cf: NumericCF, horizon: int) -> list:
    """Pointwise classical conditions checked up to a finite horizon.

    seidelStern requires a_j = 1 and b_j > 0 and reports the partial sum
    of the b_j; its divergence requirement is only *consistent with* finite
    evidence, never established by it.  pringsheim requires
    |b_j| >= |a_j| + 1.  worpitsky requires |a_j| = 1 and |b_j| >= 2.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    n = min(int(horizon), len(cf.a))
    conds = (
        ("seidelStern", lambda a, b: a == 1.0 and b > 0.0),
        ("pringsheim", lambda a, b: abs(b) >= abs(a) + 1.0),
        ("worpitsky", lambda a, b: abs(a) == 1.0 and abs(b) >= 2.0),
    )
    out = []
    for name, cond in conds:
        witness = next(
            (j for j in range(1, n + 1) if not cond(cf.a[j - 1], cf.b[j - 1])),
            None,
        )
        out.append(
            ClassicalVerdict(
                test=name,
                holdsUpToHorizon=witness is None,
                horizon=n,
                witness=witness,
                partialSum=math.fsum(cf.b[:n]) if name == "seidelStern" else None,
            )
        )
    return out


# ---------------------------------------------------------------------------
# pair-minimum stretch floor


@dataclass(frozen=True)
class H1Certificate:
    """Certified lower bound for the pair minimum and its stretch floor.

    hStarSq already has the grid margin subtracted, so it is a true lower
    bound whenever the supplied derivative bounds are.  Lambda0 is the
    stretch floor implied by hStarSq.  triggers (sequence scope only)
    reports the two sufficient patterns: all |b_j| >= 2, and
    |b_j| < 2 => |b_{j+1}| >= 2.
    """

    hStarSq: float
    Lambda0: float
    scope: str
    gridSize: int
    lipschitzMargin: float
    valid: bool
    tolerance: float
    triggers: Optional[tuple] = None
    lambdaFloorAtG: Optional[float] = None


_H1_SCOPES = ("sequence", "circleGrid", "scaledCircle", "differenceOnly")


def _lambda0_of(hSq: float) -> float:
    return 0.5 * (math.sqrt(4.0 + hSq) + math.sqrt(hSq))


def _circle_dist(x, p):
    d = np.abs(np.mod(np.asarray(x, dtype=float) - p, 1.0))
    return np.minimum(d, 1.0 - d)


def _sequence_bs(source) -> list:
    if isinstance(source, NumericCF):
        if any(a != -1.0 for a in source.a):
            raise ValueError("pair-minimum analysis applies to the minus-one form")
        return [float(b) for b in source.b]
    seq = list(source)
    if seq and hasattr(seq[0], "bOdd"):
        out = []
        for s in seq:
            out.extend((s.bOdd, s.bEven))
        return out
    return [float(b) for b in seq]


def _restriction(restrictTo):
    if hasattr(restrictTo, "points"):
        return tuple(restrictTo.points), float(restrictTo.delta)
    points, delta = restrictTo
    return tuple(float(p) for p in points), float(delta)


def check_h1(source, scope: str = "sequence", gridSize: int = 2 ** 14,
             restrictTo=None, tolerance: float = 1e-12) -> H1Certificate:
    """Certify the infimum of the pair quantity (b - b~)^2 + b^2 b~^2.

    sequence scope takes a minus-one-form CF, a raw coefficient sequence,
    or precomputed pair SVDs; the minimum over the listed pairs is exact.

    The functional scopes take a generator (attributes b, omega, g, with b
    exposing vectorized value() plus certified bound()/derivBound()) and
    evaluate on a uniform grid of gridSize points, subtracting a Lipschitz
    margin L/(2N) so the result is a true lower bound:

      circleGrid      pair quantity of the folded function g*b
      scaledCircle    (b(y) - b(y-w))^2 + g^2 b(y)^2 b(y-w)^2, raw b
      differenceOnly  |b(y) - b(y-w)|, reported squared

    restrictTo = (points, delta) or any object with those attributes
    confines the grid to the delta-neighborhoods of the points, padded one
    grid cell outward (padding can only lower the reported minimum, which
    keeps it a valid bound).  scaledCircle additionally reports the stretch
    floor at scale g, where the certified minimum enters as g^2 * hStarSq.
    """
    if scope not in _H1_SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {_H1_SCOPES}")

    if scope == "sequence":
        bs = _sequence_bs(source)
        if len(bs) < 2:
            raise ValueError("need at least one coefficient pair")
        pairs = len(bs) // 2
        hs = [
            (bs[2 * k] - bs[2 * k + 1]) ** 2 + (bs[2 * k] * bs[2 * k + 1]) ** 2
            for k in range(pairs)
        ]
        h_star = min(hs)
        absb = [abs(b) for b in bs]
        worp = all(v >= 2.0 for v in absb)
        chained = all(
            absb[j + 1] >= 2.0 for j in range(len(absb) - 1) if absb[j] < 2.0
        )
        return H1Certificate(
            hStarSq=h_star,
            Lambda0=_lambda0_of(h_star),
            scope=scope,
            gridSize=pairs,
            lipschitzMargin=0.0,
            valid=h_star > tolerance,
            tolerance=tolerance,
            triggers=(worp, chained),
        )

    b, omega, g = source.b, float(source.omega), float(source.g)
    n = int(gridSize)
    if n < 8:
        raise ValueError("functional scopes need a grid of at least 8 points")
    if restrictTo is not None:
        points, delta = _restriction(restrictTo)
        if not points:
            raise ValueError("restriction needs at least one point")
        # one grid cell of outward padding; over-covering only lowers the
        # reported minimum, so the certificate stays a valid bound
        pad = delta + 1.0 / n
        segs = []
        for p in points:
            lo = math.ceil((p - pad) * n)
            hi = math.floor((p + pad) * n)
            if hi - lo + 1 >= n:
                segs.append(np.arange(n))
            else:
                segs.append(np.mod(np.arange(lo, hi + 1), n))
        idx = np.unique(np.concatenate(segs))
        if idx.size == 0:
            raise ValueError("restriction region contains no grid points")
        ys = idx.astype(float) / n
    else:
        ys = np.arange(n, dtype=float) / n
    v0 = np.asarray(b.value(ys), dtype=float)
    v1 = np.asarray(b.value(np.mod(ys - omega, 1.0)), dtype=float)
    B = float(b.bound())
    Bp = float(b.derivBound())

    lam_floor = None
    if scope == "circleGrid":
        u0, u1 = g * v0, g * v1
        vals = (u0 - u1) ** 2 + (u0 * u1) ** 2
        Bf, Bfp = g * B, g * Bp
        lips = 8.0 * Bf * Bfp + 4.0 * Bf ** 3 * Bfp
        margin = lips / (2.0 * n)
        h_star = max(float(vals.min()) - margin, 0.0)
    elif scope == "scaledCircle":
        vals = (v0 - v1) ** 2 + (g * v0 * v1) ** 2
        lips = 8.0 * B * Bp + 4.0 * g * g * B ** 3 * Bp
        margin = lips / (2.0 * n)
        h_star = max(float(vals.min()) - margin, 0.0)
        gh = g * g * h_star
        lam_floor = 0.5 * (math.sqrt(4.0 + gh) + math.sqrt(gh))
    else:  # differenceOnly
        vals = np.abs(v0 - v1)
        margin = 2.0 * Bp / (2.0 * n)
        h_star = max(float(vals.min()) - margin, 0.0) ** 2
    return H1Certificate(
        hStarSq=h_star,
        Lambda0=_lambda0_of(h_star),
        scope=scope,
        gridSize=n,
        lipschitzMargin=margin,
        valid=h_star > tolerance,
        tolerance=tolerance,
        lambdaFloorAtG=lam_floor,
    )


# ---------------------------------------------------------------------------
# angle condition with explicit constants


@dataclass(frozen=True)
class H2Certificate:
    """Constant admissibility plus the pointwise angle condition.

    conditionsOk holds (c1, c2, c3): the strict constant inequalities, the
    non-strict floor for Clambda, and the pointwise condition lam >= Lambda0
    with Lambda0 |cot Phi| >= delta*Clambda.  On success the product norms
    are measured against boundConstant * boundRate^(n-1) and the carried
    angle against the sustained floor Lambda0 |cot(Phi + psi)| >= Clambda.
    """

    Lambda0: float
    Clambda: float
    delta: float
    ChatLambda: float
    conditionsOk: tuple
    boundConstant: float
    boundRate: float
    witness: Optional[int] = None
    measuredOk: Optional[bool] = None
    angleOk: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return all(self.conditionsOk)


def _clambda_floor1(Lambda0: float) -> float:
    return Lambda0 / math.sqrt(Lambda0 * Lambda0 - 1.0)


def _clambda_floor2(Lambda0: float, delta: float) -> float:
    den = (delta - 1.0) * Lambda0 * Lambda0 - delta
    if den <= 0.0:
        return math.inf
    return (delta - 1.0 + Lambda0 * Lambda0) / den


def _chat(Lambda0: float, Clambda: float) -> float:
    return Lambda0 * Clambda / math.hypot(Lambda0, Clambda)


def check_h2(chain, Lambda0: float, Clambda: float, delta: float,
             margin: float = 1e-9) -> H2Certificate:
    """Check the three condition groups of the angle criterion on a chain.

    c1: Lambda0 > 1, Clambda > Lambda0/sqrt(Lambda0^2 - 1) and
        delta > Lambda0^2/(Lambda0^2 - 1), all margin-guarded.
    c2: Clambda >= (delta - 1 + Lambda0^2)/((delta - 1) Lambda0^2 - delta).
    c3: every step satisfies lam >= Lambda0 and
        Lambda0 |cot Phi| >= delta * Clambda; witness is the first failure.
    """
    chain = list(chain)
    if not chain:
        raise ValueError("empty chain")
    if Lambda0 > 1.0:
        c1 = (
            strictly_greater(Lambda0, 1.0, margin)
            and strictly_greater(Clambda, _clambda_floor1(Lambda0), margin)
            and strictly_greater(
                delta, Lambda0 * Lambda0 / (Lambda0 * Lambda0 - 1.0), margin
            )
        )
        c2 = Clambda >= _clambda_floor2(Lambda0, delta)
    else:
        c1 = False
        c2 = False
    thresh = delta * Clambda
    witness = None
    for i, step in enumerate(chain):
        if step.lam < Lambda0 or Lambda0 * abs(_cot(step.Phi)) < thresh:
            witness = i + 1
            break
    c3 = witness is None
    chat = _chat(Lambda0, Clambda)
    measured_ok = None
    angle_ok = None
    if c1 and c2 and c3:
        states = accumulate(chain)
        log_chat = math.log(chat)
        log_l0 = math.log(Lambda0)
        measured_ok = all(
            s.logMu >= log_l0 + i * log_chat - 1e-8 for i, s in enumerate(states)
        )
        angle_ok = all(
            Lambda0 * abs(_cot(chain[i].Phi + states[i - 1].psi))
            >= Clambda - 1e-9
            for i in range(1, len(chain))
        )
    return H2Certificate(
        Lambda0=Lambda0,
        Clambda=Clambda,
        delta=delta,
        ChatLambda=chat,
        conditionsOk=(c1, c2, c3),
        boundConstant=Lambda0,
        boundRate=chat,
        witness=witness,
        measuredOk=measured_ok,
        angleOk=angle_ok,
    )


def auto_h2_constants(chain, Lambda0: float, margin: float = 1e-9,
                      gridPoints: int = 64,
                      headroom: float = 1e-6) -> Optional[H2Certificate]:
    """Scan admissible (delta, Clambda) pairs; return the first passing
    certificate or None.

    delta runs over a log grid in (Lambda0^2/(Lambda0^2-1), 10x that]; each
    delta gets the smallest admissible Clambda plus headroom, which makes
    the angle threshold delta*Clambda as permissive as that delta allows.
    """
    chain = list(chain)
    if Lambda0 <= 1.0 or not chain:
        return None
    lower = Lambda0 * Lambda0 / (Lambda0 * Lambda0 - 1.0)
    floor1 = _clambda_floor1(Lambda0)
    for i in range(1, gridPoints + 1):
        delta = lower * 10.0 ** (i / gridPoints)
        cl = max(floor1, _clambda_floor2(Lambda0, delta)) + headroom
        cert = check_h2(chain, Lambda0, cl, delta, margin=margin)
        if cert.ok:
            return cert
    return None


# ---------------------------------------------------------------------------
# regrouped-chain inheritance


@dataclass(frozen=True)
class Lemma4Verdict:
    """Growth bound inherited by a chain from its regrouped certificate.

    conditionsOk holds (c1, c2, c3): per-step norm cap lam <= CB, gap cap
    (kept indices at most N0 apart, leading block included), and positive
    diluted rate ChatLambda^(1/N0) > 1.  k0 is the smallest integer making
    CLambda = ChatLambda^(k0/((k0+1) N0)) / CB^(1/(k0+1)) clear 1; the
    measured check compares the final per-step log growth of the source
    chain against log CLambda.
    """

    CB: float
    N0: int
    k0: int
    CLambda: float
    conditionsOk: tuple
    subOk: bool
    overall: bool
    certifiedRate: float
    measuredRate: float
    measuredOk: bool
    minOffset: float
    witness: Optional[int] = None


def lemma4_check(grouped, CB: float, N0: int, subCert: H2Certificate,
                 margin: float = 1e-9) -> Lemma4Verdict:
    """Transfer a regrouped growth certificate back to the source chain."""
    if CB <= 1.0:
        raise ValueError("norm cap CB must exceed 1")
    if N0 < 1:
        raise ValueError("gap cap N0 must be at least 1")
    src = list(grouped.sourceChain)
    witness = next(
        (i + 1 for i, step in enumerate(src) if step.lam > CB), None
    )
    c1 = witness is None
    xi = list(grouped.xi)
    gaps = [xi[0]] + [xi[k + 1] - xi[k] for k in range(len(xi) - 1)]
    c2 = all(gp <= N0 for gp in gaps)
    if c1 and not c2:
        witness = next(k + 1 for k, gp in enumerate(gaps) if gp > N0)
    chat = subCert.ChatLambda
    sub_ok = subCert.ok
    rate_unit = math.log(chat) / N0 if chat > 0.0 else -math.inf
    c3 = strictly_greater(chat ** (1.0 / N0), 1.0, margin) if chat > 0 else False

    k0 = 0
    log_cl = math.nan
    if rate_unit > margin:
        log_cb = math.log(CB)
        k0 = max(1, math.ceil((log_cb + margin) / (rate_unit - margin)))
        while (k0 * rate_unit - log_cb) / (k0 + 1.0) <= margin:
            k0 += 1
        log_cl = (k0 * rate_unit - log_cb) / (k0 + 1.0)

    states = accumulate(src)
    measured_rate = states[-1].logMu / len(src)
    if math.isfinite(log_cl):
        measured_ok = measured_rate >= log_cl - 1e-8
        min_offset = min(
            s.logMu - (i + 1) * log_cl for i, s in enumerate(states)
        )
        c_lambda = math.exp(log_cl)
    else:
        measured_ok = False
        min_offset = math.nan
        c_lambda = math.nan
    return Lemma4Verdict(
        CB=CB,
        N0=N0,
        k0=k0,
        CLambda=c_lambda,
        conditionsOk=(c1, c2, c3),
        subOk=sub_ok,
        overall=c1 and c2 and c3 and sub_ok and measured_ok,
        certifiedRate=log_cl,
        measuredRate=measured_rate,
        measuredOk=measured_ok,
        minOffset=min_offset,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# admissible two-block window


@dataclass(frozen=True)
class Lemma5Window:
    """Admissible slot-angle bound and the follow-up angle interval.

    u is the scaled cotangent of the first slot angle; |u| <= uBound keeps
    the merged carry angle strong enough that any cot phi2 inside
    cotPhi2Interval preserves Lambda0 |cot(phi2 + psi)| >= Clambda.
    """

    u: float
    kappa: float
    rho: float
    uBound: float
    cotPhi2Interval: tuple
    psi: float
    zeta: float
    uAdmissible: bool
    stretchFloorOk: bool


def admissible_u_bound(lambda1: float, lambda2: float, Lambda0: float,
                       Clambda: float) -> tuple:
    """(kappa, rho, uBound) for the two-stretch window; pure formula, no
    domain validation.  lambda1 is the first-applied (larger) stretch."""
    i1 = lambda1 ** -4
    i2 = lambda2 ** -4
    kappa = (1.0 - i1) / (1.0 - i1 * i2)
    den = (1.0 - i1) ** 2
    rho = (1.0 - (lambda2 ** 4 + i2) * i1 + i1 * i1) / den if den > 0 else math.nan
    L = math.log(Lambda0 / Clambda)
    sh = math.sinh(L)
    return kappa, rho, kappa * (math.sqrt(sh * sh + rho) - sh)


def lemma5_window(lambda1: float, lambda2: float, Lambda0: float,
                  Clambda: float, phi1: Optional[float] = None) -> Lemma5Window:
    """Window for the product R(phi2) Z(lambda2) R(phi1) Z(lambda1).

    Validates 1 < Clambda < Lambda0 and lambda1 > lambda2 >= 1; the stretch
    floor lambda2 >= Lambda0 is reported rather than enforced so the
    degenerate lambda2 -> 1 limit stays evaluable.  With phi1 omitted the
    centered representative phi1 = pi/2 (u = 0 exactly) is analyzed.
    The interval endpoints are (L0 +- C w)/(L0 w -+ C) with w the cotangent
    of the merged carry angle psi.
    """
    l1, l2 = float(lambda1), float(lambda2)
    L0, C = float(Lambda0), float(Clambda)
    if not strictly_greater(L0, 1.0):
        raise ValueError("stretch floor Lambda0 must exceed 1")
    if not (1.0 < C < L0):
        raise ValueError("need 1 < Clambda < Lambda0")
    if not l1 > l2 >= 1.0:
        raise ValueError("need lambda1 > lambda2 >= 1")
    kappa, rho, u_bound = admissible_u_bound(l1, l2, L0, C)
    if phi1 is None:
        phi = 0.5 * math.pi
        u = 0.0
    else:
        phi = float(phi1)
        u = l2 * l2 * _cot(phi)
    res = merge(l1, l2, phi)
    psi = res.psi
    zeta = _merge_z(l2, l1, phi)
    tp = math.tan(psi)
    w = 1.0 / tp if tp != 0.0 else math.inf
    e1 = (L0 + C * w) / (L0 * w - C)
    e2 = (L0 - C * w) / (L0 * w + C)
    return Lemma5Window(
        u=u,
        kappa=kappa,
        rho=rho,
        uBound=u_bound,
        cotPhi2Interval=(min(e1, e2), max(e1, e2)),
        psi=psi,
        zeta=zeta,
        uAdmissible=abs(u) <= u_bound,
        stretchFloorOk=l2 >= L0 and l1 >= L0,
    )


# ---------------------------------------------------------------------------
# isolated violation pairs: shared grouping machinery


def _violation_pairs(mSeq, K0: int) -> list:
    """Pair up violation indices (1-based) and drop the first K0 pairs.

    Requires strict increase, room for a split index inside every pair
    from index max(K0, 1) on, and at least three usable pairs.  A trailing
    unpaired index is ignored.
    """
    m = [int(v) for v in mSeq]
    if any(m[i + 1] <= m[i] for i in range(len(m) - 1)):
        raise ValueError("violation indices must be strictly increasing")
    if m and m[0] < 1:
        raise ValueError("violation indices are 1-based")
    if K0 < 0:
        raise ValueError("K0 must be nonnegative")
    pairs = [(m[2 * s], m[2 * s + 1]) for s in range(len(m) // 2)]
    for s in range(max(K0, 1) - 1, len(pairs)):
        if pairs[s][1] - pairs[s][0] <= 1:
            raise ValueError(
                f"violation pair {s + 1} leaves no room for a split index"
            )
    usable = pairs[K0:]
    if len(usable) < 3:
        raise ValueError("need at least three violation pairs past K0")
    return usable


def _split_indices(pairs, lSeq) -> tuple:
    """(nSeq, lSeq, jSeq) with user-supplied or midpoint split indices."""
    n_seq = [p[0] for p in pairs]
    j_seq = [p[1] for p in pairs]
    if lSeq is None:
        l_seq = [(n + j) // 2 for n, j in pairs]
    else:
        l_seq = [int(v) for v in lSeq]
        if len(l_seq) != len(pairs):
            raise ValueError("need one split index per violation pair")
        for (n, j), l in zip(pairs, l_seq):
            if not n < l < j:
                raise ValueError(
                    f"split index {l} must lie strictly inside ({n}, {j})"
                )
    return tuple(n_seq), tuple(l_seq), tuple(j_seq)


def _sandwich_psi(lamLeft: float, logLamRight: float, phi: float) -> float:
    """Carry angle of Z(lamLeft) R(phi) Z(huge) without forming the huge
    stretch; an overflowing right stretch lands on its exact limit."""
    big = math.exp(logLamRight) if logLamRight < _EXP_MAX else math.inf
    z = _merge_z(lamLeft, big, phi)
    eps = 1.0 if math.sin(2.0 * phi) > 0.0 else -1.0
    return math.atan(_tan_branch(z, eps))


# ---------------------------------------------------------------------------
# certification with isolated violation pairs


@dataclass(frozen=True)
class Theorem3Params:
    """Constants for certification with isolated angle violations."""

    Lambda0Min: float
    Lambda0Max: float
    Clambda: float
    Glambda: float
    delta: float
    N0: int
    K0: int = 0
    lSeq: Optional[tuple] = None
    margin: float = 1e-9


@dataclass(frozen=True)
class Theorem3Certificate:
    """Certificate for a chain whose angle condition fails only along
    isolated index pairs.

    perK lists, for every group with a complete successor, the seven
    condition booleans (stretch cap, positive diluted rates for both
    constant sets, gap cap, dominance of the recovery block, admissible
    slot magnitude, follow-up angle window).  The window condition is
    evaluated both as printed (tan) and in cotangent form; overall gates
    on the cotangent variant and on the measured growth cross-check.
    """

    Lambda0Min: float
    Lambda0Max: float
    Clambda: float
    Glambda: float
    delta: float
    N0: int
    mSeq: tuple
    nSeq: tuple
    lSeq: tuple
    jSeq: tuple
    perK: tuple
    overall: bool
    ChatLambda: float
    GhatLambda: float
    K0: int
    baseConstantsOk: bool
    lamRangeOk: bool
    goodStepsOk: bool
    cond7Printed: tuple
    cond7Cot: tuple
    uSeq: tuple
    uBoundSeq: tuple
    PsiSeq: tuple
    certifiedRate: float
    measuredRate: float
    measuredOk: bool
    witness: Optional[int] = None


def theorem3_certify(chain, mSeq, params: Theorem3Params) -> Theorem3Certificate:
    """Certify growth of a chain with isolated angle-violation pairs.

    Violations are paired; each pair (n_k, j_k) brackets a recovery run
    that a split index l_k divides into a neutral head and a dominance
    block.  Off-violation steps must satisfy the plain angle condition
    with (Lambda0Min, Clambda, delta); per group the seven listed
    conditions are checked with the stronger constant Glambda.  An empty
    mSeq degenerates to the plain certificate check.
    """
    chain = list(chain)
    if not chain:
        raise ValueError("empty chain")
    L0m, L0M = float(params.Lambda0Min), float(params.Lambda0Max)
    C, G, delta = float(params.Clambda), float(params.Glambda), float(params.delta)
    N0, K0, margin = int(params.N0), int(params.K0), float(params.margin)
    if N0 < 1:
        raise ValueError("gap cap N0 must be at least 1")

    chat = _chat(L0m, C)
    ghat = _chat(L0m, G)
    states = accumulate(chain)
    measured_rate = states[-1].logMu / len(chain)
    certified_rate = math.log(chat) / N0 if chat > 0 else -math.inf
    measured_ok = measured_rate >= certified_rate - 1e-3

    if len(list(mSeq)) == 0:
        sub = check_h2(chain, L0m, C, delta, margin=margin)
        ok = sub.ok and bool(sub.measuredOk)
        lam_max_ok = all(s.lam <= L0M for s in chain)
        return Theorem3Certificate(
            Lambda0Min=L0m, Lambda0Max=L0M, Clambda=C, Glambda=G,
            delta=delta, N0=N0, mSeq=(), nSeq=(), lSeq=(), jSeq=(),
            perK=(), overall=ok and lam_max_ok and measured_ok,
            ChatLambda=chat, GhatLambda=ghat, K0=K0,
            baseConstantsOk=sub.conditionsOk[0] and sub.conditionsOk[1],
            lamRangeOk=lam_max_ok and sub.conditionsOk[2],
            goodStepsOk=sub.conditionsOk[2],
            cond7Printed=(), cond7Cot=(), uSeq=(), uBoundSeq=(), PsiSeq=(),
            certifiedRate=certified_rate, measuredRate=measured_rate,
            measuredOk=measured_ok, witness=sub.witness,
        )

    pairs = _violation_pairs(mSeq, K0)
    n_seq, l_seq, j_seq = _split_indices(pairs, params.lSeq)
    if n_seq[-1] > len(chain):
        raise ValueError("grouping extends past the chain horizon")
    P = len(pairs)
    m_set = {int(v) for v in mSeq}

    # hypothesis-level checks with the base constants
    base_ok = (
        L0m > 1.0
        and strictly_greater(L0m, 1.0, margin)
        and strictly_greater(C, _clambda_floor1(L0m), margin)
        and strictly_greater(delta, L0m * L0m / (L0m * L0m - 1.0), margin)
        and C >= _clambda_floor2(L0m, delta)
        and strictly_greater(G, 1.0, margin)
        and strictly_greater(L0m, G, margin)
    )
    lam_range_ok = all(L0m <= s.lam <= L0M for s in chain)
    thresh = delta * C
    good_ok = all(
        L0m * abs(_cot(chain[i].Phi)) >= thresh
        for i in range(len(chain))
        if (i + 1) not in m_set
    )
    c2 = strictly_greater(chat, 1.0, margin)
    c3 = strictly_greater(ghat, 1.0, margin)
    log_chat = math.log(chat) if chat > 0 else -math.inf
    log_g = math.log(G)
    log_l0max = math.log(L0M)
    L_gap = math.log(L0m / G) if L0m > G > 0 else math.nan

    bm = [block_svd(chain, l_seq[k], j_seq[k]) for k in range(P - 1)]
    bp = [block_svd(chain, j_seq[k], n_seq[k + 1]) for k in range(P - 1)]

    per_k = []
    c7_printed = []
    c7_cot = []
    u_seq = []
    ub_seq = []
    psi_seq = []
    witness = None

    def _note(k):
        nonlocal witness
        if witness is None:
            witness = k + 1

    for k in range(P - 2):
        c1k = all(
            chain[i].lam <= L0M for i in range(n_seq[k], n_seq[k + 1])
        )
        c4k = n_seq[k + 1] - j_seq[k] <= N0
        c5k = (
            (j_seq[k] - l_seq[k]) * log_chat
            >= log_g + (n_seq[k + 1] - j_seq[k]) * log_l0max
        )
        phi_m = bm[k + 1].chi + bm[k].phi
        phi_p = bp[k + 1].chi + bp[k].phi
        log_lm = bm[k].logLambda
        log_lp = bp[k].logLambda
        if log_lm > log_lp and math.isfinite(L_gap) and L_gap > 0:
            cot_m = _cot(phi_m)
            u = math.exp(2.0 * log_lp) * cot_m
            i1 = math.exp(-4.0 * log_lm)          # (lam-)^-4
            i2 = math.exp(-4.0 * log_lp)          # (lam+)^-4
            cross = math.exp(4.0 * (log_lp - log_lm))
            kappa = (1.0 - i1) / (1.0 - i1 * i2)
            den = (1.0 - i1) ** 2
            rho = (1.0 - cross - i1 * i2 + i1 * i1) / den if den > 0 else math.nan
            sh = math.sinh(L_gap)
            ub = kappa * (math.sqrt(sh * sh + rho) - sh)
            c6k = abs(u) <= ub
        else:
            u, ub, c6k = math.nan, math.nan, False
        lam_p = math.exp(log_lp)
        psi = _sandwich_psi(lam_p, log_lm, phi_m)
        tp = math.tan(psi)
        w = 1.0 / tp if tp != 0.0 else math.inf
        e1 = (L0m + G * w) / (L0m * w - G)
        e2 = (L0m - G * w) / (L0m * w + G)
        lo, hi = min(e1, e2), max(e1, e2)
        c7t = lo <= math.tan(phi_p) <= hi
        c7c = lo <= _cot(phi_p) <= hi
        row = (c1k, c2, c3, c4k, c5k, c6k, c7c)
        per_k.append(row)
        c7_printed.append(c7t)
        c7_cot.append(c7c)
        u_seq.append(u)
        ub_seq.append(ub)
        psi_seq.append(psi)
        if not all(row):
            _note(k)

    # straggler group P-1 has no successor; check what stays evaluable
    k = P - 2
    tail_c1 = all(chain[i].lam <= L0M for i in range(n_seq[k], n_seq[k + 1]))
    tail_c4 = n_seq[k + 1] - j_seq[k] <= N0
    tail_c5 = (
        (j_seq[k] - l_seq[k]) * log_chat
        >= log_g + (n_seq[k + 1] - j_seq[k]) * log_l0max
    )
    if not (tail_c1 and tail_c4 and tail_c5):
        _note(k)

    overall = (
        base_ok
        and lam_range_ok
        and good_ok
        and all(all(r) for r in per_k)
        and tail_c1 and tail_c4 and tail_c5
        and measured_ok
    )
    return Theorem3Certificate(
        Lambda0Min=L0m,
        Lambda0Max=L0M,
        Clambda=C,
        Glambda=G,
        delta=delta,
        N0=N0,
        mSeq=tuple(int(v) for v in mSeq),
        nSeq=n_seq,
        lSeq=l_seq,
        jSeq=j_seq,
        perK=tuple(per_k),
        overall=overall,
        ChatLambda=chat,
        GhatLambda=ghat,
        K0=K0,
        baseConstantsOk=base_ok,
        lamRangeOk=lam_range_ok,
        goodStepsOk=good_ok,
        cond7Printed=tuple(c7_printed),
        cond7Cot=tuple(c7_cot),
        uSeq=tuple(u_seq),
        uBoundSeq=tuple(ub_seq),
        PsiSeq=tuple(psi_seq),
        certifiedRate=certified_rate,
        measuredRate=measured_rate,
        measuredOk=measured_ok,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# scaled coefficient pattern with tuned dips


@dataclass(frozen=True)
class Corollary2Settings:
    """Constants for certifying the scaled pattern b_j = g * bHat_j."""

    C1: float
    C2: float
    alpha: float
    N0: int
    K0: int = 0
    lSeq: Optional[tuple] = None
    margin: float = 1e-9
    gGrid: tuple = ()


@dataclass(frozen=True)
class Corollary2Params:
    """Verdict for the scaled pattern with dips at the listed positions.

    conditions holds the seven booleans: dip spacing, the two closeness
    bounds at even and odd dip positions, gap cap, recovery dominance,
    power-law smallness of the recovery-block cotangent, and the opposite
    sign of the neighbouring block cotangents.  g0 is the smallest tested
    scale (from gGrid, falling back to g) at which every numeric check
    passes and the measured product grows.
    """

    g: float
    C1: float
    C2: float
    alpha: float
    tSeq: tuple
    K0: int
    N0: int
    conditions: tuple
    overall: bool
    mSeq: tuple
    g0: Optional[float]
    measuredRate: float
    h1Valid: bool
    witness: Optional[int] = None


def _corollary2_eval(bHat, tSeq, g: float, st: Corollary2Settings):
    """Evaluate all seven conditions and the measured growth at scale g."""
    t_list = [int(t) for t in tSeq]
    bs = [g * float(v) for v in bHat]
    svds = pair_svds(bs)
    chn = build_rz_chain(svds)
    h1 = check_h1(svds, scope="sequence")
    states = accumulate(chn)
    rate = states[-1].logMu / len(chn)

    witness = None
    close_bound = 1.0 / (2.0 * st.C1 * st.C1 * g * g)
    c1 = True
    for k in range(len(t_list) - 1):
        if k + 1 >= max(st.K0, 1) and t_list[k + 1] - t_list[k] < 4:
            c1 = False
            witness = witness or k + 1
            break
    c2 = True
    c3 = True
    for t in t_list:
        if t % 2 == 0:
            prev = bs[t - 2]
            if abs(bs[t - 1] - prev / (1.0 + prev * prev)) >= close_bound:
                c2 = False
        else:
            if t >= len(bs):
                c3 = False
                continue
            nxt = bs[t]
            if abs(bs[t - 1] - nxt / (1.0 + nxt * nxt)) >= close_bound:
                c3 = False

    c4 = c5 = c6 = c7 = True
    m_seq = tuple(t // 2 for t in t_list)
    if t_list:
        if any(m < 1 for m in m_seq):
            raise ValueError("dip position too close to the head")
        if max(m_seq) > len(chn):
            raise ValueError("dip position past the chain horizon")
        if c1:
            pairs = _violation_pairs(m_seq, st.K0)
            n_seq, l_seq, j_seq = _split_indices(pairs, st.lSeq)
            P = len(pairs)
            bm = [block_svd(chn, l_seq[k], j_seq[k]) for k in range(P - 1)]
            bp = [block_svd(chn, j_seq[k], n_seq[k + 1]) for k in range(P - 1)]
            log_c2g = math.log(st.C2 * g)
            for k in range(P - 1):
                gap = n_seq[k + 1] - j_seq[k]
                if gap > st.N0:
                    c4 = False
                if j_seq[k] - l_seq[k] <= gap:
                    c5 = False
                if k < P - 2:
                    phi_m = bm[k + 1].chi + bm[k].phi
                    phi_p = bp[k + 1].chi + bp[k].phi
                    cot_m = _cot(phi_m)
                    cot_p = _cot(phi_p)
                    bound = math.exp(
                        (-4.0 * gap + 2.0 - st.alpha) * log_c2g
                    )
                    if abs(cot_m) > bound:
                        c6 = False
                    if not cot_p * cot_m < 0.0:
                        c7 = False
                if not (c4 and c5 and c6 and c7) and witness is None:
                    witness = k + 1
        else:
            c4 = c5 = c6 = c7 = False
        overall = h1.valid and c1 and c2 and c3 and c4 and c5 and c6 and c7 \
            and rate > 0.0
    else:
        m_seq = ()
        auto = auto_h2_constants(chn, h1.Lambda0, margin=st.margin)
        overall = h1.valid and auto is not None and rate > 0.0
    return (c1, c2, c3, c4, c5, c6, c7), overall, rate, h1.valid, m_seq, witness


def corollary2_certify(bHat, tSeq, g: float,
                       params: Corollary2Settings) -> Corollary2Params:
    """Certify the scaled pattern b_j = g * bHat_j with dips on tSeq.

    Off the dip positions bHat must satisfy C1 <= |bHat_j| <= C2 (pattern
    violations raise).  An empty tSeq reduces the check to the pair
    minimum plus auto-selected angle constants for the scaled sequence.
    The reported g0 is empirical: the smallest tested scale at which all
    numeric checks pass and the measured product grows.
    """
    b_hat = [float(v) for v in bHat]
    if len(b_hat) < 4 or len(b_hat) % 2 != 0:
        raise ValueError("need an even number (>= 4) of coefficients")
    t_set = {int(t) for t in tSeq}
    if any(t < 1 or t > len(b_hat) for t in t_set):
        raise ValueError("dip positions must be 1-based indices into bHat")
    for j, v in enumerate(b_hat, start=1):
        if j not in t_set and not params.C1 <= abs(v) <= params.C2:
            raise ValueError(
                f"|bHat_{j}| = {abs(v)} outside [{params.C1}, {params.C2}]"
            )
    g = float(g)
    if g <= 0:
        raise ValueError("scale g must be positive")

    conditions, overall, rate, h1_valid, m_seq, witness = _corollary2_eval(
        b_hat, tSeq, g, params
    )
    g0 = None
    grid = sorted(float(v) for v in params.gGrid)
    if grid:
        for gv in grid:
            try:
                _, ok, _, _, _, _ = _corollary2_eval(b_hat, tSeq, gv, params)
            except ValueError:
                continue
            if ok:
                g0 = gv
                break
    elif overall:
        g0 = g
    return Corollary2Params(
        g=g,
        C1=float(params.C1),
        C2=float(params.C2),
        alpha=float(params.alpha),
        tSeq=tuple(int(t) for t in tSeq),
        K0=int(params.K0),
        N0=int(params.N0),
        conditions=conditions,
        overall=overall,
        mSeq=m_seq,
        g0=g0,
        measuredRate=rate,
        h1Valid=h1_valid,
        witness=witness,
    )
