"""Decomposition calculus for transfer-matrix cocycles.

Every 2x2 step of a minus-one-form chain factors as rotation * stretch *
rotation.  This module provides that factorization for single steps and for
odd/even pairs, rewrites a pair chain as rotation-stretch steps, merges
Z R Z sandwiches back into a single factorization, accumulates the running
top singular value of a chain in the log domain, and regroups a chain along
a kept-index sequence.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .contfrac import ContractionSpec, transfer
from .linalg2 import (
    LogScaledMat2,
    RzrDecomposition,
    frob,
    mul_scaled,
    rot,
    rot_stack,
    scaled_identity,
    stretch,
    stretch_stack,
    svd_generic,
    svd_scaled,
)

_HALF_PI = 0.5 * math.pi
_RECON_TOL = 1e-10
_LINEAR_LOG_CAP = math.log(1e100)
_EXP_MAX = 709.0


def _wrap_pi(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def _angle_from_cot(c: float) -> float:
    """Angle in (-pi/2, pi/2] with the given cotangent; cot 0 maps to pi/2."""
    if c == 0.0:
        return _HALF_PI
    return math.atan(1.0 / c)


@dataclass(frozen=True)
class StepSVD1:
    """sign * R(theta) Z(mu) R(theta) form of a single minus-one step."""

    mu: float
    theta: float
    sign: int
    degenerate: bool = False

    def matrix(self) -> np.ndarray:
        return float(self.sign) * (rot(self.theta) @ stretch(self.mu)
                                   @ rot(self.theta))


def svd_single(b: float) -> StepSVD1:
    """Symmetric rotation-stretch-rotation form of [[b, -1], [1, 0]].

    mu = (sqrt(b^2+4) + |b|)/2 and tan theta = -sign(b)/mu.  theta jumps at
    b = 0; that point is reported with a degenerate flag (the 0+ limit
    convention theta = -pi/4) rather than an error.
    """
    b = float(b)
    if not math.isfinite(b):
        raise ValueError("step coefficient must be finite")
    absb = abs(b)
    mu = 0.5 * (math.hypot(b, 2.0) + absb)
    if b == 0.0:
        return StepSVD1(mu=1.0, theta=-0.25 * math.pi, sign=1, degenerate=True)
    sgn = 1 if b > 0 else -1
    theta = -sgn * math.atan(1.0 / mu)
    return StepSVD1(mu=mu, theta=theta, sign=sgn, degenerate=False)


@dataclass(frozen=True)
class StepSVD2:
    """R(phi) Z(lam) R(chi) form of a pair product A(bEven) A(bOdd)."""

    lam: float
    phi: float
    chi: float
    hSq: float
    epsOdd: int
    epsEven: int
    bOdd: float
    bEven: float

    def matrix(self) -> np.ndarray:
        return rot(self.phi) @ stretch(self.lam) @ rot(self.chi)

    def source(self) -> np.ndarray:
        return pair_transfer(self.bOdd, self.bEven)


def pair_transfer(bOdd: float, bEven: float) -> np.ndarray:
    """A(bEven) A(bOdd): the odd step acts first."""
    return transfer(bEven) @ transfer(bOdd)


def pair_h_sq(bOdd: float, bEven: float) -> float:
    d = bOdd - bEven
    return d * d + (bOdd * bEven) ** 2


def _lam_from_h_sq(h_sq):
    return 0.5 * (np.sqrt(4.0 + h_sq) + np.sqrt(h_sq))


def svd_pair(bOdd: float, bEven: float, lowHTol: float = 1e-8) -> StepSVD2:
    """Rotation-form SVD of the two-step product A(bEven) A(bOdd).

    lam comes from h^2 = (bOdd-bEven)^2 + (bOdd*bEven)^2; the angles come
    from the stabilized cotangent forms

        cot phi = -(bOdd^2+1) / (bOdd^2+1-lam^-2) * (bEven - bOdd/(1+bOdd^2))
        cot chi = -(bEven^2+1) / (bEven^2+1-lam^-2) * (bOdd - bEven/(1+bEven^2))

    with the residual overall sign fixed by reconstruction (a pi shift of
    chi).  h^2 below lowHTol triggers a warning: the pair is too close to a
    rotation for norm-growth arguments.
    """
    bOdd = float(bOdd)
    bEven = float(bEven)
    if not (math.isfinite(bOdd) and math.isfinite(bEven)):
        raise ValueError("pair coefficients must be finite")
    h_sq = pair_h_sq(bOdd, bEven)
    b_even_star = bOdd / (1.0 + bOdd * bOdd)
    b_odd_star = bEven / (1.0 + bEven * bEven)
    d_even = bEven - b_even_star
    d_odd = bOdd - b_odd_star
    eps_odd = 1 if d_even >= 0.0 else -1
    eps_even = 1 if d_odd >= 0.0 else -1
    if h_sq < lowHTol:
        warnings.warn(
            f"pair (bOdd={bOdd}, bEven={bEven}) has h^2 = {h_sq:.3e}; "
            "the pair is nearly a rotation and certificates built on norm "
            "growth will not hold",
            RuntimeWarning,
            stacklevel=2,
        )
    if h_sq == 0.0:
        # bOdd = bEven = 0: the product is exactly -I = R(pi/2) I R(pi/2)
        return StepSVD2(lam=1.0, phi=_HALF_PI, chi=_HALF_PI, hSq=0.0,
                        epsOdd=eps_odd, epsEven=eps_even,
                        bOdd=bOdd, bEven=bEven)
    lam = float(_lam_from_h_sq(h_sq))
    li2 = 1.0 / (lam * lam)
    cot_phi = -(bOdd * bOdd + 1.0) / (bOdd * bOdd + 1.0 - li2) * d_even
    cot_chi = -(bEven * bEven + 1.0) / (bEven * bEven + 1.0 - li2) * d_odd
    phi = _angle_from_cot(cot_phi)
    chi = _angle_from_cot(cot_chi)
    M = pair_transfer(bOdd, bEven)
    rec = rot(phi) @ stretch(lam) @ rot(chi)
    if frob(rec - M) > frob(rec + M):
        chi = _wrap_pi(chi + math.pi)
    return StepSVD2(lam=lam, phi=phi, chi=chi, hSq=h_sq,
                    epsOdd=eps_odd, epsEven=eps_even, bOdd=bOdd, bEven=bEven)


def svd_pair_arrays(bOdd, bEven):
    """Vectorized svd_pair core: (lam, phi, chi, hSq) arrays, same branches.

    No low-h warnings here; grid callers handle small h themselves.
    """
    bo = np.asarray(bOdd, dtype=float)
    be = np.asarray(bEven, dtype=float)
    d = bo - be
    h_sq = d * d + (bo * be) ** 2
    lam = _lam_from_h_sq(h_sq)
    li2 = 1.0 / (lam * lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        cot_phi = -(bo * bo + 1.0) / (bo * bo + 1.0 - li2) * (
            be - bo / (1.0 + bo * bo))
        cot_chi = -(be * be + 1.0) / (be * be + 1.0 - li2) * (
            bo - be / (1.0 + be * be))
        phi = np.where(cot_phi == 0.0, _HALF_PI, np.arctan(1.0 / cot_phi))
        chi = np.where(cot_chi == 0.0, _HALF_PI, np.arctan(1.0 / cot_chi))
    degen = h_sq == 0.0
    if np.any(degen):
        lam = np.where(degen, 1.0, lam)
        phi = np.where(degen, _HALF_PI, phi)
        chi = np.where(degen, _HALF_PI, chi)
    M = np.empty(np.broadcast(bo, be).shape + (2, 2))
    M[..., 0, 0] = be * bo - 1.0
    M[..., 0, 1] = -be
    M[..., 1, 0] = bo
    M[..., 1, 1] = -1.0
    rec = rot_stack(phi) @ stretch_stack(lam) @ rot_stack(chi)
    err_plus = np.sum((rec - M) ** 2, axis=(-2, -1))
    err_minus = np.sum((rec + M) ** 2, axis=(-2, -1))
    flip = err_minus < err_plus
    if np.any(flip):
        shifted = chi + math.pi
        shifted = np.mod(shifted + math.pi, 2.0 * math.pi) - math.pi
        shifted = np.where(shifted == -math.pi, math.pi, shifted)
        chi = np.where(flip, shifted, chi)
    return lam, phi, chi, h_sq


def pair_svds(bs) -> list:
    """Pair steps (b_1,b_2), (b_3,b_4), ... of a minus-one-form coefficient
    sequence; requires even length."""
    bs = [float(b) for b in bs]
    if len(bs) % 2 != 0 or not bs:
        raise ValueError("need a nonempty even-length coefficient sequence")
    return [svd_pair(bs[2 * k], bs[2 * k + 1]) for k in range(len(bs) // 2)]


@dataclass(frozen=True)
class RZStep:
    """One rotation-stretch factor B = R(Phi) Z(lam)."""

    Phi: float
    lam: float

    def matrix(self) -> np.ndarray:
        return rot(self.Phi) @ stretch(self.lam)


def build_rz_chain(pairs) -> list:
    """Interior rotation-stretch chain of a pair-step product.

    With pair k = R(phi_k) Z(lam_k) R(chi_k), the full product telescopes to
    R(phi_N) Z(lam_N) * B_{N-1} ... B_1 * R(chi_1) where
    B_n = R(chi_{n+1} + phi_n) Z(lam_n).  Returns [B_1, ..., B_{N-1}];
    the dangling boundary factors come from rz_boundary.
    """
    if len(pairs) < 2:
        raise ValueError("need at least 2 pair steps to form an RZ chain")
    return [
        RZStep(Phi=pairs[i + 1].chi + pairs[i].phi, lam=pairs[i].lam)
        for i in range(len(pairs) - 1)
    ]


def rz_boundary(pairs) -> tuple:
    """(leadPhi, leadLam, trailChi): the factors build_rz_chain leaves out."""
    if not pairs:
        raise ValueError("empty pair list")
    return pairs[-1].phi, pairs[-1].lam, pairs[0].chi


@dataclass(frozen=True)
class MergeResult:
    """R(psi) Z(mu) R(chi) form of the sandwich Z(lambda2) R(phi) Z(lambda1)."""

    mu: float
    psi: float
    chi: float
    m: float
    beta: float
    z: float
    flagged: bool = False


def est_m(lambda1: float, lambda2: float) -> float:
    """Lower bound for the merge trace surrogate m, sharp at phi = pi/2."""
    return lambda1 / lambda2 + lambda2 / lambda1


def _merge_z(la: float, lb: float, phi: float) -> float:
    """Branch parameter z with slots (la, lb); tan(angle) = eps*sqrt(1+z^2)-z.

    The la slot carries the squared prefactor; lb = inf is allowed and gives
    the exact deep-product limit (lb^-4 -> 0).
    """
    ia = la ** -4
    ib = lb ** -4
    t = math.tan(phi)
    c = 1.0 / t if t != 0.0 else math.inf
    return (la * la) / (2.0 * (1.0 - ib)) * ((1.0 - ia * ib) * c + (ib - ia) * t)


def _tan_branch(z: float, eps: float) -> float:
    if eps * z > 0.0:
        return eps / (math.sqrt(1.0 + z * z) + abs(z))
    return eps * math.sqrt(1.0 + z * z) - z


def _merge_generic(l1: float, l2: float, phi: float, z: float,
                   beta: float, flagged: bool) -> MergeResult:
    M = stretch(l2) @ rot(phi) @ stretch(l1)
    dec = svd_generic(M)
    chi = dec.chi + (math.pi if dec.sign < 0 else 0.0)
    return MergeResult(mu=dec.lam, psi=dec.phi, chi=_wrap_pi(chi),
                       m=dec.lam + 1.0 / dec.lam, beta=beta, z=z,
                       flagged=flagged)


def merge(lambda1: float, lambda2: float, phi: float) -> MergeResult:
    """Singular-value form of Z(lambda2) R(phi) Z(lambda1).

    m = (l1 l2 + 1/(l1 l2)) sqrt(cos^2 phi + beta^2 sin^2 phi) with
    beta = (l1^-2 + l2^-2)/(1 + l1^-2 l2^-2); mu = (m + sqrt(m^2-4))/2;
    tan chi and tan psi come from the z branch formula with swapped slots.
    phi = 0 and phi = +-pi/2 (exact zeros of sin/cos) dispatch to closed
    forms; a stretch within 1e-8 of 1 falls back to the generic SVD and is
    flagged, as is any reconstruction failure.
    """
    l1 = float(lambda1)
    l2 = float(lambda2)
    phi = float(phi)
    if not (math.isfinite(l1) and math.isfinite(l2) and math.isfinite(phi)):
        raise ValueError("merge arguments must be finite")
    if l1 < 1.0 or l2 < 1.0:
        raise ValueError("stretch factors must be >= 1")
    beta = (l1 ** -2 + l2 ** -2) / (1.0 + l1 ** -2 * l2 ** -2)
    s = math.sin(phi)
    c = math.cos(phi)
    if s == 0.0:
        # aligned stretches: Z(l2) R(0) Z(l1) = Z(l1 l2) (R(phi) = +-I)
        mu = l1 * l2
        sign_flip = math.cos(phi) < 0.0
        return MergeResult(mu=mu, psi=0.0,
                           chi=math.pi if sign_flip else 0.0,
                           m=mu + 1.0 / mu, beta=beta, z=math.inf,
                           flagged=False)
    if c == 0.0:
        m = est_m(l1, l2)
        mu = max(l1 / l2, l2 / l1)
        if l1 >= l2:
            psi, chi = _HALF_PI, 0.0
        else:
            psi, chi = 0.0, _HALF_PI
        if s < 0.0:
            chi = _wrap_pi(chi + math.pi)  # R(-pi/2) = -R(pi/2)
        return MergeResult(mu=mu, psi=psi, chi=chi, m=m, beta=beta,
                           z=math.inf, flagged=False)
    if min(l1, l2) < 1.0 + 1e-8:
        # (1 - lam^-4) in z loses all digits; the generic path is exact here
        return _merge_generic(l1, l2, phi, math.nan, beta, flagged=True)
    m = (l1 * l2 + 1.0 / (l1 * l2)) * math.sqrt(c * c + beta * beta * s * s)
    m = max(m, 2.0)
    mu = 0.5 * (m + math.sqrt(m * m - 4.0))
    eps = 1.0 if math.sin(2.0 * phi) > 0.0 else -1.0
    z_chi = _merge_z(l1, l2, phi)
    z_psi = _merge_z(l2, l1, phi)
    chi = math.atan(_tan_branch(z_chi, eps))
    psi = math.atan(_tan_branch(z_psi, eps))
    target = stretch(l2) @ rot(phi) @ stretch(l1)
    tol = _RECON_TOL * max(1.0, frob(target))
    rec = rot(psi) @ stretch(mu) @ rot(chi)
    if frob(rec - target) > tol:
        chi_flip = _wrap_pi(chi + math.pi)
        if frob(rec + target) <= tol:  # flipping chi negates the product
            chi = chi_flip
        else:
            return _merge_generic(l1, l2, phi, z_chi, beta, flagged=True)
    return MergeResult(mu=mu, psi=psi, chi=chi, m=m, beta=beta, z=z_chi,
                       flagged=False)


@dataclass(frozen=True)
class AccumState:
    """Running factorization M_n = R(Phi_n + psi) Z(mu) R(...) of a chain."""

    n: int
    logMu: float
    psi: float
    ok: bool

    @property
    def mu(self) -> float:
        return math.exp(self.logMu) if self.logMu < _EXP_MAX else math.inf


def accumulate(chain) -> list:
    """Running top singular value and carry angle of B_n ... B_1.

    State n holds mu_n (as a log) and psi_n with
    M_n = R(Phi_n + psi_n) Z(mu_n) R(accumulated right angle); the next step
    merges Z(lam_{n+1}) R(Phi_n + psi_n) Z(mu_n).  Once log mu passes the
    linear range the merge runs directly in the log domain (the mu^-4 terms
    are then exactly 0 in double precision).
    """
    if not chain:
        raise ValueError("empty chain")
    out = []
    log_mu = math.log(chain[0].lam)
    psi = 0.0
    out.append(AccumState(n=1, logMu=log_mu, psi=0.0, ok=True))
    for i in range(1, len(chain)):
        lam = chain[i].lam
        phi_slot = chain[i - 1].Phi + psi
        if log_mu == 0.0:
            # the product so far is a pure rotation; it folds into the right
            # rotation of the new step's factorization
            log_mu = math.log(lam)
            psi = 0.0
            ok = True
        elif lam == 1.0:
            # rotation step: R(Phi) alone shifts the carry angle
            psi = phi_slot
            ok = True
        elif log_mu <= _LINEAR_LOG_CAP:
            res = merge(math.exp(log_mu), lam, phi_slot)
            log_mu = math.log(res.mu)
            psi = res.psi
            ok = not res.flagged
        else:
            a1 = math.exp(-2.0 * log_mu)  # underflow to 0 is the exact limit
            a2 = lam ** -2
            beta = (a1 + a2) / (1.0 + a1 * a2)
            s = math.sin(phi_slot)
            c = math.cos(phi_slot)
            if s == 0.0:
                log_mu = log_mu + math.log(lam)
                psi = 0.0
            elif c == 0.0:
                log_mu = log_mu - math.log(lam)  # mu_prev/lam, mu_prev huge
                psi = _HALF_PI
            else:
                log_m = (log_mu + math.log(lam) + math.log1p(a1 * a2)
                         + 0.5 * math.log(c * c + beta * beta * s * s))
                disc = max(1.0 - 4.0 * math.exp(-2.0 * log_m), 0.0)
                log_mu = log_m + math.log(0.5 * (1.0 + math.sqrt(disc)))
                mu_repr = math.exp(log_mu) if log_mu <= _EXP_MAX else math.inf
                z_psi = _merge_z(lam, mu_repr, phi_slot)
                eps = 1.0 if math.sin(2.0 * phi_slot) > 0.0 else -1.0
                psi = math.atan(_tan_branch(z_psi, eps))
            ok = True
        out.append(AccumState(n=i + 1, logMu=log_mu, psi=psi, ok=ok))
    return out


@dataclass(frozen=True)
class BlockSVD:
    """Rotation-form SVD of a chain block with the sign folded into phi."""

    phi: float
    chi: float
    logLambda: float

    @property
    def lam(self) -> float:
        return math.exp(self.logLambda) if self.logLambda < _EXP_MAX else math.inf


def block_svd(chain, start: int, stop: int) -> BlockSVD:
    """SVD of the arrow product B_stop ... B_{start+1} (0-based slice)."""
    if not 0 <= start < stop <= len(chain):
        raise ValueError(f"empty or out-of-range block [{start}, {stop})")
    acc = scaled_identity()
    for step in chain[start:stop]:
        acc = mul_scaled(acc, step.matrix())
    r = svd_scaled(acc, det_repr=1.0)
    phi = r.phi if r.sign > 0 else _wrap_pi(r.phi + math.pi)
    return BlockSVD(phi=phi, chi=r.chi, logLambda=r.logLambda)


@dataclass(frozen=True)
class GroupedCocycle:
    """Chain regrouped along kept indices xi.

    groups[k] is the rotation-form SVD of B over (n_k, n_{k+1}]; dSteps and
    PhiXi mirror build_rz_chain at the group level: Phi^xi_k = chi_{k+1} +
    phi_k with each group's sign already folded into its phi.
    """

    xi: tuple
    groups: tuple
    dSteps: tuple
    PhiXi: tuple
    logLambdas: tuple
    sourceChain: tuple


def group(chain, xi: ContractionSpec) -> GroupedCocycle:
    """Regroup a rotation-stretch chain along kept indices."""
    if xi.xi[-1] > len(chain):
        raise ValueError(
            f"grouping index {xi.xi[-1]} exceeds chain length {len(chain)}"
        )
    blocks = []
    lo = 0
    for nk in xi.xi:
        acc = scaled_identity()
        for step in chain[lo:nk]:
            acc = mul_scaled(acc, step.matrix())
        blocks.append(svd_scaled(acc, det_repr=1.0))
        lo = nk
    groups = tuple(
        RzrDecomposition(phi=r.phi, lam=r.lam, chi=r.chi, sign=r.sign, scale=1.0)
        for r in blocks
    )
    phi_eff = [
        r.phi if r.sign > 0 else _wrap_pi(r.phi + math.pi) for r in blocks
    ]
    phi_xi = tuple(
        blocks[k + 1].chi + phi_eff[k] for k in range(len(blocks) - 1)
    )
    d_steps = tuple(
        RZStep(Phi=phi_xi[k], lam=blocks[k].lam) for k in range(len(blocks) - 1)
    )
    log_lams = tuple(r.logLambda for r in blocks)
    return GroupedCocycle(
        xi=xi.xi,
        groups=groups,
        dSteps=d_steps,
        PhiXi=phi_xi,
        logLambdas=log_lams,
        sourceChain=tuple(chain),
    )
