"""Critical-set analysis for rotation-sampled coefficient functions.

Coefficients b_j = g*b(x - (j-1)w), sampled along the circle rotation by
w, feed the minus-one-form pair cocycle.  When the shifted function
b(. - w) has zeros, the uniform per-pair stretch fails on a finite set of
critical points.  This module locates that set, follows each point's
2w-orbit to its first return into the critical neighborhoods, refines the
critical points through singular-value factorizations of excursion block
products, and checks the sign / period-dominance / offset-smallness
conditions under which the composite of two consecutive excursion blocks
stays uniformly expanding.

All angles come from actual matrix block products (build_rz_chain plus
block_svd); the pointwise step angle at base x is chi(pair at x - 2w) +
phi(pair at x).  Circle positions live in [0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .cocycle import accumulate, block_svd, build_rz_chain, merge, pair_svds
from .contfrac import NumericCF, convergents_via_cocycle, minus_one_cf
from .criteria import H1Certificate, check_h1
from .errors import (
    CollisionStructureError,
    DeltaTooLargeError,
    HorizonExceededError,
    RootBracketError,
    TransversalityError,
)

TWO_PI = 2.0 * math.pi

# omega whose multiples land this close to an integer within the guard
# horizon is treated as rational and rejected
RATIONAL_GUARD_TOL = 1e-9


def circle_dist(a: float, b: float) -> float:
    """Distance on R/Z.  Kept as a single expression; the brute-force
    reference scan mirrors the exact same operations for bit equality."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def circle_diff(a: float, b: float) -> float:
    """Signed offset a - b wrapped to [-1/2, 1/2)."""
    return (a - b + 0.5) % 1.0 - 0.5


def rotate(x, varpi: float, k: int = 1):
    """k-fold rotation x - k*varpi mod 1; k may be negative or zero."""
    out = np.mod(np.asarray(x, dtype=float) - k * varpi, 1.0)
    return float(out) if out.ndim == 0 else out


def chordal(u: float, v: float) -> float:
    """Chordal metric on the extended value line; +-inf is one regular point."""
    uFin = math.isfinite(u)
    vFin = math.isfinite(v)
    if not uFin and not vFin:
        return 0.0
    if not uFin:
        return 1.0 / math.hypot(1.0, v)
    if not vFin:
        return 1.0 / math.hypot(1.0, u)
    return abs(u - v) / (math.hypot(1.0, u) * math.hypot(1.0, v))


def _cot(angle: float) -> float:
    t = math.tan(angle)
    return 1.0 / t if t != 0.0 else math.inf


def _ppoly_abs_sup(pp) -> float:
    # exact sup of |piecewise polynomial| on its span: endpoints plus the
    # interior critical points (roots of the derivative, degree <= 2)
    cand = [pp.x]
    dp = pp.derivative()
    r = dp.roots(extrapolate=False)
    if np.size(r):
        r = np.real(np.asarray(r, dtype=complex))
        cand.append(r[(r >= pp.x[0]) & (r <= pp.x[-1])])
    xs = np.concatenate(cand)
    return float(np.max(np.abs(pp(xs))))


@dataclass(frozen=True)
class PeriodicFn:
    """1-periodic C^1 coefficient function.

    Trig form: constant + sum_k cosCoeffs[k-1] cos(2 pi k x)
                        + sum_k sinCoeffs[k-1] sin(2 pi k x).
    Sample form (from_samples): uniform samples at k/n joined by a periodic
    cubic spline.  bound() and derivBound() are certified sups: coefficient
    sums for the trig form, exact per-segment cubic extrema for splines.
    """

    constant: float = 0.0
    cosCoeffs: Tuple[float, ...] = ()
    sinCoeffs: Tuple[float, ...] = ()
    samples: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "cosCoeffs",
                           tuple(float(c) for c in self.cosCoeffs))
        object.__setattr__(self, "sinCoeffs",
                           tuple(float(c) for c in self.sinCoeffs))
        if self.samples is not None:
            vals = tuple(float(v) for v in self.samples)
            if len(vals) < 8:
                raise ValueError("sample form needs at least 8 samples")
            if self.constant or self.cosCoeffs or self.sinCoeffs:
                raise ValueError("give either trig coefficients or samples")
            object.__setattr__(self, "samples", vals)
            xs = np.arange(len(vals) + 1, dtype=float) / len(vals)
            ys = np.append(np.asarray(vals), vals[0])
            sp = CubicSpline(xs, ys, bc_type="periodic")
            object.__setattr__(self, "_spline", sp)
            object.__setattr__(self, "_dspline", sp.derivative())
        else:
            object.__setattr__(self, "_spline", None)
            object.__setattr__(self, "_dspline", None)
        if abs(float(self.value(0.0)) - float(self.value(1.0))) > 1e-12:
            raise ValueError("function is not 1-periodic")

    @classmethod
    def from_samples(cls, values) -> "PeriodicFn":
        return cls(samples=tuple(float(v) for v in values))

    def value(self, x):
        xs = np.mod(np.asarray(x, dtype=float), 1.0)
        if self._spline is not None:
            out = self._spline(xs)
        else:
            out = np.full_like(xs, self.constant, dtype=float)
            for k, c in enumerate(self.cosCoeffs, start=1):
                if c:
                    out = out + c * np.cos((TWO_PI * k) * xs)
            for k, c in enumerate(self.sinCoeffs, start=1):
                if c:
                    out = out + c * np.sin((TWO_PI * k) * xs)
        return float(out) if out.ndim == 0 else out

    def deriv(self, x):
        xs = np.mod(np.asarray(x, dtype=float), 1.0)
        if self._dspline is not None:
            out = self._dspline(xs)
        else:
            out = np.zeros_like(xs, dtype=float)
            for k, c in enumerate(self.cosCoeffs, start=1):
                if c:
                    out = out - c * (TWO_PI * k) * np.sin((TWO_PI * k) * xs)
            for k, c in enumerate(self.sinCoeffs, start=1):
                if c:
                    out = out + c * (TWO_PI * k) * np.cos((TWO_PI * k) * xs)
        return float(out) if out.ndim == 0 else out

    def bound(self) -> float:
        if self._spline is None:
            return (abs(self.constant)
                    + sum(abs(c) for c in self.cosCoeffs)
                    + sum(abs(c) for c in self.sinCoeffs))
        return _ppoly_abs_sup(self._spline)

    def derivBound(self) -> float:
        if self._spline is None:
            tot = 0.0
            for k, c in enumerate(self.cosCoeffs, start=1):
                tot += k * abs(c)
            for k, c in enumerate(self.sinCoeffs, start=1):
                tot += k * abs(c)
            return TWO_PI * tot
        return _ppoly_abs_sup(self._dspline)


@dataclass(frozen=True)
class FunctionalGenerator:
    """Coefficient generator b_j = g * b(x - (j-1) omega) on the circle.

    omega must look irrational out to guardHorizon: construction rejects
    any omega with dist(k*omega, Z) < 1e-9 for some k <= guardHorizon,
    since a near-period collapses the orbits the collision analysis walks.
    """

    b: PeriodicFn
    omega: float
    g: float = 1.0
    guardHorizon: int = 65536

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "g", float(self.g))
        if not 0.0 < self.omega < 1.0:
            raise ValueError("omega must lie strictly between 0 and 1")
        if self.g < 1.0:
            raise ValueError("coupling g must be at least 1")
        ks = np.arange(1, int(self.guardHorizon) + 1, dtype=float)
        frac = np.mod(ks * self.omega, 1.0)
        closest = float(np.minimum(frac, 1.0 - frac).min())
        if closest < RATIONAL_GUARD_TOL:
            raise ValueError(
                "omega is within 1e-9 of a rational with denominator "
                f"<= {self.guardHorizon}")


def sample_chain(gen: FunctionalGenerator, x: float, n: int) -> NumericCF:
    """Minus-one-form CF with b_j = g*b(x - (j-1)*omega), j = 1..n."""
    if n < 1:
        raise ValueError("need at least one coefficient")
    ys = np.mod(float(x) - gen.omega * np.arange(n, dtype=float), 1.0)
    bs = gen.g * np.asarray(gen.b.value(ys), dtype=float)
    return minus_one_cf(0.0, bs.tolist())


def _pair_chain(gen: FunctionalGenerator, x: float, nSteps: int) -> list:
    # nSteps interior chain steps need nSteps + 1 pair factors; chain step
    # n is then based at x - 2(n-1) omega
    cf = sample_chain(gen, x, 2 * (nSteps + 1))
    return build_rz_chain(pair_svds(cf.b))


def step_angle(gen: FunctionalGenerator, x: float) -> Tuple[float, float]:
    """(lam, Phi) of the single chain step based at x: lam is the pair
    stretch at x, Phi = chi(pair at x - 2 omega) + phi(pair at x)."""
    chain = _pair_chain(gen, x, 1)
    return chain[0].lam, chain[0].Phi


def certified_sup(b: PeriodicFn, gridSize: int = 2 ** 14) -> float:
    """Upper bound for sup|b|: dense-grid max plus the Lipschitz tail."""
    xs = np.arange(int(gridSize), dtype=float) / int(gridSize)
    m = float(np.max(np.abs(np.asarray(b.value(xs), dtype=float))))
    return m + b.derivBound() / (2.0 * int(gridSize))


@dataclass(frozen=True)
class CriticalSet:
    """Zeros x_p of the shifted coefficient b(. - omega), sorted in [0, 1).

    derivs[p] is b'(x_p - omega), the slope of the vanishing coefficient at
    its underlying zero; delta is the neighborhood radius attached at
    construction time (analysis stages default to it).
    """

    points: Tuple[float, ...]
    derivs: Tuple[float, ...]
    delta: float

    def __post_init__(self):
        pts = [float(p) % 1.0 for p in self.points]
        drv = [float(d) for d in self.derivs]
        if len(pts) != len(drv):
            raise ValueError("points and derivs must have equal length")
        if any(d == 0.0 for d in drv):
            raise ValueError("critical-point derivative vanishes")
        order = sorted(range(len(pts)), key=lambda i: pts[i])
        object.__setattr__(self, "points", tuple(pts[i] for i in order))
        object.__setattr__(self, "derivs", tuple(drv[i] for i in order))
        object.__setattr__(self, "delta", float(self.delta))
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")


def _default_delta(points, omega: float, cap: float, walk: int = 512) -> float:
    # quarter of the smallest gap among the points and their pre-collision
    # 2w-images; one refinement pass recomputes the images at the shrunk
    # radius
    if len(points) < 2:
        return cap

    def min_gap(vals):
        vals = sorted(vals)
        gaps = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
        gaps.append(vals[0] + 1.0 - vals[-1])
        return min(gaps)

    delta = min(cap, 0.25 * min_gap(points))
    for _ in range(2):
        gathered = list(points)
        step = 2.0 * omega
        for p in points:
            for k in range(1, walk + 1):
                y = (p - k * step) % 1.0
                if min(circle_dist(y, q) for q in points) <= delta:
                    break
                gathered.append(y)
        delta = min(cap, 0.25 * min_gap(gathered))
    return delta


def find_zero_set(gen: FunctionalGenerator, gridSize: int = 4096,
                  delta: Optional[float] = None, deltaCap: float = 0.1,
                  derivTol: float = 1e-6) -> CriticalSet:
    """Locate the zeros of b(. - omega) and certify their transversality.

    Sign changes on the grid are polished by bisection to width 1e-12 plus
    one Newton step.  Raises TransversalityError when a zero has |b'| below
    derivTol, when two zeros sit closer than four grid cells, when the
    derivative signs fail to alternate (a missed zero), or when a grid
    value is too small to exclude a tangential zero away from any sign
    change.  An everywhere-nonvanishing b gives an empty set.
    """
    n = int(gridSize)
    if n < 256:
        raise ValueError("zero-set grid needs at least 256 points")
    xs = np.arange(n, dtype=float) / n
    F = np.asarray(gen.b.value(np.mod(xs - gen.omega, 1.0)), dtype=float)
    dBound = gen.b.derivBound()

    def fval(x: float) -> float:
        return float(gen.b.value((x - gen.omega) % 1.0))

    def fder(x: float) -> float:
        return float(gen.b.deriv((x - gen.omega) % 1.0))

    roots: List[float] = []
    usedCells = set()
    for i in range(n):
        f0 = F[i]
        f1 = F[(i + 1) % n]
        if f0 == 0.0:
            roots.append(float(xs[i]))
            usedCells.update({(i - 1) % n, i})
            continue
        if f0 * f1 < 0.0:
            a, bnd = float(xs[i]), float(xs[i]) + 1.0 / n
            fa = f0
            while bnd - a > 1e-12:
                mid = 0.5 * (a + bnd)
                fm = fval(mid)
                if fm == 0.0:
                    a = bnd = mid
                    break
                if fa * fm < 0.0:
                    bnd = mid
                else:
                    a, fa = mid, fm
            r = 0.5 * (a + bnd)
            d = fder(r)
            if d != 0.0:
                r -= fval(r) / d
            roots.append(r % 1.0)
            usedCells.add(i)

    # a grid value this small cannot certify a zero-free cell; with no sign
    # change nearby it marks a tangential (non-transversal) zero
    smallTol = dBound / n
    for i in range(n):
        if abs(F[i]) > smallTol:
            continue
        nearBracket = any(((i + off) % n) in usedCells for off in (-2, -1, 0, 1, 2))
        if not nearBracket:
            raise TransversalityError(
                "grid value too small to exclude a tangential zero",
                point=float(xs[i]))

    if not roots:
        return CriticalSet(points=(), derivs=(), delta=deltaCap if delta is None
                           else float(delta))

    roots.sort()
    for i, r in enumerate(roots):
        nxt = roots[(i + 1) % len(roots)]
        if len(roots) > 1 and circle_dist(r, nxt) < 4.0 / n:
            raise TransversalityError(
                f"zeros {r:.9f} and {nxt:.9f} closer than four grid cells",
                point=r)
    derivs = [fder(r) for r in roots]
    for r, d in zip(roots, derivs):
        if abs(d) < derivTol:
            raise TransversalityError(
                f"derivative {d:.3e} below tolerance at zero", point=r)
    if len(roots) > 1:
        for i in range(len(roots)):
            if derivs[i] * derivs[(i + 1) % len(roots)] > 0.0:
                raise TransversalityError(
                    "derivative signs do not alternate; a zero was missed",
                    point=roots[i])

    if delta is None:
        delta = _default_delta(tuple(roots), gen.omega, deltaCap)
    return CriticalSet(points=tuple(roots), derivs=tuple(derivs),
                       delta=float(delta))


@dataclass(frozen=True)
class CollisionGraph:
    """First-return structure of the 2-omega orbits of the critical points.

    Tdelta[p] is the smallest k >= 1 with sigma_{2w}^k(x_p) within delta of
    some critical point, Rdelta[p] that point's index and hitDist[p] the
    landing distance.  classes lists the cycles of the successor map in
    cycle order starting from each cycle's smallest index; periods are the
    cycle lengths; primary[p] marks self-returns Rdelta[p] = p.
    """

    source: CriticalSet
    omega: float
    delta: float
    Tdelta: Tuple[int, ...]
    Rdelta: Tuple[int, ...]
    hitDist: Tuple[float, ...]
    classes: Tuple[Tuple[int, ...], ...]
    periods: Tuple[int, ...]
    primary: Tuple[bool, ...]


def collision_graph(cs: CriticalSet, omega: float,
                    delta: Optional[float] = None,
                    horizon: int = 100000) -> CollisionGraph:
    """Walk each critical point's 2-omega orbit to its first return.

    Raises DeltaTooLargeError when neighborhoods overlap or an orbit step
    reaches two neighborhoods at once, HorizonExceededError (with the
    closest approach seen) when an orbit never returns, and
    CollisionStructureError when the successor map is not a disjoint union
    of cycles.
    """
    delta = cs.delta if delta is None else float(delta)
    pts = cs.points
    if not pts:
        raise CollisionStructureError("no critical points to connect")
    m = len(pts)
    for i in range(m):
        for j in range(i + 1, m):
            if circle_dist(pts[i], pts[j]) <= 2.0 * delta:
                raise DeltaTooLargeError(
                    f"delta-neighborhoods of points {i} and {j} overlap")

    step = 2.0 * omega
    T: List[int] = []
    R: List[int] = []
    D: List[float] = []
    for p, x in enumerate(pts):
        hit = None
        best = math.inf
        for k in range(1, int(horizon) + 1):
            y = (x - k * step) % 1.0
            dists = [circle_dist(y, q) for q in pts]
            inside = [j for j, d in enumerate(dists) if d <= delta]
            if len(inside) > 1:
                raise DeltaTooLargeError(
                    f"orbit of point {p} reaches two neighborhoods at step {k}")
            best = min(best, min(dists))
            if inside:
                hit = (k, inside[0], dists[inside[0]])
                break
        if hit is None:
            raise HorizonExceededError(
                f"orbit of point {p} found no collision within {horizon} steps",
                closest_approach=best)
        T.append(hit[0])
        R.append(hit[1])
        D.append(hit[2])

    for p in range(m):
        cur = R[p]
        steps = 1
        while steps <= m and cur != p:
            cur = R[cur]
            steps += 1
        if cur != p:
            raise CollisionStructureError(
                "successor map is not a disjoint union of cycles: "
                f"point {p} never returns to itself")

    classes: List[Tuple[int, ...]] = []
    used = set()
    for p in range(m):
        if p in used:
            continue
        cyc = [p]
        cur = R[p]
        while cur != p:
            cyc.append(cur)
            cur = R[cur]
        used.update(cyc)
        classes.append(tuple(cyc))
    periods = tuple(len(c) for c in classes)
    primary = tuple(R[p] == p for p in range(m))
    return CollisionGraph(source=cs, omega=float(omega), delta=delta,
                          Tdelta=tuple(T), Rdelta=tuple(R), hitDist=tuple(D),
                          classes=tuple(classes), periods=periods,
                          primary=primary)


def _cot_block(gen: FunctionalGenerator, x: float, T: int, Tnext: int) -> float:
    # excursion block D spans chain steps based at sigma^1..sigma^T of x
    # (slice [1, T+1)); the composite angle adds the next block's right
    # angle to this block's left angle, so its cot is gauge-invariant under
    # the pi-jumps of the individual factorizations
    chain = _pair_chain(gen, x, T + Tnext + 1)
    cur = block_svd(chain, 1, T + 1)
    nxt = block_svd(chain, T + 1, T + 1 + Tnext)
    return _cot(nxt.chi + cur.phi)


def _two_block(gen: FunctionalGenerator, x: float,
               T1: int, T2: int, T3: int) -> Tuple[float, float]:
    # composite of two consecutive excursion blocks: P = R(phi2) Z(lam2)
    # R(phi1) Z(lam1) = R(phi2 + psi) Z(mu) R(chi) via the sandwich merge
    chain = _pair_chain(gen, x, T1 + T2 + T3 + 1)
    b1 = block_svd(chain, 1, T1 + 1)
    b2 = block_svd(chain, T1 + 1, T1 + 1 + T2)
    b3 = block_svd(chain, T1 + 1 + T2, T1 + 1 + T2 + T3)
    phi1 = b2.chi + b1.phi
    phi2 = b3.chi + b2.phi
    res = merge(b1.lam, b2.lam, phi1)
    return res.mu, phi2 + res.psi


def _refine_one(gen: FunctionalGenerator, x0: float, delta: float,
                T: int, Tnext: int, sweep: int = 32) -> float:
    # unique zero of cot Phi in the delta-window; candidate sign changes are
    # classified root vs pole by the magnitude at the bisection limit
    ts = x0 + delta * np.linspace(-1.0, 1.0, sweep + 1)
    Fs = [_cot_block(gen, float(t) % 1.0, T, Tnext) for t in ts]
    rootsFound: List[float] = []
    for i in range(sweep):
        fa, fb = Fs[i], Fs[i + 1]
        if fa == 0.0:
            rootsFound.append(float(ts[i]))
            continue
        if not (fa * fb < 0.0):
            continue
        a, b = float(ts[i]), float(ts[i + 1])
        va, vb = fa, fb
        while b - a > 1e-12:
            mid = 0.5 * (a + b)
            vm = _cot_block(gen, mid % 1.0, T, Tnext)
            if vm == 0.0:
                a = b = mid
                va = vb = 0.0
                break
            if va * vm < 0.0:
                b, vb = mid, vm
            else:
                a, va = mid, vm
        xm = 0.5 * (a + b)
        vm = _cot_block(gen, xm % 1.0, T, Tnext)
        if abs(vm) < 1.0:
            # root; one secant polish off the final bracket
            if vb != va:
                xs = (a * vb - b * va) / (vb - va)
                if a <= xs <= b:
                    xm = xs
            rootsFound.append(xm)
        # else: a pole of cot slipped between samples; discard
    if len(rootsFound) != 1:
        raise RootBracketError(
            f"expected one zero of cot Phi in the window around {x0:.6f}, "
            f"found {len(rootsFound)}")
    return rootsFound[0] % 1.0


def _slope_bounds(gen: FunctionalGenerator, xstar: float, delta: float,
                  T: int, Tnext: int, g: float) -> Tuple[float, float]:
    # empirical envelope of |cot Phi| / (g |x - x*|) on both sides
    ratios = []
    for f in (0.15, 0.3, 0.5, 0.75):
        for s in (-1.0, 1.0):
            e = s * f * delta
            c = abs(_cot_block(gen, (xstar + e) % 1.0, T, Tnext))
            ratios.append(c / (g * abs(e)))
    return min(ratios), max(ratios)


@dataclass(frozen=True)
class ClassAnalysis:
    """Refined excursion data for every collision class.

    Per class i in cycle order: refined[i][k] solves cot Phi_{i,k} = 0 in
    the delta-window of class point k, where Phi_{i,k} is the left angle of
    that point's excursion block plus the right angle of the next one.
    offsets[i][k] is the signed circle gap sigma_{2w}^{T_k}(refined[i][k]) -
    refined[i][k+1]; slopes[i][k] the empirical (rMin, rMax) envelope of
    |cot Phi_{i,k}| / (g |x - x*|).  landingDeviation is the worst distance
    from sigma^{T}(x*) to the next class point, also measured with the
    coupling doubled (the graph is g-independent) to witness the expected
    quadratic shrink.  h4 and lemma7 hold verdict tuples once checked.
    """

    graph: CollisionGraph
    g: float
    delta: float
    refined: Tuple[Tuple[float, ...], ...]
    offsets: Tuple[Tuple[float, ...], ...]
    slopes: Tuple[Tuple[Tuple[float, float], ...], ...]
    landingDeviation: float
    landingDeviationDoubled: float
    h4: Optional[tuple] = None
    lemma7: Optional[tuple] = None

    def class_points(self, i: int) -> Tuple[float, ...]:
        return tuple(self.graph.source.points[p] for p in self.graph.classes[i])

    def class_derivs(self, i: int) -> Tuple[float, ...]:
        return tuple(self.graph.source.derivs[p] for p in self.graph.classes[i])

    def class_times(self, i: int) -> Tuple[int, ...]:
        return tuple(self.graph.Tdelta[p] for p in self.graph.classes[i])


def _refine_pass(gen: FunctionalGenerator, graph: CollisionGraph,
                 delta: float):
    refined = []
    offsets = []
    slopes = []
    dev = 0.0
    pts = graph.source.points
    for cls in graph.classes:
        S = len(cls)
        xs = []
        sl = []
        for k, p in enumerate(cls):
            T = graph.Tdelta[p]
            Tn = graph.Tdelta[cls[(k + 1) % S]]
            xstar = _refine_one(gen, pts[p], delta, T, Tn)
            xs.append(xstar)
            sl.append(_slope_bounds(gen, xstar, delta, T, Tn, gen.g))
        offs = []
        for k, p in enumerate(cls):
            T = graph.Tdelta[p]
            landed = (xs[k] - T * (2.0 * gen.omega)) % 1.0
            offs.append(circle_diff(landed, xs[(k + 1) % S]))
            dev = max(dev, circle_dist(landed, pts[cls[(k + 1) % S]]))
        refined.append(tuple(xs))
        offsets.append(tuple(offs))
        slopes.append(tuple(sl))
    return tuple(refined), tuple(offsets), tuple(slopes), dev


def refine_critical_points(gen: FunctionalGenerator, graph: CollisionGraph,
                           delta: Optional[float] = None) -> ClassAnalysis:
    """Refine every class point to the unique zero of its excursion angle.

    Raises RootBracketError when a window shows no (or several) zeros of
    cot Phi.  The landing deviation is re-measured at doubled coupling so
    callers can confirm the quadratic-in-1/g localization.
    """
    delta = graph.delta if delta is None else float(delta)
    refined, offsets, slopes, dev = _refine_pass(gen, graph, delta)
    genDouble = replace(gen, g=2.0 * gen.g)
    _, _, _, dev2 = _refine_pass(genDouble, graph, delta)
    return ClassAnalysis(graph=graph, g=gen.g, delta=delta, refined=refined,
                         offsets=offsets, slopes=slopes, landingDeviation=dev,
                         landingDeviationDoubled=dev2)


@dataclass(frozen=True)
class PairCheck:
    """One period-dominance / offset-smallness check for a class pair.

    indices are the 1-based cycle positions (k, k+1); timeMargin is
    T_k - 2 T_{k+1} and offsetMargin the bound minus |Delta_k|.
    """

    indices: Tuple[int, int]
    timeOk: bool
    timeMargin: float
    offsetOk: bool
    offsetBound: float
    offsetMargin: float


@dataclass(frozen=True)
class H4Verdict:
    """Alternation plus branch verdicts for one collision class."""

    classIndex: int
    sEven: bool
    cond1: bool
    branch21: Tuple[PairCheck, ...]
    branch22: Tuple[PairCheck, ...]
    branch: Optional[str]
    ok: bool


def h4_check(analysis: ClassAnalysis,
             gen: FunctionalGenerator) -> Tuple[H4Verdict, ...]:
    """Check each class for even period, alternating slopes, and one of the
    two interleaved period-dominance branches.

    Branch 2.1 pairs positions (1,2), (3,4), ...; branch 2.2 pairs (2,3),
    (4,5), ..., (S,1).  In each pair (k, k+1) the first excursion must last
    at least twice the second and the landing offset |Delta_k| must stay
    below (rMax_k rMax_{k+1})^(-1/2) / (g (C2 g)^(2 T_{k+1} - 1)) with
    C2 = certified sup|b|.  Every margin is recorded.
    """
    C2 = certified_sup(gen.b)
    g = analysis.g
    out = []
    for i, cls in enumerate(analysis.graph.classes):
        S = len(cls)
        T = analysis.class_times(i)
        drv = analysis.class_derivs(i)
        offs = analysis.offsets[i]
        slopes = analysis.slopes[i]
        sEven = S % 2 == 0
        cond1 = all(drv[k] * drv[(k + 1) % S] < 0.0 for k in range(S))

        def pair_check(j: int) -> PairCheck:
            k2 = (j + 1) % S
            tm = float(T[j] - 2 * T[k2])
            bound = (1.0 / math.sqrt(slopes[j][1] * slopes[k2][1])
                     / (g * (C2 * g) ** (2 * T[k2] - 1)))
            om = bound - abs(offs[j])
            return PairCheck(indices=(j + 1, k2 + 1), timeOk=tm >= 0.0,
                             timeMargin=tm, offsetOk=om >= 0.0,
                             offsetBound=bound, offsetMargin=om)

        if sEven:
            b21 = tuple(pair_check(2 * k) for k in range(S // 2))
            b22 = tuple(pair_check(2 * k + 1) for k in range(S // 2))
        else:
            b21 = ()
            b22 = ()
        ok21 = sEven and cond1 and all(p.timeOk and p.offsetOk for p in b21)
        ok22 = sEven and cond1 and all(p.timeOk and p.offsetOk for p in b22)
        branch = "2.1" if ok21 else ("2.2" if ok22 else None)
        out.append(H4Verdict(classIndex=i, sEven=sEven, cond1=cond1,
                             branch21=b21, branch22=b22, branch=branch,
                             ok=branch is not None))
    return tuple(out)


@dataclass(frozen=True)
class Lemma7Verdict:
    """Two-block composite floor check for one ordered class pair (k, k+1).

    cotFloor is the guaranteed |cot| floor of the composite angle on the
    overlap window; when the strengthened period condition T_k >= 2 T_{k+1}
    holds, measuredC2 is the sampled minimum of lam * |cot| / g of the
    two-block product, which must stay positive.
    """

    pair: Tuple[int, int]
    condTime: bool
    condSign: bool
    condOffset: bool
    offsetBound: float
    offsetMargin: float
    cotFloor: float
    strengthened: bool
    measuredC2: Optional[float]
    ok: bool


def lemma7_check(analysis: ClassAnalysis, gen: FunctionalGenerator,
                 pair: Tuple[int, int]) -> Lemma7Verdict:
    """Check one ordered class pair (classIndex, 1-based position k).

    Items: T_k > T_{k+1} strictly; opposite slope signs at the two
    underlying zeros; |Delta_k| below the same offset bound as the
    branch checks.  With T_k >= 2 T_{k+1} the two-block product is sampled
    on the overlap window and its stretch-weighted cot floor reported.
    """
    i, kPos = pair
    cls = analysis.graph.classes[i]
    S = len(cls)
    j = kPos - 1
    if not 0 <= j < S:
        raise ValueError("pair position outside the class")
    k2 = (j + 1) % S
    k3 = (j + 2) % S
    T = analysis.class_times(i)
    drv = analysis.class_derivs(i)
    offs = analysis.offsets[i]
    slopes = analysis.slopes[i]
    C2 = certified_sup(gen.b)
    g = analysis.g

    condTime = T[j] > T[k2]
    condSign = drv[j] * drv[k2] < 0.0
    bound = (1.0 / math.sqrt(slopes[j][1] * slopes[k2][1])
             / (g * (C2 * g) ** (2 * T[k2] - 1)))
    margin = bound - abs(offs[j])
    condOffset = margin >= 0.0
    cotFloor = (math.sqrt(slopes[k2][1] / slopes[j][1])
                / (C2 * g) ** (2 * T[k2] - 1))
    strengthened = T[j] >= 2 * T[k2]

    measured = None
    if condTime and condSign and condOffset and strengthened:
        vals = []
        xstar = analysis.refined[i][j]
        target = analysis.graph.source.points[cls[k2]]
        for f in np.linspace(-0.5, 0.5, 9):
            x = (xstar + f * analysis.delta) % 1.0
            landed = (x - T[j] * (2.0 * gen.omega)) % 1.0
            if circle_dist(landed, target) > analysis.delta:
                continue
            lam2, phi2 = _two_block(gen, x, T[j], T[k2], T[k3])
            vals.append(lam2 * abs(_cot(phi2)) / g)
        measured = min(vals) if vals else None
    ok = (condTime and condSign and condOffset
          and (measured is None or measured > 0.0))
    return Lemma7Verdict(pair=(i, kPos), condTime=condTime, condSign=condSign,
                         condOffset=condOffset, offsetBound=bound,
                         offsetMargin=margin, cotFloor=cotFloor,
                         strengthened=strengthened, measuredC2=measured,
                         ok=ok)


@dataclass(frozen=True)
class SensitivityReport:
    """Admissible detuning scale of the collision alignment.

    tauMax is the largest per-class sum of all but the last collision time,
    rMax the largest empirical slope envelope, DeltaMin the offset scale
    rMax^-2 / (g (C2 g)^(2 tauMax/3 - 1)) below which the certificate
    tolerates perturbations, and gWindow = g^(3 - 2 tauMax / 3) the
    admissible coupling window scale.
    """

    tauMax: float
    rMax: float
    DeltaMin: float
    gWindow: float


def sensitivity(analysis: ClassAnalysis,
                gen: FunctionalGenerator) -> SensitivityReport:
    """Detuning tolerances implied by the refined class data."""
    C2 = certified_sup(gen.b)
    g = analysis.g
    tauMax = 0.0
    for i, cls in enumerate(analysis.graph.classes):
        T = analysis.class_times(i)
        tauMax = max(tauMax, float(sum(T[:-1])))
    rMax = max(s[1] for cl in analysis.slopes for s in cl)
    DeltaMin = rMax ** -2 / (g * (C2 * g) ** (2.0 * tauMax / 3.0 - 1.0))
    gWindow = g ** (3.0 - 2.0 * tauMax / 3.0)
    return SensitivityReport(tauMax=tauMax, rMax=rMax, DeltaMin=DeltaMin,
                             gWindow=gWindow)


def cond_b_constant(gen: FunctionalGenerator, cs: CriticalSet,
                    delta: Optional[float] = None,
                    gridSize: int = 2 ** 14) -> float:
    """Certified floor constant C1 with |b(x - omega)| >= C1 * delta for all
    x outside the delta-neighborhoods of the critical points."""
    delta = cs.delta if delta is None else float(delta)
    n = int(gridSize)
    xs = np.arange(n, dtype=float) / n
    keep = np.ones(n, dtype=bool)
    for p in cs.points:
        d = np.abs(xs - p) % 1.0
        d = np.minimum(d, 1.0 - d)
        # shrink the exclusion inward one cell so kept grid points still
        # cover the whole outside region
        keep &= d > delta - 1.0 / n
    if not np.any(keep):
        raise ValueError("no grid points outside the neighborhoods")
    vals = np.abs(np.asarray(gen.b.value(np.mod(xs[keep] - gen.omega, 1.0))))
    floor = float(np.min(vals)) - gen.b.derivBound() / (2.0 * n)
    return max(floor, 0.0) / delta


@dataclass(frozen=True)
class OracleCrossCheck:
    """Direct-iteration evidence attached to a passing certificate."""

    gridSize: int
    horizon: int
    supTail: float
    growthMin: float
    growthMean: float
    tolerance: float
    ok: bool


def _oracle_cross_check(gen: FunctionalGenerator, gridSize: int = 24,
                        horizon: int = 320,
                        tolerance: float = 1e-5) -> OracleCrossCheck:
    # sup-over-grid Cauchy tail of the value iteration plus the slowest
    # per-step norm growth; both must support the certified convergence
    xs = (np.arange(gridSize, dtype=float) + 0.5) / gridSize
    tail = 0.0
    growths = []
    cut = (3 * horizon) // 4
    for x in xs:
        cf = sample_chain(gen, float(x), horizon)
        vals = convergents_via_cocycle(cf, horizon)
        tail = max(tail, chordal(vals[-1], vals[cut]))
        chain = build_rz_chain(pair_svds(cf.b))
        acc = accumulate(chain)[-1]
        growths.append(acc.logMu / acc.n)
    growthMin = min(growths)
    growthMean = sum(growths) / len(growths)
    ok = tail <= tolerance and growthMin > 0.0
    return OracleCrossCheck(gridSize=gridSize, horizon=horizon, supTail=tail,
                            growthMin=growthMin, growthMean=growthMean,
                            tolerance=tolerance, ok=ok)


@dataclass(frozen=True)
class Theorem4Certificate:
    """Outcome of the staged functional certification pipeline.

    path is "no-critical-set" (coefficient bounded away from zero, pair
    floor certified on the whole circle) or "critical-set" (excursion
    analysis with the branch conditions).  On failure, stage names the
    first stage that failed and error carries its message.  certifiedRate
    stays 0: the critical-set certificate asserts convergence, not a rate.
    """

    ok: bool
    path: str
    stage: Optional[str]
    error: Optional[str]
    criticalSet: Optional[CriticalSet]
    h1: Optional[H1Certificate]
    h1Simple: Optional[H1Certificate]
    graph: Optional[CollisionGraph]
    analysis: Optional[ClassAnalysis]
    oracle: Optional[OracleCrossCheck]
    sensitivity: Optional[SensitivityReport]
    certifiedRate: float = 0.0


def _h1_escalated(gen: FunctionalGenerator, scope: str, restrictTo,
                  nStart: int, nCap: int) -> H1Certificate:
    # the scaled-circle Lipschitz margin carries a g^2 factor, so the grid
    # escalates until the margin stops swamping the true minimum
    n = nStart
    while True:
        cert = check_h1(gen, scope, gridSize=n, restrictTo=restrictTo)
        if cert.valid or n >= nCap:
            return cert
        n *= 4


def theorem4_certify(gen: FunctionalGenerator, delta: Optional[float] = None,
                     horizon: int = 100000,
                     gridSize: int = 4096) -> Theorem4Certificate:
    """Run the full functional pipeline and report the first failing stage.

    Stages: find_zero_set, h1 (pair floor on the critical windows, or the
    whole circle when the zero set is empty), collision_graph, refine, h4,
    oracle.  Structural errors raised by a stage are caught and reported as
    that stage's failure; every field computed before the failure is kept
    on the certificate.
    """

    def fail(stage, error, **k):
        return Theorem4Certificate(
            ok=False, path=k.pop("path", "critical-set"), stage=stage,
            error=error, criticalSet=k.pop("criticalSet", None),
            h1=k.pop("h1", None), h1Simple=k.pop("h1Simple", None),
            graph=k.pop("graph", None), analysis=k.pop("analysis", None),
            oracle=k.pop("oracle", None), sensitivity=k.pop("sensitivity", None))

    try:
        cs = find_zero_set(gen, gridSize=gridSize, delta=delta)
    except TransversalityError as e:
        return fail("find_zero_set", str(e))

    if not cs.points:
        h1 = _h1_escalated(gen, "circleGrid", None, 2 ** 14, 2 ** 20)
        if not h1.valid:
            return fail("h1", "pair floor not certified on the circle",
                        path="no-critical-set", criticalSet=cs, h1=h1)
        oracle = _oracle_cross_check(gen)
        return Theorem4Certificate(
            ok=oracle.ok, path="no-critical-set",
            stage=None if oracle.ok else "oracle",
            error=None if oracle.ok else "direct iteration disagrees",
            criticalSet=cs, h1=h1, h1Simple=None, graph=None, analysis=None,
            oracle=oracle, sensitivity=None)

    restrict = (cs.points, cs.delta)
    h1 = _h1_escalated(gen, "scaledCircle", restrict, 2 ** 14, 2 ** 24)
    h1Simple = check_h1(gen, "differenceOnly", gridSize=2 ** 14,
                        restrictTo=restrict)
    if not h1.valid:
        return fail("h1", "pair floor not certified on the critical windows",
                    criticalSet=cs, h1=h1, h1Simple=h1Simple)

    try:
        graph = collision_graph(cs, gen.omega, cs.delta, horizon=horizon)
    except (DeltaTooLargeError, HorizonExceededError,
            CollisionStructureError) as e:
        return fail("collision_graph", str(e), criticalSet=cs, h1=h1,
                    h1Simple=h1Simple)

    try:
        analysis = refine_critical_points(gen, graph)
    except RootBracketError as e:
        return fail("refine", str(e), criticalSet=cs, h1=h1,
                    h1Simple=h1Simple, graph=graph)

    verdicts = h4_check(analysis, gen)
    lemma7 = tuple(
        tuple(lemma7_check(analysis, gen, (i, k + 1)) for k in range(len(cls)))
        for i, cls in enumerate(graph.classes))
    analysis = replace(analysis, h4=verdicts, lemma7=lemma7)
    if not all(v.ok for v in verdicts):
        badIdx = next(v.classIndex for v in verdicts if not v.ok)
        return fail("h4", f"class {badIdx} fails the branch conditions",
                    criticalSet=cs, h1=h1, h1Simple=h1Simple, graph=graph,
                    analysis=analysis)

    sens = sensitivity(analysis, gen)
    oracle = _oracle_cross_check(gen)
    return Theorem4Certificate(
        ok=oracle.ok, path="critical-set",
        stage=None if oracle.ok else "oracle",
        error=None if oracle.ok else "direct iteration disagrees",
        criticalSet=cs, h1=h1, h1Simple=h1Simple, graph=graph,
        analysis=analysis, oracle=oracle, sensitivity=sens)
