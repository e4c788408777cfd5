"""Convergence certificates: classical tests, stretch floors, angle
conditions, regrouping inheritance, windows, and violation-pair machinery."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from cfcocycle.cocycle import (
    RZStep,
    _angle_from_cot,
    build_rz_chain,
    block_svd,
    group,
    pair_svds,
)
from cfcocycle.contfrac import ContractionSpec, NumericCF
from cfcocycle.criteria import (
    Corollary2Settings,
    Theorem3Params,
    admissible_u_bound,
    auto_h2_constants,
    check_h1,
    check_h2,
    classical_tests,
    corollary2_certify,
    lemma4_check,
    lemma5_window,
    strictly_greater,
    theorem3_certify,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def minus_one_cf(bs, b0=1.0):
    return NumericCF(b0=b0, a=(-1.0,) * len(bs), b=tuple(bs))


class SineB:
    """b(x) = sin(2 pi x) with exact envelope constants."""

    def value(self, x):
        return np.sin(2.0 * np.pi * np.asarray(x, dtype=float))

    def deriv(self, x):
        return 2.0 * np.pi * np.cos(2.0 * np.pi * np.asarray(x, dtype=float))

    def bound(self):
        return 1.0

    def derivBound(self):
        return 2.0 * math.pi


def sine_gen(g):
    return SimpleNamespace(b=SineB(), omega=GOLDEN, g=float(g))


# ---------------------------------------------------------------------------
# strict comparison helper


def test_strictly_greater_relative_margin():
    assert strictly_greater(2.0, 1.0)
    assert not strictly_greater(1.0, 1.0)
    assert strictly_greater(1.0 + 1e-8, 1.0)
    assert not strictly_greater(1.0 + 1e-10, 1.0)
    # scale-aware: a unit gap is below margin at magnitude 2e9
    assert not strictly_greater(2e9 + 1.0, 2e9)
    assert strictly_greater(1.1, 1.0, margin=1e-3)
    assert not strictly_greater(1.1, 1.0, margin=0.2)


# ---------------------------------------------------------------------------
# classical pointwise tests


def test_classical_constant_minus_one_form():
    cf = minus_one_cf([2.5] * 30, b0=2.5)
    out = {v.test: v for v in classical_tests(cf, 30)}
    assert set(out) == {"seidelStern", "pringsheim", "worpitsky"}
    assert out["pringsheim"].holdsUpToHorizon and out["pringsheim"].witness is None
    assert out["worpitsky"].holdsUpToHorizon
    assert not out["seidelStern"].holdsUpToHorizon
    assert out["seidelStern"].witness == 1


def test_classical_seidel_stern_partial_sum():
    cf = NumericCF(b0=1.0, a=(1.0,) * 40, b=(1.0,) * 40)
    v = next(x for x in classical_tests(cf, 40) if x.test == "seidelStern")
    assert v.holdsUpToHorizon and v.witness is None
    assert v.partialSum == 40.0
    assert next(x for x in classical_tests(cf, 40)
                if x.test == "pringsheim").witness == 1


def test_classical_pringsheim_witness_below_threshold():
    cf = minus_one_cf([1.5] * 10)
    v = next(x for x in classical_tests(cf, 10) if x.test == "pringsheim")
    assert not v.holdsUpToHorizon and v.witness == 1


def test_classical_horizon_clamped_and_validated():
    cf = minus_one_cf([2.5] * 5)
    assert all(v.horizon == 5 for v in classical_tests(cf, 100))
    with pytest.raises(ValueError, match="horizon"):
        classical_tests(cf, 0)


def test_classical_monotone_consistency():
    # planted failure at j = 37 cannot flip back to PASS at larger horizons
    bs = [3.0] * 60
    bs[36] = 1.2
    cf = minus_one_cf(bs)
    seen = []
    for horizon in (10, 50, 200):
        v = next(x for x in classical_tests(cf, horizon)
                 if x.test == "pringsheim")
        seen.append((v.holdsUpToHorizon, v.witness))
        assert v.holdsUpToHorizon == (v.witness is None)
    assert seen == [(True, None), (False, 37), (False, 37)]


# ---------------------------------------------------------------------------
# pair-minimum stretch floor, sequence scope


def test_h1_sequence_constant_two():
    cert = check_h1([2.0] * 40)
    assert cert.hStarSq == 16.0
    assert abs(cert.Lambda0 - (2.0 + math.sqrt(5.0))) < 1e-15
    assert cert.valid and cert.lipschitzMargin == 0.0
    assert cert.scope == "sequence" and cert.gridSize == 20
    assert cert.triggers == (True, True)


def test_h1_sequence_accepts_cf_and_pair_svds():
    bs = [2.0, 3.0, -2.5, 4.0] * 5
    direct = check_h1(bs)
    via_cf = check_h1(minus_one_cf(bs))
    via_svds = check_h1(pair_svds(bs))
    assert direct.hStarSq == via_cf.hStarSq == via_svds.hStarSq
    assert direct.Lambda0 == via_cf.Lambda0 == via_svds.Lambda0


def test_h1_sequence_rejects_general_form():
    cf = NumericCF(b0=1.0, a=(1.0,) * 4, b=(3.0,) * 4)
    with pytest.raises(ValueError, match="minus-one"):
        check_h1(cf)
    with pytest.raises(ValueError, match="pair"):
        check_h1([2.0])


def test_h1_sequence_degenerate_pair_invalid():
    cert = check_h1([0.0, 0.0, 3.0, 3.0])
    assert cert.hStarSq == 0.0 and not cert.valid
    assert cert.Lambda0 == 1.0
    assert cert.triggers == (False, False)


def test_h1_sequence_alternating_trigger():
    # small values always followed by large: second trigger without the first
    cert = check_h1([1.0, 3.0, 0.5, 4.0, 1.5, 2.0])
    assert cert.triggers == (False, True)
    assert cert.valid


def test_h1_unknown_scope_rejected():
    with pytest.raises(ValueError, match="scope"):
        check_h1([2.0] * 4, scope="torus")


# ---------------------------------------------------------------------------
# pair-minimum stretch floor, functional scopes


def test_h1_circle_grid_sine_golden():
    # refined continuum minimum of the folded pair quantity at g = 1
    frozen = 0.017243777054846428
    cert = check_h1(sine_gen(1.0), scope="circleGrid", gridSize=2 ** 14)
    grid_min = cert.hStarSq + cert.lipschitzMargin
    assert cert.valid
    assert 0.0 <= grid_min - frozen <= 1e-6
    assert frozen - 2 * cert.lipschitzMargin <= cert.hStarSq <= frozen
    assert cert.lambdaFloorAtG is None and cert.triggers is None


def test_h1_difference_only_restricted_golden():
    # continuum minimum over the 0.05-neighbourhoods sits at a left endpoint;
    # one cell of outward padding may dip slightly below it, never above
    frozen = 0.1055529372272157
    cert = check_h1(sine_gen(100.0), scope="differenceOnly", gridSize=2 ** 16,
                    restrictTo=((GOLDEN, GOLDEN - 0.5), 0.05))
    certified = math.sqrt(cert.hStarSq)
    assert cert.valid
    assert frozen - 3e-4 <= certified <= frozen
    assert cert.lipschitzMargin < 1e-4


def test_h1_scaled_circle_restricted_golden():
    cert = check_h1(sine_gen(100.0), scope="scaledCircle", gridSize=2 ** 22,
                    restrictTo=((GOLDEN, GOLDEN - 0.5), 0.05))
    assert cert.valid
    # local oracle minimum near the second point is about 0.45599
    assert 0.40 <= cert.hStarSq <= 0.456
    assert 60.0 <= cert.lambdaFloorAtG <= 75.0


def test_h1_scaled_floor_matches_formula():
    cert = check_h1(sine_gen(7.0), scope="scaledCircle", gridSize=2 ** 16)
    gh = 49.0 * cert.hStarSq
    want = 0.5 * (math.sqrt(4.0 + gh) + math.sqrt(gh))
    assert cert.lambdaFloorAtG == want


def test_h1_restriction_object_and_validation():
    region = SimpleNamespace(points=(GOLDEN,), delta=0.05)
    a = check_h1(sine_gen(100.0), scope="differenceOnly", gridSize=2 ** 12,
                 restrictTo=region)
    b = check_h1(sine_gen(100.0), scope="differenceOnly", gridSize=2 ** 12,
                 restrictTo=((GOLDEN,), 0.05))
    assert a.hStarSq == b.hStarSq
    with pytest.raises(ValueError, match="at least one point"):
        check_h1(sine_gen(1.0), scope="circleGrid", restrictTo=((), 0.05))
    with pytest.raises(ValueError, match="grid"):
        check_h1(sine_gen(1.0), scope="circleGrid", gridSize=4)


def test_h1_restriction_never_raises_certified_value():
    full = check_h1(sine_gen(1.0), scope="circleGrid", gridSize=2 ** 13)
    part = check_h1(sine_gen(1.0), scope="circleGrid", gridSize=2 ** 13,
                    restrictTo=((0.25, 0.75), 0.2))
    assert part.hStarSq >= full.hStarSq - 1e-15


# ---------------------------------------------------------------------------
# angle condition


def const5_chain(pairs=200):
    return build_rz_chain(pair_svds([5.0] * (2 * pairs)))


def test_h2_frozen_constants():
    from cfcocycle.criteria import _chat, _clambda_floor2

    assert _chat(3.0, 1.5) == 1.3416407864998738
    assert abs(_clambda_floor2(3.0, 2.0) - 10.0 / 7.0) < 1e-15


def test_h2_constant_five_chain_passes():
    cert = check_h2(const5_chain(), 3.0, 1.5, 2.0)
    assert cert.conditionsOk == (True, True, True)
    assert cert.ok and cert.witness is None
    assert cert.measuredOk and cert.angleOk
    assert cert.ChatLambda == 1.3416407864998738
    assert cert.boundConstant == 3.0 and cert.boundRate == cert.ChatLambda


def test_h2_pointwise_witness():
    chain = const5_chain(40)
    chain[7] = RZStep(Phi=math.pi / 2, lam=chain[7].lam)
    cert = check_h2(chain, 3.0, 1.5, 2.0)
    assert cert.conditionsOk[:2] == (True, True)
    assert not cert.conditionsOk[2] and cert.witness == 8
    assert not cert.ok and cert.measuredOk is None


def test_h2_inadmissible_constants_no_crash():
    cert = check_h2(const5_chain(10), 1.0, 1.5, 2.0)
    assert cert.conditionsOk[0] is False and cert.conditionsOk[1] is False
    assert not cert.ok
    with pytest.raises(ValueError, match="empty"):
        check_h2([], 3.0, 1.5, 2.0)


def test_h2_auto_constants_found_and_refused():
    auto = auto_h2_constants(const5_chain(60), 3.0)
    assert auto is not None and auto.ok
    assert auto.Lambda0 == 3.0
    flat = [RZStep(Phi=math.pi / 2, lam=1.5)] * 30
    assert auto_h2_constants(flat, 1.2) is None
    assert auto_h2_constants(const5_chain(10), 1.0) is None


def test_pringsheim_implies_h1_and_h2():
    rng = np.random.default_rng(215)
    for _ in range(100):
        n = int(rng.integers(20, 60)) * 2
        bs = list(rng.uniform(2.05, 6.0, size=n) * rng.choice([-1.0, 1.0], size=n))
        cf = minus_one_cf(bs)
        pring = next(v for v in classical_tests(cf, n) if v.test == "pringsheim")
        assert pring.holdsUpToHorizon
        h1 = check_h1(bs)
        assert h1.valid
        assert auto_h2_constants(build_rz_chain(pair_svds(bs)), h1.Lambda0) is not None


# ---------------------------------------------------------------------------
# regrouping inheritance


def test_lemma4_singleton_grouping():
    chain = build_rz_chain(pair_svds([5.0] * 120))
    grouped = group(chain, ContractionSpec(tuple(range(1, len(chain) + 1))))
    sub = check_h2(list(grouped.dSteps), 3.0, 1.5, 2.0)
    assert sub.ok
    verdict = lemma4_check(grouped, CB=26.0, N0=1, subCert=sub)
    assert verdict.conditionsOk == (True, True, True)
    assert verdict.k0 == 12
    want = math.exp((12.0 * math.log(sub.ChatLambda) - math.log(26.0)) / 13.0)
    assert verdict.CLambda == pytest.approx(want, abs=1e-15)
    assert 1.02 < verdict.CLambda < 1.021
    assert verdict.overall and verdict.measuredOk
    assert verdict.minOffset > 0.0
    assert verdict.measuredRate > verdict.certifiedRate


def test_lemma4_pair_merge_rescues_bad_odd_steps():
    # odd steps sit exactly on the degenerate angle; pairwise merge is a
    # pure stretch of 5/3 per two steps
    win = lemma5_window(5.0, 3.0, 3.0, 1.5, phi1=math.pi / 2)
    phi2 = _angle_from_cot(0.5 * sum(win.cotPhi2Interval))
    chain = []
    for _ in range(60):
        chain.append(RZStep(Phi=math.pi / 2, lam=5.0))
        chain.append(RZStep(Phi=phi2, lam=3.0))
    direct = check_h2(chain, 3.0, 1.5, 2.0)
    assert not direct.conditionsOk[2] and direct.witness == 1
    grouped = group(chain, ContractionSpec(tuple(range(2, 121, 2))))
    lams = {round(s.lam, 12) for s in grouped.dSteps}
    assert lams == {round(5.0 / 3.0, 12)}
    sub = auto_h2_constants(list(grouped.dSteps),
                            min(s.lam for s in grouped.dSteps) * (1 - 1e-12))
    assert sub is not None
    verdict = lemma4_check(grouped, CB=5.0 + 1e-9, N0=2, subCert=sub)
    assert verdict.overall
    assert abs(verdict.measuredRate - math.log(5.0 / 3.0) / 2.0) < 1e-12


def test_lemma4_gap_violation_and_validation():
    chain = build_rz_chain(pair_svds([5.0] * 40))
    grouped = group(chain, ContractionSpec((1, 2, 5, 6)))
    sub = check_h2(list(grouped.dSteps), 1.01, 15.0, 60.0)
    verdict = lemma4_check(grouped, CB=26.0, N0=2, subCert=sub)
    assert not verdict.conditionsOk[1]
    assert verdict.witness == 3  # first gap above the cap
    assert not verdict.overall
    with pytest.raises(ValueError, match="CB"):
        lemma4_check(grouped, CB=1.0, N0=2, subCert=sub)
    with pytest.raises(ValueError, match="N0"):
        lemma4_check(grouped, CB=2.0, N0=0, subCert=sub)


def test_lemma4_norm_cap_violation():
    chain = build_rz_chain(pair_svds([5.0] * 40))
    grouped = group(chain, ContractionSpec(tuple(range(1, 20))))
    sub = check_h2(list(grouped.dSteps), 3.0, 1.5, 2.0)
    verdict = lemma4_check(grouped, CB=1.5, N0=1, subCert=sub)
    assert not verdict.conditionsOk[0] and verdict.witness == 1


# ---------------------------------------------------------------------------
# admissible two-block window


def test_window_default_phi_is_centered():
    win = lemma5_window(50.0, 4.0, 3.0, 1.5)
    assert win.u == 0.0 and win.uAdmissible and win.stretchFloorOk
    lo, hi = win.cotPhi2Interval
    assert abs(lo + 2.0) < 1e-12 and abs(hi - 2.0) < 1e-12
    assert abs(math.tan(win.psi)) > 1e12


def test_window_degenerate_second_stretch_limit():
    kappa, rho, bound = admissible_u_bound(50.0, 1.0, 2.0, 1.3)
    assert kappa == 1.0 and rho == 1.0
    assert abs(bound - 1.3 / 2.0) < 1e-12


def test_window_validation():
    with pytest.raises(ValueError, match="lambda1 > lambda2"):
        lemma5_window(4.0, 4.0, 3.0, 1.5)
    with pytest.raises(ValueError, match="Clambda < Lambda0"):
        lemma5_window(5.0, 4.0, 3.0, 3.5)
    with pytest.raises(ValueError, match="Lambda0"):
        lemma5_window(5.0, 4.0, 0.9, 0.5)


def test_window_flags_inadmissible_slot():
    _, _, ub = admissible_u_bound(50.0, 4.0, 3.0, 1.5)
    win = lemma5_window(50.0, 4.0, 3.0, 1.5,
                        phi1=_angle_from_cot(40.0 * ub / 16.0))
    assert not win.uAdmissible
    assert win.uBound == pytest.approx(ub)


def test_window_guarantee_property():
    # any follow-up angle drawn from the window sustains the certified
    # cotangent floor after composing with the carry angle
    L1, L2, L0, CL = 50.0, 4.0, 3.0, 1.5
    _, _, ub = admissible_u_bound(L1, L2, L0, CL)
    cap = ub / (L2 * L2)
    rng = np.random.default_rng(215)
    for _ in range(1000):
        phi1 = _angle_from_cot(float(rng.uniform(-cap, cap)))
        win = lemma5_window(L1, L2, L0, CL, phi1=phi1)
        assert win.uAdmissible
        phi2 = _angle_from_cot(float(rng.uniform(*win.cotPhi2Interval)))
        assert L0 * abs(1.0 / math.tan(phi2 + win.psi)) >= CL * (1.0 - 1e-9)


# ---------------------------------------------------------------------------
# isolated violation pairs


GOOD_PHI = math.atan(1.0 / 1.2)  # cot = 1.2: 3 * 1.2 clears delta*C = 3


def make_violation_chain(n1=3, npairs=6, cm=-1e-4, cp=1e-4):
    """Periodic chain of lam = 3 steps with violation pairs every 18 steps.

    Violation angles are tuned through left-rotation additivity so the
    grouped block angles hit cot = cm on recovery blocks and cot = cp on
    bridge blocks exactly.
    """
    ms = []
    n = n1
    for _ in range(npairs):
        ms += [n, n + 16]
        n += 18
    mseq = tuple(ms)
    nsteps = ms[-1] + 3
    pairs = [(ms[2 * s], ms[2 * s + 1]) for s in range(npairs)]
    nseq = [p[0] for p in pairs]
    jseq = [p[1] for p in pairs]
    lseq = tuple(a + 2 for a, _ in pairs)

    def skeleton(viol):
        return [RZStep(Phi=viol.get(i, GOOD_PHI), lam=3.0)
                for i in range(1, nsteps + 1)]

    probe = skeleton({m: math.pi / 2 for m in mseq})
    bm1 = block_svd(probe, lseq[0], jseq[0])
    bm2 = block_svd(probe, lseq[1], jseq[1])
    bp1 = block_svd(probe, jseq[0], nseq[1])
    bp2 = block_svd(probe, jseq[1], nseq[2])
    viol_minus = _angle_from_cot(cm) - bm2.chi - (bm1.phi - math.pi / 2)
    viol_plus = _angle_from_cot(cp) - bp2.chi - (bp1.phi - math.pi / 2)
    tuned = {}
    for k in range(npairs):
        tuned[jseq[k]] = viol_minus
        tuned[nseq[k]] = viol_plus
    return skeleton(tuned), mseq, lseq


def test_theorem3_synthetic_instance_passes():
    chain, mseq, lseq = make_violation_chain()
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=2, lSeq=lseq)
    cert = theorem3_certify(chain, mseq, params)
    assert cert.overall and cert.witness is None
    assert cert.baseConstantsOk and cert.lamRangeOk and cert.goodStepsOk
    assert len(cert.perK) == 4
    assert all(all(row) for row in cert.perK)
    assert cert.nSeq == (3, 21, 39, 57, 75, 93)
    assert cert.jSeq == (19, 37, 55, 73, 91, 109)
    assert cert.ChatLambda == 1.3416407864998738
    assert abs(cert.GhatLambda - 6.0 / math.sqrt(13.0)) < 1e-15
    # recovery cotangents tuned to -1e-4, bridge stretch near exp(1.94)
    assert all(-0.01 < u < 0.0 for u in cert.uSeq)
    # with a huge recovery stretch the slot bound degenerates to G/Lambda0
    assert all(abs(ub - 2.0 / 3.0) < 1e-3 for ub in cert.uBoundSeq)
    assert cert.certifiedRate == pytest.approx(math.log(1.3416407864998738) / 2)
    assert abs(cert.measuredRate - 0.5467722425782855) < 1e-12
    assert cert.measuredOk


def test_theorem3_printed_window_form_diverges_from_cot_form():
    # the bridge-angle window is satisfied by the cotangent, not the tangent
    chain, mseq, lseq = make_violation_chain()
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=2, lSeq=lseq)
    cert = theorem3_certify(chain, mseq, params)
    assert cert.cond7Cot == (True, True, True, True)
    assert cert.cond7Printed == (False, False, False, False)


def test_theorem3_gap_cap_violation_witnessed():
    chain, mseq, lseq = make_violation_chain()
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=1, lSeq=lseq)
    cert = theorem3_certify(chain, mseq, params)
    assert not cert.overall
    assert cert.witness == 1
    assert all(not row[3] for row in cert.perK)


def test_theorem3_empty_mseq_degenerates_to_h2():
    good = [RZStep(Phi=GOOD_PHI, lam=3.0)] * 60
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=2)
    cert = theorem3_certify(good, (), params)
    assert cert.overall and cert.perK == ()
    bad = list(good)
    bad[10] = RZStep(Phi=math.pi / 2, lam=3.0)
    cert2 = theorem3_certify(bad, (), params)
    assert not cert2.overall and cert2.witness == 11


def test_theorem3_k0_skips_leading_pairs():
    chain, mseq, lseq = make_violation_chain(n1=7)
    full = (1, 3) + mseq
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=2, K0=1,
                            lSeq=lseq)
    cert = theorem3_certify(chain, full, params)
    assert cert.nSeq[0] == 7
    assert cert.overall


def test_theorem3_validation_errors():
    chain, mseq, lseq = make_violation_chain()
    params = Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0, Clambda=1.5,
                            Glambda=2.0, delta=2.0, N0=2)
    with pytest.raises(ValueError, match="increasing"):
        theorem3_certify(chain, (3, 3, 21), params)
    with pytest.raises(ValueError, match="split"):
        theorem3_certify(chain, (3, 4, 21, 37, 39, 55, 57, 73), params)
    with pytest.raises(ValueError, match="three"):
        theorem3_certify(chain, (3, 19, 21, 37), params)
    with pytest.raises(ValueError, match="horizon"):
        theorem3_certify(chain[:50], mseq, params)
    with pytest.raises(ValueError, match="empty"):
        theorem3_certify([], mseq, params)
    with pytest.raises(ValueError, match="one split index"):
        theorem3_certify(chain, mseq,
                         Theorem3Params(Lambda0Min=3.0, Lambda0Max=3.0,
                                        Clambda=1.5, Glambda=2.0, delta=2.0,
                                        N0=2, lSeq=(5,)))


# ---------------------------------------------------------------------------
# scaled pattern with tuned dips


COR2_G = 6.0
COR2_P = 1.1
COR2_TSEQ = (4, 100, 104, 200, 204, 300)
COR2_BETA_J = 0.0493959766377779  # bisected so the recovery cot is ~1e-15
COR2_BSTAR = (COR2_G * COR2_P) / (1.0 + (COR2_G * COR2_P) ** 2) / COR2_G


def cor2_bhat():
    bh = [COR2_P if j % 2 == 1 else -COR2_P for j in range(1, 321)]
    for t in (100, 200, 300):
        bh[t - 1] = COR2_BETA_J
    for t in (4, 104, 204):
        bh[t - 1] = COR2_BSTAR
    return bh


def cor2_settings(**kw):
    base = dict(C1=0.3, C2=1.15, alpha=0.5, N0=3)
    base.update(kw)
    return Corollary2Settings(**base)


def test_corollary2_tuned_instance_passes():
    res = corollary2_certify(cor2_bhat(), COR2_TSEQ, COR2_G,
                             cor2_settings(gGrid=(2.0, 4.0, 6.0, 8.0)))
    assert res.conditions == (True,) * 7
    assert res.overall and res.witness is None
    assert res.mSeq == (2, 50, 52, 100, 102, 150)
    assert res.g0 == 6.0  # only the tuned scale on the grid passes
    assert res.h1Valid
    assert res.measuredRate > 3.0


def test_corollary2_detuned_dip_fails_closeness():
    bh = cor2_bhat()
    for t in (100, 200, 300):
        bh[t - 1] = COR2_BETA_J + 0.2
    res = corollary2_certify(bh, COR2_TSEQ, COR2_G, cor2_settings())
    assert not res.conditions[1]
    assert not res.overall


def test_corollary2_spacing_violation_witnessed():
    bh = [COR2_P if j % 2 == 1 else -COR2_P for j in range(1, 321)]
    tseq = (4, 6, 100, 104, 200, 204)
    for t in tseq:
        bh[t - 1] = COR2_BSTAR
    res = corollary2_certify(bh, tseq, COR2_G, cor2_settings())
    assert res.conditions[0] is False
    assert res.conditions[3:] == (False, False, False, False)
    assert res.witness == 1 and not res.overall


def test_corollary2_empty_tseq_reduces_to_h1_h2():
    res = corollary2_certify([1.0] * 40, (), 10.0,
                             Corollary2Settings(C1=0.9, C2=1.1, alpha=0.5, N0=3))
    assert res.conditions == (True,) * 7
    assert res.overall and res.g0 == 10.0
    assert res.measuredRate > 4.0


def test_corollary2_pattern_validation():
    st = Corollary2Settings(C1=0.9, C2=1.1, alpha=0.5, N0=3)
    with pytest.raises(ValueError, match="outside"):
        corollary2_certify([1.0, 0.1] * 20, (), 10.0, st)
    with pytest.raises(ValueError, match="head"):
        corollary2_certify([1.0] * 40, (1,), 10.0, st)
    with pytest.raises(ValueError, match="even number"):
        corollary2_certify([1.0] * 5, (), 10.0, st)
    with pytest.raises(ValueError, match="positive"):
        corollary2_certify([1.0] * 40, (), 0.0, st)
    with pytest.raises(ValueError, match="1-based"):
        corollary2_certify([1.0] * 40, (80,), 10.0, st)
