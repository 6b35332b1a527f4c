import json
import math

import numpy as np
import pytest

from braidflow.diskmaps import (
    RadialTwist,
    TwistComposition,
    identity_map,
    kercal_plateau_pair,
)
from braidflow.ggestimate import (
    GGEstimate,
    area_bound,
    bound_certificate,
    gamma_estimate,
    gamma_extrapolate,
    iter_traced_samples,
    scaling_check,
    sequence_experiment,
)
from braidflow.quasimorphisms import PHI_B3, WRITHE_QM
from braidflow.reporting import canonical_json

RIGID = TwistComposition([
    RadialTwist(center=0j, radius=0.7, amplitude=2 * math.pi, profile="rigid")
])


def test_identity_estimate_zero():
    est = gamma_estimate(identity_map(), PHI_B3, p=3, n_samples=150, seed=1)
    assert est.mean == 0.0 and est.stderr == 0.0 and est.rejections == 0


def test_rigid_twist_oracle_value():
    # semi-analytic oracle: only all-inside configurations braid, each
    # contributing exactly -3 per power, so the averaged value is -3 R^6
    est = gamma_estimate(RIGID, PHI_B3, p=1, n_samples=800, seed=3)
    assert est.mean == pytest.approx(-3 * 0.7**6, abs=1e-12)
    assert est.stderr == 0.0
    by_k = {s.in_count: s for s in est.strata}
    assert by_k[3].mean == -3.0 and by_k[3].std == 0.0
    for k in (0, 1, 2):
        assert by_k[k].mean == 0.0 and by_k[k].std == 0.0


def test_rigid_twist_power_invariance():
    e1 = gamma_estimate(RIGID, PHI_B3, p=1, n_samples=300, seed=4)
    e4 = gamma_estimate(RIGID, PHI_B3, p=4, n_samples=300, seed=4)
    assert e1.mean == pytest.approx(e4.mean, abs=1e-12)


def test_estimator_determinism():
    a = gamma_estimate(RIGID, PHI_B3, p=2, n_samples=400, seed=9)
    b = gamma_estimate(RIGID, PHI_B3, p=2, n_samples=400, seed=9)
    assert a == b
    assert canonical_json(a.to_dict()) == canonical_json(b.to_dict())
    c = gamma_estimate(RIGID, PHI_B3, p=2, n_samples=400, seed=10)
    assert c != a


def test_unstratified_mode_stderr_convention():
    est = gamma_estimate(RIGID, PHI_B3, p=1, n_samples=500, seed=5,
                         stratified=False)
    vals = [s for s in est.strata]
    assert len(vals) == 1
    s = vals[0]
    assert est.stderr == pytest.approx(s.std / math.sqrt(s.accepted))
    # plain Monte Carlo mean must agree with the stratified one within noise
    strat = gamma_estimate(RIGID, PHI_B3, p=1, n_samples=500, seed=5)
    assert abs(est.mean - strat.mean) <= 4 * max(est.stderr, 1e-12)


def test_estimate_round_trip_serialization():
    est = gamma_estimate(RIGID, PHI_B3, p=2, n_samples=200, seed=6)
    got = GGEstimate.from_dict(json.loads(canonical_json(est.to_dict())))
    assert got == est


def test_gamma_extrapolate_identity():
    rep = gamma_extrapolate(identity_map(), PHI_B3, [1, 2, 4], 100, seed=7)
    assert all(e.mean == 0.0 for e in rep.estimates)
    assert rep.diffs == (0.0, 0.0)


def test_gamma_extrapolate_single_p():
    rep = gamma_extrapolate(RIGID, PHI_B3, [2], 200, seed=8)
    assert len(rep.estimates) == 1 and rep.diffs == ()


def test_gamma_extrapolate_requires_increasing():
    with pytest.raises(ValueError):
        gamma_extrapolate(RIGID, PHI_B3, [2, 2], 100, seed=0)


def test_scaling_check_rigid_exact():
    # the rigid twist strata are noiseless, so the measured ratio is exactly
    # the mass ratio 1/64
    rep = scaling_check(RIGID, PHI_B3, r=2.0, p=1, n_samples=600, seed=11)
    assert rep.status == "pass"
    assert rep.ratio == pytest.approx(2.0**-6, abs=1e-15)


def test_scaling_check_gate_and_uninformative():
    with pytest.raises(ValueError, match="inapplicable"):
        scaling_check(RIGID, WRITHE_QM, r=2.0, p=1, n_samples=100, seed=0)
    rep = scaling_check(identity_map(), PHI_B3, r=2.0, p=1, n_samples=100,
                        seed=0)
    assert rep.status == "uninformative"
    with pytest.raises(ValueError):
        scaling_check(RIGID, PHI_B3, r=1.0, p=1, n_samples=100, seed=0)


def test_area_bound_values():
    pair = kercal_plateau_pair()
    assert area_bound(pair, 2.0, 3, 3).bound == 0.0
    rep = area_bound(pair, 2.0, 3, 0)
    assert rep.bound == 6 * math.log(2)
    assert rep.mass_ratio == 64.0
    assert rep.mass_m == pytest.approx(pair.support_mass() / 64.0, rel=1e-15)
    for m in range(6):
        for n in range(6):
            r = area_bound(pair, 2.0, m, n)
            assert r.bound == 2 * math.log(2) * abs(m - n)
            assert r.mass_ratio == 2.0 ** (2 * abs(m - n))


def test_area_bound_validation():
    with pytest.raises(TypeError):
        area_bound("nope", 2.0, 1, 0)
    with pytest.raises(ValueError):
        area_bound(kercal_plateau_pair(), 1.0, 1, 0)


def test_bound_certificate_arithmetic():
    c = bound_certificate(2.0, 3.0, 1.0, 1)
    assert c.bound == math.log(abs(2.0) / 4.0)
    assert c.recompute() == c.bound
    c = bound_certificate(4.0, 3.0, 1.0, 1)
    assert c.bound == 0.0  # |phi| = D + C_K, m = 1
    c = bound_certificate(4.0, 3.0, 1.0, 10)
    assert c.bound == pytest.approx(math.log(10), abs=1e-15)
    assert c.validity == "exact"
    assert bound_certificate(1.0, 3.0, 0.0, 2,
                             assumed_defect=True).validity == "conditional-on-D"


def test_bound_certificate_validation():
    with pytest.raises(ValueError):
        bound_certificate(0.0, 3.0, 1.0, 1)
    with pytest.raises(ValueError):
        bound_certificate(1.0, -1.0, 1.0, 1)
    with pytest.raises(ValueError):
        bound_certificate(1.0, 3.0, 1.0, 0)


RIGID_KERCAL = TwistComposition([
    RadialTwist(center=-0.4 + 0j, radius=0.25, amplitude=2 * math.pi,
                profile="rigid"),
    RadialTwist(center=0.4 + 0j, radius=0.25, amplitude=-2 * math.pi,
                profile="rigid"),
])


def test_sequence_experiment_small(tmp_path):
    assert RIGID_KERCAL.calabi() == 0.0
    rep = sequence_experiment(RIGID_KERCAL, RIGID, r=2.0, n_max=1, m_max=2,
                              p=1, n_samples=300, seed=13,
                              assumed_defect=3.0, out_dir=tmp_path)
    assert rep.area_bounds[1][0] == 2 * math.log(2)
    assert rep.area_bounds[0][0] == 0.0
    assert all(rep.consistent_3sigma)
    assert len(rep.certificates) == 2
    for m, cert in enumerate(rep.certificates, start=1):
        assert cert.validity == "conditional-on-D"
        assert cert.bound == pytest.approx(
            math.log(m) + math.log(abs(rep.g_estimate.mean)
                                   / (3.0 + max(abs(e.mean) for e in rep.estimates))),
            abs=1e-12)
    # resumability: cached estimates are reused byte-identically
    rep2 = sequence_experiment(RIGID_KERCAL, RIGID, r=2.0, n_max=1, m_max=2,
                               p=1, n_samples=300, seed=13,
                               assumed_defect=3.0, out_dir=tmp_path)
    assert canonical_json(rep.to_dict()) == canonical_json(rep2.to_dict())
    assert len(list(tmp_path.glob("seq_*.json"))) == 3


def test_sequence_experiment_preconditions():
    lopsided = TwistComposition([RadialTwist(center=0j, radius=0.3,
                                             amplitude=2.0, exponent=2)])
    with pytest.raises(ValueError, match="Calabi"):
        sequence_experiment(lopsided, RIGID, 2.0, 1, 1, 1, 100, 0, 3.0)
    with pytest.raises(RuntimeError, match="zero"):
        sequence_experiment(identity_map(), identity_map(), 2.0, 0, 1, 1,
                            100, 0, 3.0)


def test_iter_traced_samples_records():
    recs = list(iter_traced_samples(RIGID, PHI_B3, p=1, n_samples=25, seed=14))
    assert len(recs) == 25
    for rec in recs:
        assert "config" in rec
        if "rejected" not in rec:
            assert "braid" in rec and "lk" in rec and "phi" in rec
    # all-inside samples carry phi = -3 exactly
    inside = [r for r in recs if "braid" not in r or all(
        math.hypot(*pt) < 0.7 for pt in r["config"])]
    for r in inside:
        if "phi" in r:
            assert r["phi"] == {"num": -3, "den": 1}


class _SqueezeMap:
    """Test double: drives strand 2 within 1e-9 of strand 1 (not a
    diffeomorphism; exercises the rejection accounting only)."""

    def support_ball(self):
        from braidflow.diskmaps import Ball

        return Ball(0j, 0.0)

    def describe(self):
        return "squeeze"

    def flow_pieces(self, p):
        return p

    def piece_positions(self, z, piece, s):
        out = np.broadcast_to(z, (len(s), len(z))).copy()
        out[:, 1] = z[0] + (z[1] - z[0]) * (1.0 - np.asarray(s) * (1 - 1e-9))
        return out

    def piece_end(self, z):
        raise NotImplementedError

    def max_turns_per_piece(self):
        return 0.0


_SqueezeMap.piece_end = lambda self, z, piece: self.piece_positions(
    z, piece, np.array([1.0]))[-1]


def test_rejection_rate_abort():
    # every sample ends below the collision tolerance, so the rejection
    # counter trips the 5% limit and the estimator aborts with a diagnostic
    with pytest.raises(RuntimeError, match="rejection rate"):
        gamma_estimate(_SqueezeMap(), PHI_B3, p=1, n_samples=40, seed=15)
