"""Cross-cutting properties: sweep semantics, shrink homomorphism, linking
cocycle along powers, extrapolation trend."""

import math

import numpy as np

from braidflow.braids import linking_numbers
from braidflow.diskmaps import RadialTwist, TwistComposition, twist_flow
from braidflow.ggestimate import gamma_extrapolate
from braidflow.quasimorphisms import PHI_B3
from braidflow.trajectories import Config3, braid_of, trace_loop
from braidflow.trajectories import _extract_at


class _HalfTwistStub:
    """Synthetic strand paths: strands 1 and 2 trade places along a
    counterclockwise half turn during the middle third, strand 3 far away.
    Exercises the raw crossing sweep on a single transversal crossing."""

    pieces = 1

    def __init__(self):
        self.min_separation = np.inf
        self.map = None

    def positions(self, ts, track=True):
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), 3), dtype=complex)
        tau = np.clip(3.0 * ts - 1.0, 0.0, 1.0)  # progress of the half turn
        ang = math.pi * tau
        out[:, 0] = 0.2 * np.exp(1j * ang)
        out[:, 1] = -0.2 * np.exp(1j * ang)
        out[:, 2] = 0.8
        return out


def test_sweep_emits_single_positive_crossing():
    # one counterclockwise exchange of the adjacent pair: exactly one letter,
    # positive sign, exponent sum 1
    word = _extract_at(_HalfTwistStub(), per_piece=64)
    assert len(word.letters) == 1
    assert word.letters[0] == 1


def test_shrink_homomorphism_twist_exact():
    f = TwistComposition([RadialTwist(center=0.2 + 0j, radius=0.25,
                                      amplitude=1.3, exponent=2)])
    g = TwistComposition([RadialTwist(center=-0.3 + 0.1j, radius=0.2,
                                      amplitude=-0.9, exponent=3)])
    r = 2.0
    assert (f * g).shrink(r).entries == (f.shrink(r) * g.shrink(r)).entries
    pts = np.array([0.05 + 0.02j, -0.12 + 0.06j, 0.1 - 0.08j])
    lhs = (f * g).shrink(r).apply(pts)
    rhs = f.shrink(r).apply(g.shrink(r).apply(pts))
    assert np.max(np.abs(lhs - rhs)) == 0.0


def test_shrink_homomorphism_flows_pointwise():
    # s_r(f) o s_r(g) agrees with the conjugated composition pointwise
    f = twist_flow(RadialTwist(center=0.2 + 0j, radius=0.25, amplitude=1.3,
                               exponent=2), n_steps=300)
    g = twist_flow(RadialTwist(center=-0.3 + 0.1j, radius=0.2, amplitude=-0.9,
                               exponent=2), n_steps=300)
    r = 2.0
    pts = np.array([0.05 + 0.02j, -0.12 + 0.06j, 0.1 - 0.08j])
    lhs = f.shrink(r).apply(g.shrink(r).apply(pts))
    rhs = f.apply(g.apply(pts * r)) / r
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_linking_cocycle_along_powers():
    # for a radial twist about a common center, the pairwise linking of the
    # traced braid grows like p times the outer point's rotation rate, with
    # a uniformly bounded correction
    tw = RadialTwist(center=0j, radius=0.6, amplitude=5.0, exponent=2)
    f = TwistComposition([tw])
    x = Config3((0.1 + 0.05j, 0.25 - 0.1j, -0.4 + 0.2j))
    pts = x.points
    for p in (1, 2, 3, 5, 8):
        lk = linking_numbers(braid_of(trace_loop(f, x, p)))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            outer = max(abs(pts[i]), abs(pts[j]))
            predicted = p * float(tw.angle(outer)) / (2 * math.pi)
            assert abs(lk[i][j] - predicted) <= 1.5, (p, i, j)


def test_gamma_extrapolate_trend_shrinks():
    # successive differences decay like O(1/p): after the first step the
    # trend drops to the noise floor
    f = TwistComposition([RadialTwist(center=0j, radius=0.6, amplitude=5.0,
                                      exponent=2)])
    rep = gamma_extrapolate(f, PHI_B3, [1, 2, 4, 8], 600, seed=21)
    assert len(rep.diffs) == 3
    assert max(rep.diffs[1:]) < rep.diffs[0]
