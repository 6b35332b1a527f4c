"""Tracing configuration loops under disk maps and extracting pure braids.

For a map f, a power p and a 3-point configuration x, the traced loop runs in
three thirds: straight moves from the basepoint configuration to x, the
generating isotopy of f applied p times, and straight moves from f^p(x) back
to the basepoint.  The homotopy class of that loop in the configuration space
is a pure braid; it is recovered by a sweep: strands are ordered by
x-coordinate, each transversal swap of x-order emits one braid letter whose
sign is the rotation sense of the crossing pair (counterclockwise positive,
so a full counterclockwise turn of all three strands yields the positive full
twist).  Crossing times are bisected to machine precision inside a sampled
grid, and the grid is doubled until the reduced word stabilizes twice in a
row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .braids import BraidWord, braid_permutation, free_reduce
from .diskmaps import DiskMap

COLLISION_TOL = 1e-7
# middle basepoint sits slightly off-axis so straight move-in/out segments of
# generic configurations avoid exact triple collinearity
DEFAULT_BASEPOINT = (-0.5 + 0.0j, 0.0 + 0.01j, 0.5 + 0.0j)

_PAIRS = ((0, 1), (0, 2), (1, 2))


class CollisionError(RuntimeError):
    """Strands got closer than the collision tolerance; resample the config."""


class UnresolvedCrossingError(RuntimeError):
    """Crossing structure could not be resolved at the maximum refinement."""


@dataclass(frozen=True)
class Config3:
    """Three labeled points in the open unit disk, pairwise separated."""

    points: tuple[complex, complex, complex]

    def __post_init__(self):
        pts = tuple(complex(z) for z in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) != 3:
            raise ValueError("need exactly 3 points")
        for z in pts:
            if abs(z) >= 1.0:
                raise ValueError(f"point {z} outside the open unit disk")
        if self.min_separation() <= COLLISION_TOL:
            raise CollisionError("configuration points too close")

    def min_separation(self) -> float:
        pts = self.points
        return min(abs(pts[i] - pts[j]) for i, j in _PAIRS)

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)


@dataclass
class TrajectoryBundle:
    """Strand paths of the traced loop, evaluable at arbitrary loop times.

    positions(ts) is exact for twist compositions and integrator-accurate for
    Hamiltonian flows; min_separation records the smallest pairwise strand
    distance seen while sampling.
    """

    map: DiskMap
    x: Config3
    basepoint: Config3
    p: int
    pieces: int
    checkpoints: np.ndarray  # (pieces + 1, 3) configs at flow-piece boundaries
    min_separation: float = field(default=np.inf)

    @property
    def end_config(self) -> np.ndarray:
        return self.checkpoints[-1]

    def positions(self, ts, track: bool = True) -> np.ndarray:
        """Loop positions at times ts in [0, 1]; shape (len(ts), 3)."""
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), 3), dtype=complex)
        x0 = self.basepoint.array()
        x1 = self.x.array()

        m_in = ts <= 1.0 / 3.0
        lam = (3.0 * ts[m_in])[:, None]
        out[m_in] = (1.0 - lam) * x0[None, :] + lam * x1[None, :]

        m_out = ts >= 2.0 / 3.0
        lam = (3.0 * ts[m_out] - 2.0)[:, None]
        out[m_out] = (1.0 - lam) * self.end_config[None, :] + lam * x0[None, :]

        m_mid = ~(m_in | m_out)
        if m_mid.any():
            tau = (3.0 * ts[m_mid] - 1.0) * self.pieces
            piece = np.minimum(tau.astype(int), self.pieces - 1)
            local = tau - piece
            out[m_mid] = self._piece_batch(piece, local)
        if track:
            self._track_separation(out)
        return out

    def _piece_batch(self, piece: np.ndarray, local: np.ndarray) -> np.ndarray:
        """Positions inside flow pieces, vectorized across pieces.

        Twist compositions share the twist parameters of all pieces with the
        same entry, so those are evaluated in one shot per entry; other maps
        fall back to a per-piece loop.
        """
        entries = getattr(self.map, "entries", None)
        if entries is not None and len(entries) > 0:
            res = np.empty((len(piece), 3), dtype=complex)
            z0 = self.checkpoints[piece]  # (B, 3)
            entry_id = piece % len(entries)
            for eid in np.unique(entry_id):
                twist, power = entries[eid]
                sel = entry_id == eid
                rel = z0[sel] - twist.center
                theta = power * twist.angle(np.abs(rel))
                res[sel] = twist.center + rel * np.exp(
                    1j * theta * local[sel][:, None]
                )
            return res
        res = np.empty((len(piece), 3), dtype=complex)
        for pc in np.unique(piece):
            sel = piece == pc
            res[sel] = self.map.piece_positions(
                self.checkpoints[pc], int(pc), local[sel]
            )
        return res

    def _track_separation(self, pos: np.ndarray) -> None:
        for i, j in _PAIRS:
            d = np.min(np.abs(pos[:, i] - pos[:, j]))
            if d < self.min_separation:
                self.min_separation = float(d)


def _tent_min_separation(a0, a1, b0, b1) -> float:
    """Exact minimum of |(1-s) (a0-b0) + s (a1-b1)| over s in [0, 1]."""
    d0, d1 = a0 - b0, a1 - b1
    v = d1 - d0
    vv = (v * v.conjugate()).real
    if vv == 0:
        return abs(d0)
    s = -np.real(d0 * v.conjugate()) / vv
    s = min(1.0, max(0.0, s))
    return abs(d0 + s * v)


def trace_loop(f: DiskMap, x: Config3, p: int,
               basepoint: Config3 | None = None) -> TrajectoryBundle:
    """Trace the loop for f^p based at the standard configuration.

    Raises CollisionError when the straight move-in/out segments collide
    exactly; near-collisions along the flow are caught during extraction.
    """
    if p < 1:
        raise ValueError("power must be >= 1")
    if basepoint is None:
        basepoint = Config3(DEFAULT_BASEPOINT)
    pieces = f.flow_pieces(p)
    checkpoints = np.empty((pieces + 1, 3), dtype=complex)
    z = x.array()
    for pc in range(pieces):
        checkpoints[pc] = z
        z = f.piece_end(z, pc)
    checkpoints[pieces] = z

    bundle = TrajectoryBundle(map=f, x=x, basepoint=basepoint, p=p,
                              pieces=pieces, checkpoints=checkpoints)
    x0, x1, xe = basepoint.array(), x.array(), z
    for i, j in _PAIRS:
        if _tent_min_separation(x0[i], x1[i], x0[j], x1[j]) <= COLLISION_TOL:
            raise CollisionError("strand collision on the move-in segment")
        if _tent_min_separation(xe[i], x0[i], xe[j], x0[j]) <= COLLISION_TOL:
            raise CollisionError("strand collision on the move-out segment")
    return bundle


def _build_grid(bundle: TrajectoryBundle, per_piece: int) -> np.ndarray:
    """Sampling grid: tents plus per_piece points in each smooth flow piece.

    The move-in/out differences are linear in t, so a handful of tent points
    suffices to bracket their single possible crossing per pair.
    """
    mid = np.linspace(1.0 / 3.0, 2.0 / 3.0, bundle.pieces * per_piece + 1)
    return np.concatenate([
        np.linspace(0.0, 1.0 / 3.0, 9)[:-1],
        mid,
        np.linspace(2.0 / 3.0, 1.0, 9)[1:],
    ])


def _extract_at(bundle: TrajectoryBundle, per_piece: int) -> BraidWord:
    ts = _build_grid(bundle, per_piece)
    pos = bundle.positions(ts)

    # bracket sign changes of Re(z_i - z_j) for all three pairs at once
    lo_t: list[np.ndarray] = []
    hi_t: list[np.ndarray] = []
    flo: list[np.ndarray] = []
    pids: list[np.ndarray] = []
    for pair_id, (i, j) in enumerate(_PAIRS):
        f = np.real(pos[:, i] - pos[:, j])
        zero_hits = np.flatnonzero(np.abs(f) < 1e-15)
        inner = zero_hits[(zero_hits > 0) & (zero_hits < len(ts) - 1)]
        tgrid = ts
        if inner.size:
            # nudge grid points that land exactly on a crossing
            tgrid = ts.copy()
            tgrid[inner] += (tgrid[inner + 1] - tgrid[inner]) / 7.0
            pos2 = bundle.positions(tgrid)
            f = np.real(pos2[:, i] - pos2[:, j])
        ix = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
        if ix.size:
            lo_t.append(tgrid[ix])
            hi_t.append(tgrid[ix + 1])
            flo.append(f[ix])
            pids.append(np.full(ix.size, pair_id))

    events: list[tuple[float, int, int]] = []  # (t, letter_index, sign)
    if lo_t:
        lo = np.concatenate(lo_t)
        hi = np.concatenate(hi_t)
        f0 = np.concatenate(flo)
        pid = np.concatenate(pids)
        ii = np.array([_PAIRS[p][0] for p in pid])
        jj = np.array([_PAIRS[p][1] for p in pid])
        rows = np.arange(len(lo))
        slo = np.sign(f0)
        for _ in range(52):
            mid = 0.5 * (lo + hi)
            pm = bundle.positions(mid, track=False)
            fm = np.real(pm[rows, ii] - pm[rows, jj])
            left = np.sign(fm) == slo
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
        roots = 0.5 * (lo + hi)
        rpos = bundle.positions(roots)
        zi, zj = rpos[rows, ii], rpos[rows, jj]
        dy = (zi - zj).imag
        if np.any(np.abs(dy) < COLLISION_TOL):
            raise CollisionError("strands within tolerance at a crossing")
        slope = np.where(f0 < 0, 1.0, -1.0)
        signs = np.where(-dy * slope > 0, 1, -1)
        third = 3 - ii - jj
        x_star = 0.5 * (zi.real + zj.real)
        x3 = rpos[rows, third].real
        if np.any(np.abs(x3 - x_star) < 1e-9):
            raise UnresolvedCrossingError("third strand at a crossing abscissa")
        index = np.where(x_star < x3, 1, 2)
        events = [(float(t), int(ix), int(sg))
                  for t, ix, sg in zip(roots, index, signs)]

    events.sort(key=lambda e: e[0])
    for (t1, *_), (t2, *_) in zip(events, events[1:]):
        if t2 - t1 < 1e-11:
            raise UnresolvedCrossingError("two crossings at indistinguishable times")
    letters = tuple(idx * sg for _, idx, sg in events)
    return free_reduce(BraidWord(3, letters))


def braid_of(bundle: TrajectoryBundle, initial_per_piece: int | None = None,
             max_doublings: int = 8) -> BraidWord:
    """Extract the pure braid of a traced loop.

    The grid is doubled until the freely reduced word is reproduced twice in
    a row; the stabilized word must be pure (its strand permutation is the
    identity), otherwise the extraction is reported as unresolved.
    """
    if initial_per_piece is None:
        turns = getattr(bundle.map, "max_turns_per_piece", lambda: 1.0)()
        initial_per_piece = max(16, int(math.ceil(16 * (turns + 1))))
    per_piece = initial_per_piece
    last: BraidWord | None = None
    agreements = 0
    for _ in range(max_doublings + 1):
        cur = _extract_at(bundle, per_piece)
        if last is not None and cur.letters == last.letters:
            agreements += 1
            if agreements >= 2:
                if braid_permutation(cur) != (0, 1, 2):
                    raise UnresolvedCrossingError(
                        "extracted braid is not pure: "
                        f"permutation {braid_permutation(cur)}"
                    )
                if bundle.min_separation <= COLLISION_TOL:
                    raise CollisionError("minimum strand separation below tolerance")
                return cur
        else:
            agreements = 0
        last = cur
        per_piece *= 2
    raise UnresolvedCrossingError(
        f"word did not stabilize after {max_doublings} grid doublings"
    )
