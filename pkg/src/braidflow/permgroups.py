"""Exact conjugation-generated norms and the symmetrized-class metric on
small alternating (and symmetric) groups.

Elements are permutations in one-line notation, enumerated lexicographically,
so every table is deterministic.  For a subset K of a group G, q_K(g) is the
least number of conjugates of elements of K and their inverses whose product
is g (q_K(e) = 0); it is computed exactly as a breadth-first distance in the
Cayley graph whose generating set is the union of the full conjugacy classes
of K and K^{-1}.  On the set of nontrivial symmetrized conjugacy classes
(classes of g and g^{-1} merged) the distance

    d([f], [g]) = log max(q_{[g]}(f), q_{[f]}(g))

is a metric; all of its axioms are checked exhaustively after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np


class NotGeneratedError(RuntimeError):
    """The normal closure of K is a proper subgroup, so q_K is not defined on
    all of G (cannot happen for a simple G and nontrivial K)."""


def perm_compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """(p * q)(i) = p(q(i)): apply q first, then p."""
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_sign(p: tuple[int, ...]) -> int:
    seen = [False] * len(p)
    sign = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def cycle_notation(p: tuple[int, ...]) -> str:
    """1-based disjoint-cycle string, fixed points omitted; identity is 'e'."""
    seen = [False] * len(p)
    parts = []
    for i in range(len(p)):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cyc, j = [], i
        while not seen[j]:
            seen[j] = True
            cyc.append(j + 1)
            j = p[j]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) if parts else "e"


def cycle_type(p: tuple[int, ...]) -> tuple[int, ...]:
    seen = [False] * len(p)
    lens = []
    for i in range(len(p)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            clen += 1
        lens.append(clen)
    return tuple(sorted(lens, reverse=True))


@dataclass
class GroupTable:
    """Enumerated permutation group with cached conjugacy data.

    elements are sorted lexicographically by one-line notation and addressed
    by index; immutable after construction.
    """

    degree: int
    alternating: bool
    elements: np.ndarray          # (N, degree) int8, lexicographically sorted
    inverse: np.ndarray           # (N,) element index of each inverse
    class_of: np.ndarray          # (N,) conjugacy class id
    classes: list[np.ndarray]     # member indices per conjugacy class
    identity: int                 # index of the identity element
    _codes: np.ndarray = field(repr=False, default=None)
    _weights: np.ndarray = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index_of(self, p: tuple[int, ...]) -> int:
        code = sum(v * w for v, w in zip(p, self._weights.tolist()))
        i = int(np.searchsorted(self._codes, code))
        if i >= self.order or self._codes[i] != code:
            raise KeyError(f"{p} is not an element of this group")
        return i

    def perm(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.elements[i])

    def indices_of_products(self, rows: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Indices of elements[rows] * q for a fixed permutation q (vectorized)."""
        prods = self.elements[rows][:, q]
        codes = prods @ self._weights
        idx = np.searchsorted(self._codes, codes)
        return idx

    def compose_many(self, g_idx: np.ndarray, h_idx: np.ndarray) -> np.ndarray:
        """Elementwise product indices of paired element arrays."""
        prods = np.take_along_axis(self.elements[g_idx], self.elements[h_idx],
                                   axis=1)
        return np.searchsorted(self._codes, prods @ self._weights)

    def compose(self, i: int, j: int) -> int:
        return self.index_of(perm_compose(self.perm(i), self.perm(j)))


def build_group(degree: int, alternating: bool = True) -> GroupTable:
    """Enumerate A_degree (or S_degree) with conjugacy classes.

    Supported range is 3 <= degree <= 8: A_8 has 20160 elements and every
    table here is materialized in memory.
    """
    if not 3 <= degree <= 8:
        raise ValueError(f"degree {degree} outside supported range 3..8")
    elems = [p for p in permutations(range(degree))
             if not alternating or perm_sign(p) == 1]
    elems.sort()
    E = np.array(elems, dtype=np.int16)
    N = len(elems)
    weights = np.array([degree ** (degree - 1 - i) for i in range(degree)],
                       dtype=np.int64)
    codes = E @ weights  # ascending, since elements are lex sorted

    inv = np.empty(N, dtype=np.int64)
    Einv = np.empty_like(E)
    rows = np.arange(N)[:, None]
    Einv[rows, E] = np.arange(degree)[None, :]
    inv = np.searchsorted(codes, Einv @ weights)

    class_of = np.full(N, -1, dtype=np.int64)
    classes: list[np.ndarray] = []
    for g in range(N):
        if class_of[g] >= 0:
            continue
        # (h g h^-1)(i) = h[g[hinv[i]]] for every h at once
        X = E[g][Einv]
        Y = np.take_along_axis(E, X, axis=1)
        members = np.unique(np.searchsorted(codes, Y @ weights))
        class_of[members] = len(classes)
        classes.append(members)

    identity = int(np.searchsorted(codes, np.arange(degree) @ weights))
    return GroupTable(degree=degree, alternating=alternating, elements=E,
                      inverse=inv, class_of=class_of, classes=classes,
                      identity=identity, _codes=codes, _weights=weights)


@dataclass(frozen=True)
class SymClass:
    """Symmetrized conjugacy class: the classes of g and g^-1 merged.

    The canonical representative is the lexicographically minimal member, so
    it does not depend on how the input enumeration was produced.
    """

    rep: int
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def label(self, G: GroupTable) -> str:
        return cycle_notation(G.perm(self.rep))


def sym_classes(G: GroupTable) -> list[SymClass]:
    """Nontrivial symmetrized conjugacy classes, ordered by representative."""
    out = []
    seen = set()
    for cid, members in enumerate(G.classes):
        if cid in seen:
            continue
        inv_cid = int(G.class_of[G.inverse[members[0]]])
        seen.add(cid)
        merged = members
        if inv_cid != cid:
            seen.add(inv_cid)
            merged = np.union1d(members, G.classes[inv_cid])
        if G.identity in merged:
            continue
        out.append(SymClass(rep=int(merged.min()),
                            members=tuple(int(m) for m in merged)))
    out.sort(key=lambda s: s.rep)
    return out


@dataclass
class NormTable:
    """q_K for one reference set K: BFS distances from the identity in the
    Cayley graph generated by the conjugacy classes of K and K^-1."""

    K: tuple[int, ...]
    generators: tuple[int, ...]
    q: np.ndarray  # (N,) nonnegative integers

    def radius(self) -> int:
        return int(self.q.max())


def conj_norm(G: GroupTable, K) -> NormTable:
    """Exact conjugation-generated norm q_K on all of G.

    K is a collection of element indices or one-line tuples, at least one of
    them non-identity.  Raises NotGeneratedError if the normal closure of K
    is proper (e.g. the double-transposition class inside A_4).
    """
    k_idx = tuple(k if isinstance(k, (int, np.integer)) else G.index_of(tuple(k))
                  for k in K)
    if not k_idx:
        raise ValueError("K must be nonempty")
    gen_set: set[int] = set()
    for k in k_idx:
        if k == G.identity:
            continue
        gen_set.update(int(m) for m in G.classes[G.class_of[k]])
        gen_set.update(int(m) for m in G.classes[G.class_of[G.inverse[k]]])
    if not gen_set:
        raise ValueError("K contains no non-identity element")
    gens = sorted(gen_set)

    q = np.full(G.order, -1, dtype=np.int64)
    q[G.identity] = 0
    frontier = np.array([G.identity], dtype=np.int64)
    dist = 0
    gen_perms = [G.elements[s] for s in gens]
    while frontier.size:
        dist += 1
        nxt: list[np.ndarray] = []
        for gp in gen_perms:
            cand = G.indices_of_products(frontier, gp)
            fresh = cand[q[cand] < 0]
            if fresh.size:
                q[fresh] = dist
                nxt.append(fresh)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.array([], dtype=np.int64)
    if (q < 0).any():
        missing = int((q < 0).sum())
        raise NotGeneratedError(
            f"K does not normally generate the group ({missing} elements unreachable)"
        )
    return NormTable(K=k_idx, generators=tuple(gens), q=q)


@dataclass
class SubmultiplicativityReport:
    passed: bool
    triples_checked: int
    first_violation: tuple[int, int, int] | None


def verify_submultiplicativity(G: GroupTable) -> SubmultiplicativityReport:
    """Exhaustive check of q_{f}(h) <= q_{f}(g) * q_{g}(h) over all ordered
    triples of symmetrized-class representatives.

    Both sides are class functions, so representatives cover all of G.  A
    violation would indicate an implementation bug and is reported with the
    offending triple.
    """
    syms = sym_classes(G)
    norms = {s.rep: conj_norm(G, [s.rep]) for s in syms}
    checked = 0
    for f in syms:
        qf = norms[f.rep].q
        for g in syms:
            qg = norms[g.rep].q
            qf_g = int(qf[g.rep])
            for h in syms:
                checked += 1
                if int(qf[h.rep]) > qf_g * int(qg[h.rep]):
                    return SubmultiplicativityReport(False, checked,
                                                     (f.rep, g.rep, h.rep))
    return SubmultiplicativityReport(True, checked, None)


@dataclass
class MetricMatrix:
    """The symmetrized-class metric: exact integer norms plus their log.

    q_pairs[i, j] = q_{[class j]}(rep of class i); the metric value is
    d[i, j] = log max(q_pairs[i, j], q_pairs[j, i]).
    """

    classes: list[SymClass]
    q_pairs: np.ndarray  # (k, k) integers
    d: np.ndarray        # (k, k) floats

    def validate(self) -> None:
        k = len(self.classes)
        assert np.allclose(np.diag(self.d), 0.0)
        assert np.array_equal(self.d, self.d.T)
        for i in range(k):
            for j in range(k):
                if i != j:
                    assert self.d[i, j] > 0, (i, j)
        for i in range(k):
            for j in range(k):
                for l in range(k):
                    lhs = self.d[i, l]
                    rhs = self.d[i, j] + self.d[j, l]
                    assert lhs <= rhs + 1e-12, ("triangle", i, j, l)

    def diameter(self) -> float:
        """Largest pairwise distance: the boundedness diagnostic.

        A finite carrier is always bounded; the interesting quantity is how
        the diameter grows with the degree (a uniformly simple family would
        keep it bounded).
        """
        return float(self.d.max())


def tsuboi_metric(G: GroupTable) -> MetricMatrix:
    """Build the full metric matrix over the symmetrized classes of G.

    Requires every symmetrized class to normally generate G (true for simple
    G); propagates NotGeneratedError otherwise.
    """
    syms = sym_classes(G)
    k = len(syms)
    q_pairs = np.zeros((k, k), dtype=np.int64)
    norms = [conj_norm(G, [s.rep]) for s in syms]
    for j, nt in enumerate(norms):
        for i, s in enumerate(syms):
            q_pairs[i, j] = nt.q[s.rep]
    d = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            d[i, j] = math.log(max(q_pairs[i, j], q_pairs[j, i]))
    m = MetricMatrix(classes=syms, q_pairs=q_pairs, d=d)
    m.validate()
    return m


@dataclass
class DistortionReport:
    """Finite-scale distortion of the basepoint-distance embedding.

    r([g]) = d([basepoint], [g]) maps classes into the half line.  lam and C
    are the smallest constants of the scanned form with
        d/lam - C <= |r(x) - r(y)| <= lam * d + C   for every pair,
    where lam is the largest two-sided ratio over pairs with r-separation and
    C absorbs pairs the ratio cannot see (r(x) = r(y) at positive distance).
    coverage_radius is the largest gap between consecutive sorted r-values.
    This is a diagnostic proxy at finite scale, not a quasi-isometry claim.
    """

    basepoint: int
    values: np.ndarray
    lam: float
    C: float
    coverage_radius: float

    def check_achieved(self, d: np.ndarray) -> bool:
        k = len(self.values)
        for i in range(k):
            for j in range(i + 1, k):
                dr = abs(self.values[i] - self.values[j])
                if dr > self.lam * d[i, j] + self.C + 1e-12:
                    return False
                if dr < d[i, j] / self.lam - self.C - 1e-12:
                    return False
        return True


def qi_diagnostic(M: MetricMatrix, basepoint: int = 0) -> DistortionReport:
    """Distortion report for the embedding [g] -> d([basepoint], [g])."""
    if not 0 <= basepoint < len(M.classes):
        raise IndexError("basepoint class index out of range")
    r = M.d[basepoint].copy()
    k = len(r)
    lam = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            dr = abs(r[i] - r[j])
            if dr > 0:
                lam = max(lam, dr / M.d[i, j], M.d[i, j] / dr)
    C = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            dr = abs(r[i] - r[j])
            C = max(C, M.d[i, j] / lam - dr)
    srt = np.sort(r)
    coverage = float(np.max(np.diff(srt))) if k > 1 else 0.0
    rep = DistortionReport(basepoint=basepoint, values=r, lam=lam, C=C,
                           coverage_radius=coverage)
    assert rep.check_achieved(M.d)
    return rep
