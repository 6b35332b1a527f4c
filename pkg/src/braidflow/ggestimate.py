"""Monte Carlo averaging of braid quasi-morphisms over traced trajectories,
the shrinking scaling law, and certified metric lower bounds.

The averaged value for a map f at power p is the mean of phi(gamma(f^p; x))/p
over configurations x sampled uniformly (w.r.t. the unit-mass area form) on
disk triples.  Sampling is stratified by how many of the three points land in
the support ball of f, with stratum weights computed exactly from the ball
mass and the sample budget skewed toward the all-inside stratum (which
carries both the signal and the variance); proportional allocation would
leave that stratum empty for deeply shrunken maps and make the decay law
unmeasurable.  Everything is deterministic: sample i of stratum k under
(seed, stream) uses the RNG keyed by exactly those integers, so reruns are
byte-identical and parallel and serial execution would agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .braids import linking_numbers, word
from .diskmaps import DiskMap, TwistComposition
from .quasimorphisms import PHI_B3, QmSpec
from .reporting import atomic_write_text, canonical_json, config_hash
from .trajectories import (
    CollisionError,
    Config3,
    UnresolvedCrossingError,
    braid_of,
    trace_loop,
)

_REJECTION_LIMIT = 0.05


def _sample_in_ball(rng, center: complex, radius: float) -> complex:
    u, v = rng.random(), rng.random()
    return center + radius * math.sqrt(u) * np.exp(2j * math.pi * v)


def _sample_disk(rng) -> complex:
    while True:
        x, y = 2 * rng.random() - 1, 2 * rng.random() - 1
        if x * x + y * y < 1:
            return complex(x, y)


def _sample_outside(rng, center: complex, radius: float) -> complex:
    while True:
        z = _sample_disk(rng)
        if abs(z - center) >= radius:
            return z


@dataclass(frozen=True)
class StratumStat:
    in_count: int
    weight: float
    requested: int
    accepted: int
    rejected: int
    mean: float
    std: float

    def to_dict(self):
        return {
            "in_count": self.in_count,
            "weight": self.weight,
            "requested": self.requested,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "mean": self.mean,
            "std": self.std,
        }


@dataclass(frozen=True)
class GGEstimate:
    """Estimate of the averaged quasi-morphism value for one map and power."""

    map_id: str
    p: int
    n_samples: int
    seed: int
    stream: int
    mean: float
    stderr: float
    rejections: int
    strata: tuple[StratumStat, ...] = field(default_factory=tuple)

    def to_dict(self):
        return {
            "map_id": self.map_id,
            "p": self.p,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "stream": self.stream,
            "mean": self.mean,
            "stderr": self.stderr,
            "rejections": self.rejections,
            "strata": [s.to_dict() for s in self.strata],
        }

    @staticmethod
    def from_dict(d) -> "GGEstimate":
        return GGEstimate(
            map_id=d["map_id"], p=d["p"], n_samples=d["n_samples"],
            seed=d["seed"], stream=d["stream"], mean=d["mean"],
            stderr=d["stderr"], rejections=d["rejections"],
            strata=tuple(StratumStat(**s) for s in d["strata"]),
        )


def _stratum_weights(ball_mass: float) -> list[float]:
    a = ball_mass
    return [math.comb(3, k) * a**k * (1 - a) ** (3 - k) for k in range(4)]


def _sample_config(rng, k: int, center: complex, radius: float) -> Config3:
    """Uniform configuration conditioned on exactly k points in the ball."""
    if k == 0:
        pts = [_sample_outside(rng, center, radius) for _ in range(3)]
    elif k == 3:
        pts = [_sample_in_ball(rng, center, radius) for _ in range(3)]
    else:
        # the minority point is inside for k == 1 and outside for k == 2
        special = int(rng.integers(0, 3))
        pts = []
        for i in range(3):
            minority = i == special
            if (k == 1 and minority) or (k == 2 and not minority):
                pts.append(_sample_in_ball(rng, center, radius))
            else:
                pts.append(_sample_outside(rng, center, radius))
    return Config3(tuple(pts))


def gamma_estimate(f: DiskMap, qm: QmSpec, p: int, n_samples: int, seed: int,
                   *, stream: int = 0, stratified: bool = True,
                   basepoint: Config3 | None = None,
                   per_sample=None) -> GGEstimate:
    """Estimate the averaged quasi-morphism value of f at power p.

    Collision or unresolved-crossing rejections are discarded and counted; a
    rejection rate above 5% aborts with a diagnostic.  per_sample, when
    given, receives (stratum, index, Config3, BraidWord or None, phi/p or
    None) for every sample, accepted or not.
    """
    if p < 1 or n_samples < 1:
        raise ValueError("power and sample count must be >= 1")
    ball = f.support_ball()
    weights = _stratum_weights(ball.mass()) if stratified else None

    strata: list[StratumStat] = []
    total_rej = 0
    if stratified:
        # allocation skewed toward the all-inside stratum, which carries the
        # signal and the variance; the all-outside strata are near-constant
        active = [k for k in range(4) if weights[k] > 0.0]
        shares = {0: 1, 1: 1, 2: 2, 3: 4}
        total_share = sum(shares[k] for k in active)
        alloc = {k: (n_samples * shares[k]) // total_share for k in active}
        alloc[active[-1]] += n_samples - sum(alloc.values())
    else:
        active = [-1]
        alloc = {-1: n_samples}

    mean_total = 0.0
    var_total = 0.0
    for k in active:
        vals: list[float] = []
        rejected = 0
        for i in range(alloc[k]):
            rng = np.random.default_rng([seed, stream, k & 0xFF, i])
            try:
                if stratified:
                    x = _sample_config(rng, k, ball.center, ball.radius)
                else:
                    x = Config3(tuple(_sample_disk(rng) for _ in range(3)))
                bundle = trace_loop(f, x, p, basepoint=basepoint)
                braid = braid_of(bundle)
                val = float(Fraction(qm(braid)) / p)
            except (CollisionError, UnresolvedCrossingError):
                rejected += 1
                if per_sample is not None:
                    per_sample(k, i, None, None, None)
                continue
            vals.append(val)
            if per_sample is not None:
                per_sample(k, i, x, braid, val)
        arr = np.array(vals, dtype=float)
        m = float(arr.mean()) if arr.size else 0.0
        s = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        w = weights[k] if stratified else 1.0
        strata.append(StratumStat(in_count=k, weight=w, requested=alloc[k],
                                  accepted=int(arr.size), rejected=rejected,
                                  mean=m, std=s))
        total_rej += rejected
        mean_total += w * m
        if arr.size > 1:
            var_total += (w * s) ** 2 / arr.size

    if total_rej > _REJECTION_LIMIT * n_samples:
        raise RuntimeError(
            f"rejection rate {total_rej}/{n_samples} exceeds "
            f"{_REJECTION_LIMIT:.0%}: configurations collide too often"
        )
    return GGEstimate(map_id=f.describe(), p=p, n_samples=n_samples,
                      seed=seed, stream=stream, mean=mean_total,
                      stderr=math.sqrt(var_total), rejections=total_rej,
                      strata=tuple(strata))


@dataclass(frozen=True)
class TrendReport:
    estimates: tuple[GGEstimate, ...]
    diffs: tuple[float, ...]

    def to_dict(self):
        return {"estimates": [e.to_dict() for e in self.estimates],
                "diffs": list(self.diffs)}


def gamma_extrapolate(f: DiskMap, qm: QmSpec, p_list, n_samples: int,
                      seed: int) -> TrendReport:
    """Per-power estimates plus the successive-difference trend.

    The estimate at the largest power serves as the limit proxy; the trend
    |est(p') - est(p)| documents the convergence rate (O(1/p) for twist
    compositions, from the bounded move-in/out corrections).
    """
    ps = list(p_list)
    if not ps or any(q <= p for p, q in zip(ps, ps[1:])):
        raise ValueError("p_list must be nonempty and strictly increasing")
    ests = tuple(
        gamma_estimate(f, qm, p, n_samples, seed, stream=100 + idx)
        for idx, p in enumerate(ps)
    )
    diffs = tuple(abs(b.mean - a.mean) for a, b in zip(ests, ests[1:]))
    return TrendReport(estimates=ests, diffs=diffs)


@dataclass(frozen=True)
class ScalingReport:
    """Measured est(s_r(f)) / est(f) against the exact target r^-6."""

    r: float
    p: int
    n_samples: int
    seed: int
    est_f: GGEstimate
    est_shrunk: GGEstimate
    ratio: float
    target: float
    stderr_ratio: float
    status: str  # "pass" | "fail" | "uninformative"

    def to_dict(self):
        return {
            "r": self.r, "p": self.p, "n_samples": self.n_samples,
            "seed": self.seed, "est_f": self.est_f.to_dict(),
            "est_shrunk": self.est_shrunk.to_dict(), "ratio": self.ratio,
            "target": self.target, "stderr_ratio": self.stderr_ratio,
            "status": self.status,
        }


def scaling_check(f: DiskMap, qm: QmSpec, r: float, p: int, n_samples: int,
                  seed: int) -> ScalingReport:
    """Verify est(s_r(f)) = r^-6 est(f) within 3 combined standard errors.

    Requires a quasi-morphism vanishing on sigma_1 (checked); with a base
    estimate consistent with zero the report is flagged uninformative.
    """
    if qm(word([1])) != 0:
        raise ValueError("scaling law inapplicable: quasi-morphism does not "
                         "vanish on sigma_1")
    if r <= 1:
        raise ValueError("shrink factor must exceed 1")
    est_f = gamma_estimate(f, qm, p, n_samples, seed, stream=1)
    est_s = gamma_estimate(f.shrink(r), qm, p, n_samples, seed, stream=2)
    target = r**-6
    if abs(est_f.mean) <= 3 * est_f.stderr or est_f.mean == 0:
        return ScalingReport(r=r, p=p, n_samples=n_samples, seed=seed,
                             est_f=est_f, est_shrunk=est_s, ratio=math.nan,
                             target=target, stderr_ratio=math.nan,
                             status="uninformative")
    ratio = est_s.mean / est_f.mean
    var = (est_s.stderr / est_f.mean) ** 2 + (
        est_s.mean * est_f.stderr / est_f.mean**2
    ) ** 2
    stderr_ratio = math.sqrt(var)
    ok = abs(ratio - target) <= 3 * stderr_ratio
    return ScalingReport(r=r, p=p, n_samples=n_samples, seed=seed,
                         est_f=est_f, est_shrunk=est_s, ratio=ratio,
                         target=target, stderr_ratio=stderr_ratio,
                         status="pass" if ok else "fail")


@dataclass(frozen=True)
class AreaBoundReport:
    """Exact support-area distance bound between iterated shrinks.

    The support of s_r^m(f) has exactly r^{-2m} times the mass of supp f, so
    expressing the smaller-support map by conjugates of the larger-support
    one needs at least the area ratio many factors, giving
    d([s_r^m f], [s_r^n f]) >= (2 log r) |m - n|.
    """

    r: float
    m: int
    n: int
    bound: float
    mass_m: float
    mass_n: float
    mass_ratio: float

    def to_dict(self):
        return {"r": self.r, "m": self.m, "n": self.n, "bound": self.bound,
                "mass_m": self.mass_m, "mass_n": self.mass_n,
                "mass_ratio": self.mass_ratio}


def area_bound(f: TwistComposition, r: float, m: int, n: int) -> AreaBoundReport:
    if not isinstance(f, TwistComposition):
        raise TypeError("exact support areas are only known for twist compositions")
    if r <= 1:
        raise ValueError("shrink factor must exceed 1")
    mass0 = f.support_mass()
    return AreaBoundReport(
        r=r, m=m, n=n,
        bound=2.0 * math.log(r) * abs(m - n),
        mass_m=mass0 * r ** (-2 * m),
        mass_n=mass0 * r ** (-2 * n),
        mass_ratio=float(r) ** (2 * abs(m - n)),
    )


@dataclass(frozen=True)
class BoundCertificate:
    """Certified lower bound log m + log(|phi(g)| / (D + C_K)) for the
    distance from [g^m] to the reference classes [K].

    validity is "exact" when every input is proven (braid-level data), and
    "conditional-on-D" when D is an assumed defect bound for an averaged
    quasi-morphism.
    """

    target: str
    reference: str
    power: int
    phi_value: float
    defect: float
    c_k: float
    bound: float
    validity: str

    def recompute(self) -> float:
        return math.log(self.power) + math.log(
            abs(self.phi_value) / (self.defect + self.c_k)
        )

    def to_dict(self):
        return {"target": self.target, "reference": self.reference,
                "power": self.power, "phi_value": self.phi_value,
                "defect": self.defect, "c_k": self.c_k, "bound": self.bound,
                "validity": self.validity}


def bound_certificate(phi_val_g, defect, c_k, power: int, *,
                      assumed_defect: bool = False, target: str = "g^m",
                      reference: str = "K") -> BoundCertificate:
    if power < 1:
        raise ValueError("power must be >= 1")
    if phi_val_g == 0:
        raise ValueError("certificate needs a nonzero quasi-morphism value")
    if defect <= 0 or c_k < 0:
        raise ValueError("need defect > 0 and C_K >= 0")
    bound = math.log(power) + math.log(abs(float(phi_val_g)) /
                                       (float(defect) + float(c_k)))
    return BoundCertificate(
        target=target, reference=reference, power=power,
        phi_value=float(phi_val_g), defect=float(defect), c_k=float(c_k),
        bound=bound,
        validity="conditional-on-D" if assumed_defect else "exact",
    )


@dataclass(frozen=True)
class SequenceReport:
    """Bound structure for the shrinking sequence f_n = s_r^n(f).

    - area_bounds[m][n] is the exact lower bound (2 log r)|m - n|;
    - estimates[n] measures the averaged quasi-morphism on f_n, compared to
      the predicted decay r^{-6n} of the base value;
    - certificates give log m + log(|phi'(g)| / (D + sup_n |phi'(f_n)|)),
      conditional on the assumed defect D of the averaged quasi-morphism.
    Upper-bound transport along the shrinking homomorphism (pushing a
    conjugate factorization of s_r(f) through s_r^n) is recorded as a
    structural note; no factorization search is performed.
    """

    r: float
    map_id: str
    g_id: str
    n_max: int
    m_max: int
    assumed_defect: float
    config_digest: str
    area_bounds: tuple[tuple[float, ...], ...]
    estimates: tuple[GGEstimate, ...]
    predicted_abs: tuple[float, ...]
    consistent_3sigma: tuple[bool, ...]
    g_estimate: GGEstimate
    certificates: tuple[BoundCertificate, ...]
    notes: str

    def to_dict(self):
        return {
            "r": self.r, "map_id": self.map_id, "g_id": self.g_id,
            "n_max": self.n_max, "m_max": self.m_max,
            "assumed_defect": self.assumed_defect,
            "config_digest": self.config_digest,
            "area_bounds": [list(row) for row in self.area_bounds],
            "estimates": [e.to_dict() for e in self.estimates],
            "predicted_abs": list(self.predicted_abs),
            "consistent_3sigma": list(self.consistent_3sigma),
            "g_estimate": self.g_estimate.to_dict(),
            "certificates": [c.to_dict() for c in self.certificates],
            "notes": self.notes,
        }


_TRANSPORT_NOTE = (
    "upper-bound transport: a factorization of s_r(f) into conjugates of "
    "f^{+-1} pushes through the shrinking homomorphism to every level n "
    "by exact composition; no search for such factorizations is performed"
)


def sequence_experiment(f: DiskMap, g: DiskMap, r: float, n_max: int,
                        m_max: int, p: int, n_samples: int, seed: int,
                        assumed_defect: float, qm: QmSpec = PHI_B3,
                        out_dir: Path | str | None = None,
                        calabi_tol: float = 1e-9) -> SequenceReport:
    """Measure the shrinking sequence and emit its bound tables.

    Requires f in the Calabi kernel (|Cal f| <= calabi_tol) and an averaged
    value for g that is nonzero beyond 3 standard errors.  With out_dir set,
    per-level estimates are cached keyed by the configuration digest, so an
    interrupted run resumes without recomputation.
    """
    cal = f.calabi()
    if abs(cal) > calabi_tol:
        raise ValueError(f"base map is not in the Calabi kernel: Cal = {cal:g}")
    if assumed_defect <= 0:
        raise ValueError("assumed defect must be positive")
    digest = config_hash({
        "f": f.describe(), "g": g.describe(), "r": r, "n_max": n_max,
        "m_max": m_max, "p": p, "n_samples": n_samples, "seed": seed,
        "qm": qm.name,
    })

    def cached(tag: str, stream: int, fmap: DiskMap) -> GGEstimate:
        path = None
        if out_dir is not None:
            path = Path(out_dir) / f"seq_{digest}_{tag}.json"
            if path.exists():
                import json
                return GGEstimate.from_dict(json.loads(path.read_text()))
        est = gamma_estimate(fmap, qm, p, n_samples, seed, stream=stream)
        if path is not None:
            atomic_write_text(path, canonical_json(est.to_dict()))
        return est

    est_g = cached("g", 5, g)
    if abs(est_g.mean) <= 3 * est_g.stderr:
        raise RuntimeError(
            "averaged value of g is consistent with zero; "
            "the certificate table would be vacuous"
        )

    estimates = []
    fn = f
    for n in range(n_max + 1):
        estimates.append(cached(f"n{n}", 10 + n, fn))
        if n < n_max:
            fn = fn.shrink(r)

    area = tuple(
        tuple(2.0 * math.log(r) * abs(mm - nn) for nn in range(n_max + 1))
        for mm in range(n_max + 1)
    )
    base = abs(estimates[0].mean)
    predicted = tuple(base * r ** (-6 * n) for n in range(n_max + 1))
    consistent = tuple(
        abs(abs(e.mean) - pred) <= 3 * math.hypot(e.stderr, estimates[0].stderr * r ** (-6 * n))
        for n, (e, pred) in enumerate(zip(estimates, predicted))
    )
    c_k = max(abs(e.mean) for e in estimates)
    certs = tuple(
        bound_certificate(est_g.mean, assumed_defect, c_k, mm,
                          assumed_defect=True, target=f"g^{mm}",
                          reference="{f_n : n >= 0}")
        for mm in range(1, m_max + 1)
    )
    return SequenceReport(
        r=r, map_id=f.describe(), g_id=g.describe(), n_max=n_max,
        m_max=m_max, assumed_defect=assumed_defect, config_digest=digest,
        area_bounds=area, estimates=tuple(estimates),
        predicted_abs=predicted, consistent_3sigma=consistent,
        g_estimate=est_g, certificates=certs, notes=_TRANSPORT_NOTE,
    )


def iter_traced_samples(f: DiskMap, qm: QmSpec, p: int, n_samples: int,
                        seed: int):
    """Yield one record per unstratified sample: config, braid, lk, phi.

    Used by the trace front-end for braids.jsonl emission; rejected samples
    carry a "rejected" reason instead of braid data.
    """
    for i in range(n_samples):
        rng = np.random.default_rng([seed, 0, 0xFF, i])
        x = Config3(tuple(_sample_disk(rng) for _ in range(3)))
        rec = {"index": i,
               "config": [[z.real, z.imag] for z in x.points]}
        try:
            braid = braid_of(trace_loop(f, x, p))
            rec["braid"] = list(braid.letters)
            rec["lk"] = linking_numbers(braid)
            val = Fraction(qm(braid))
            rec["phi"] = {"num": val.numerator, "den": val.denominator}
        except (CollisionError, UnresolvedCrossingError) as e:
            rec["rejected"] = type(e).__name__
        yield rec
