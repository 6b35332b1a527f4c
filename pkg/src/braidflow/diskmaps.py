"""Area-preserving self-maps of the unit disk and their Calabi values.

Two representations are supported: exact closed-form compositions of radial
twists (the default for every statistical experiment; no ODE error anywhere),
and time-dependent Hamiltonian flows integrated with fixed-step RK4.

Conventions, fixed once:
  - area form Omega = (1/pi) dx ^ dy, so the unit disk has mass 1 and a
    concentric ball of radius R has mass R^2;
  - Hamiltonian vector field X = pi * (dH/dy, -dH/dx), i.e. as a complex
    velocity v = -i pi grad H, so positive radial profiles rotate
    counterclockwise;
  - Cal(f) = int_0^1 int_{D^2} H_t Omega dt for a generating Hamiltonian
    vanishing near the boundary; additive under composition of generating
    paths and invariant under time reparametrization.

Under the shrinking conjugation s_r (by z -> z/r, supported in the ball of
radius 1/r) a generating Hamiltonian transforms as H -> H(r .)/r^2, so
Cal(s_r f) = r^{-4} Cal(f) under these conventions; the test suite pins this
against a 2-D quadrature oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad

DISK_RADIUS = 1.0
CALABI_TOL = 1e-9


class MapFormatError(ValueError):
    """Malformed map description."""


def disk_mass(radius: float) -> float:
    """Omega-mass of a ball of the given radius (anywhere inside the disk)."""
    return radius * radius


@dataclass(frozen=True)
class RadialTwist:
    """Rotation about a center with a radius-dependent angle profile.

    profile kinds:
      - "bump":    theta(rho) = amplitude * (1 - (rho/R)^2)^exponent
      - "plateau": theta = amplitude for rho <= plateau_radius, polynomial
                   taper of the same exponent down to 0 at R
      - "rigid":   theta = amplitude on the whole ball (the time-1 map is a
                   diffeomorphism only for amplitude in 2 pi Z; used as an
                   exactly analyzable tracing gadget)

    The time-1 map (rho, alpha) -> (rho, alpha + theta(rho)) is exactly
    area-preserving and is the identity for rho >= R.
    """

    center: complex
    radius: float
    amplitude: float
    exponent: int = 2
    profile: str = "bump"
    plateau_radius: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("twist radius must be positive")
        if abs(self.center) + self.radius >= DISK_RADIUS:
            raise ValueError("twist support must lie in the open unit disk")
        if self.profile not in ("bump", "plateau", "rigid"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.profile == "plateau" and not 0 < self.plateau_radius < self.radius:
            raise ValueError("plateau_radius must lie strictly inside radius")

    def angle(self, rho):
        """theta(rho), vectorized."""
        rho = np.asarray(rho, dtype=float)
        if self.profile == "rigid":
            return np.where(rho < self.radius, self.amplitude, 0.0)
        if self.profile == "bump":
            u = np.clip(rho / self.radius, 0.0, 1.0)
            return self.amplitude * (1.0 - u * u) ** self.exponent
        inner, outer = self.plateau_radius, self.radius
        u = np.clip((rho - inner) / (outer - inner), 0.0, 1.0)
        return self.amplitude * (1.0 - u * u) ** self.exponent

    def calabi(self) -> float:
        """Cal of the time-1 twist: (1/pi) int_0^R theta(s) s^3 ds."""
        if self.profile == "bump":
            k = self.exponent
            return self.amplitude * self.radius**4 / (2 * math.pi * (k + 1) * (k + 2))
        if self.profile == "rigid":
            return self.amplitude * self.radius**4 / (4 * math.pi)
        val, _ = quad(lambda s: self.angle(s) * s**3, 0.0, self.radius,
                      limit=200, epsabs=1e-14, epsrel=1e-13)
        return val / math.pi

    def hamiltonian_value(self, rho):
        """Generating autonomous Hamiltonian h(rho) = (1/pi) int_rho^R theta s ds."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.zeros_like(rho)
        for i, r0 in enumerate(rho):
            if r0 < self.radius:
                v, _ = quad(lambda s: self.angle(s) * s, r0, self.radius,
                            limit=200, epsabs=1e-14)
                out[i] = v / math.pi
        return out

    def scaled(self, factor: float) -> "RadialTwist":
        """The twist conjugated by z -> z * factor (factor < 1 shrinks)."""
        return replace(self, center=self.center * factor,
                       radius=self.radius * factor,
                       plateau_radius=self.plateau_radius * factor)


@dataclass(frozen=True)
class Ball:
    center: complex
    radius: float

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def mass(self) -> float:
        return disk_mass(self.radius)


class DiskMap:
    """Common interface: exact twist compositions and Hamiltonian flows."""

    def apply(self, z):
        raise NotImplementedError

    def calabi(self) -> float:
        raise NotImplementedError

    def shrink(self, r: float) -> "DiskMap":
        raise NotImplementedError

    def support_ball(self) -> Ball:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def flow_pieces(self, p: int) -> int:
        """Number of smooth pieces in the generating path of self^p."""
        raise NotImplementedError

    def piece_positions(self, z, piece: int, s):
        """Positions along smooth piece `piece` at local times s in [0, 1].

        z is the strand configuration at the start of that piece; returns an
        array of shape (len(s), len(z)).
        """
        raise NotImplementedError

    def piece_end(self, z, piece: int):
        """Configuration at the end of the given piece (exact composition)."""
        return self.piece_positions(z, piece, np.array([1.0]))[-1]


class TwistComposition(DiskMap):
    """Ordered composition of radial twists with integer exponents.

    entries are (twist, power) pairs applied first-to-last; everything about
    the map (application, Calabi, shrinking, support areas) is closed-form.
    """

    def __init__(self, entries):
        norm = []
        for e in entries:
            if isinstance(e, RadialTwist):
                norm.append((e, 1))
            else:
                t, k = e
                norm.append((t, int(k)))
        self.entries: tuple[tuple[RadialTwist, int], ...] = tuple(norm)

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        for twist, power in self.entries:
            rel = z - twist.center
            theta = power * twist.angle(np.abs(rel))
            z = twist.center + rel * np.exp(1j * theta)
        return z

    def inverse(self) -> "TwistComposition":
        return TwistComposition([(t, -k) for t, k in reversed(self.entries)])

    def __mul__(self, other: "TwistComposition") -> "TwistComposition":
        """Composition: (self * other) applies other first, then self."""
        return TwistComposition(list(other.entries) + list(self.entries))

    def calabi(self) -> float:
        return sum(power * twist.calabi() for twist, power in self.entries)

    def shrink(self, r: float) -> "TwistComposition":
        if r <= 1:
            raise ValueError("shrink requires r > 1")
        return TwistComposition([(t.scaled(1.0 / r), k) for t, k in self.entries])

    def support_ball(self) -> Ball:
        disks = [(t.center, t.radius) for t, k in self.entries if k != 0]
        if not disks:
            return Ball(0j, 0.0)
        best = None
        for c1, r1 in disks:
            for c2, r2 in disks:
                dist = abs(c1 - c2)
                rad = (dist + r1 + r2) / 2.0
                if rad < max(r1, r2):
                    continue
                if dist > 0:
                    center = c1 + (c2 - c1) * ((rad - r1) / dist)
                else:
                    center, rad = c1, max(r1, r2)
                if all(abs(c - center) + r <= rad + 1e-12 for c, r in disks):
                    if best is None or rad < best.radius:
                        best = Ball(center, rad)
        if best is None:
            center = sum(c for c, _ in disks) / len(disks)
            rad = max(abs(c - center) + r for c, r in disks)
            best = Ball(center, rad)
        return best

    def support_mass(self) -> float:
        """Exact Omega-mass of the union of twist supports.

        Requires the supports to be pairwise disjoint or exactly concentric
        (the cases where the union area is elementary); raises otherwise.
        """
        disks = [(t.center, t.radius) for t, k in self.entries if k != 0]
        kept: list[tuple[complex, float]] = []
        for c, r in disks:
            absorbed = False
            for i, (c2, r2) in enumerate(kept):
                d = abs(c - c2)
                if d + r <= r2 + 1e-15:
                    absorbed = True
                    break
                if d + r2 <= r + 1e-15:
                    kept[i] = (c, r)
                    absorbed = True
                    break
                if d < r + r2:
                    raise ValueError("supports overlap; union area is not elementary")
            if not absorbed:
                kept.append((c, r))
        return sum(disk_mass(r) for _, r in kept)

    def flow_pieces(self, p: int) -> int:
        return max(1, len(self.entries)) * p

    def piece_positions(self, z, piece: int, s):
        z = np.asarray(z, dtype=complex)
        s = np.asarray(s, dtype=float)
        if not self.entries:
            return np.broadcast_to(z, (len(s), len(z))).copy()
        twist, power = self.entries[piece % len(self.entries)]
        rel = z - twist.center
        theta = power * twist.angle(np.abs(rel))
        return twist.center + rel[None, :] * np.exp(1j * np.outer(s, theta))

    def max_turns_per_piece(self) -> float:
        """Largest rotation count any point makes within one piece."""
        if not self.entries:
            return 0.0
        return max(abs(k * t.amplitude) / (2 * math.pi) for t, k in self.entries)

    def describe(self) -> str:
        parts = []
        for t, k in self.entries:
            parts.append(
                f"twist({t.center.real:.6g},{t.center.imag:.6g};R={t.radius:.6g};"
                f"a={t.amplitude:.9g};k={t.exponent};{t.profile}"
                + (f";R0={t.plateau_radius:.6g}" if t.profile == "plateau" else "")
                + (f")^{k}" if k != 1 else ")")
            )
        return "id" if not parts else " ".join(parts)


def identity_map() -> TwistComposition:
    return TwistComposition([])


class HamiltonianFlow(DiskMap):
    """Time-1 map of a (possibly time-dependent) Hamiltonian, RK4-integrated.

    value(t, z) and gradient(t, z) must be vectorized over complex z, with the
    gradient returned as dH/dx + i dH/dy; both must vanish for |z - center| >=
    radius.  The map is area-preserving up to the integrator error, which the
    tests bound by finite-difference Jacobians.
    """

    def __init__(self, value: Callable, gradient: Callable, ball: Ball,
                 n_steps: int = 256, name: str = "hamiltonian"):
        self.value = value
        self.gradient = gradient
        self.ball = ball
        self.n_steps = int(n_steps)
        self.name = name

    def velocity(self, t: float, z):
        return -1j * math.pi * self.gradient(t, z)

    def _rk4(self, z, t0: float, t1: float, steps: int):
        h = (t1 - t0) / steps
        t = t0
        for _ in range(steps):
            k1 = self.velocity(t, z)
            k2 = self.velocity(t + h / 2, z + h / 2 * k1)
            k3 = self.velocity(t + h / 2, z + h / 2 * k2)
            k4 = self.velocity(t + h, z + h * k3)
            z = z + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        if not np.all(np.isfinite(z)):
            raise FloatingPointError("flow integration blew up")
        return z

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        return self._rk4(z, 0.0, 1.0, self.n_steps)

    def calabi(self) -> float:
        """Quadrature of int_0^1 int H_t Omega dt over the support ball.

        Gauss-Legendre in time and radius, trapezoid in angle (spectrally
        accurate for periodic integrands); deterministic.
        """
        nt, nr, na = 24, 48, 64
        tg, tw = np.polynomial.legendre.leggauss(nt)
        tg = 0.5 * (tg + 1.0)
        tw = 0.5 * tw
        rg, rw = np.polynomial.legendre.leggauss(nr)
        rg = 0.5 * self.ball.radius * (rg + 1.0)
        rw = 0.5 * self.ball.radius * rw
        ang = 2 * math.pi * np.arange(na) / na
        zs = (self.ball.center + rg[:, None] * np.exp(1j * ang)[None, :]).ravel()
        total = 0.0
        for t, wt in zip(tg, tw):
            vals = self.value(t, zs).reshape(nr, na)
            radial = vals.mean(axis=1) * rg * 2 * math.pi
            total += wt * float(np.dot(rw, radial))
        return total / math.pi

    def shrink(self, r: float) -> "HamiltonianFlow":
        if r <= 1:
            raise ValueError("shrink requires r > 1")
        value, gradient = self.value, self.gradient
        return HamiltonianFlow(
            value=lambda t, z: value(t, z * r) / (r * r),
            gradient=lambda t, z: gradient(t, z * r) / r,
            ball=Ball(self.ball.center / r, self.ball.radius / r),
            n_steps=self.n_steps,
            name=f"shrink({self.name},{r:g})",
        )

    def support_ball(self) -> Ball:
        return self.ball

    def flow_pieces(self, p: int) -> int:
        return p

    def piece_positions(self, z, piece: int, s):
        z = np.asarray(z, dtype=complex)
        s = np.asarray(s, dtype=float)
        out = np.empty((len(s), len(z)), dtype=complex)
        order = np.argsort(s)
        cur, t_cur = z.copy(), 0.0
        for idx in order:
            t_next = float(s[idx])
            if t_next > t_cur:
                steps = max(1, int(math.ceil((t_next - t_cur) * self.n_steps)))
                cur = self._rk4(cur, t_cur, t_next, steps)
                t_cur = t_next
            out[idx] = cur
        return out

    def max_turns_per_piece(self) -> float:
        # coarse bound on angular speed from the gradient scale; refined by
        # the extraction's own stabilization loop
        return 4.0

    def describe(self) -> str:
        return f"{self.name}(ball={self.ball.center:.6g},{self.ball.radius:.6g})"


def twist_flow(twist: RadialTwist, n_steps: int = 256) -> HamiltonianFlow:
    """The same twist as a Hamiltonian flow (for cross-checking integrators).

    For a bump profile the generating Hamiltonian has the closed form
    h(rho) = a R^2 / (2 pi (k+1)) * (1 - (rho/R)^2)^{k+1}.
    """
    if twist.profile != "bump":
        raise ValueError("twist_flow supports bump profiles")
    a, R, k, c = twist.amplitude, twist.radius, twist.exponent, twist.center

    def value(t, z):
        rel = np.abs(np.asarray(z, dtype=complex) - c)
        u = np.clip(rel / R, 0.0, 1.0)
        return a * R * R / (2 * math.pi * (k + 1)) * (1 - u * u) ** (k + 1)

    def gradient(t, z):
        z = np.asarray(z, dtype=complex)
        rel = z - c
        rho = np.abs(rel)
        theta = twist.angle(rho)
        out = np.zeros_like(z)
        mask = rho > 0
        out[mask] = -theta[mask] * rel[mask] / math.pi
        return out

    return HamiltonianFlow(value, gradient, Ball(c, R), n_steps=n_steps,
                           name="twist_flow")


def moving_bump_flow(start: complex, end: complex, radius: float,
                     amplitude: float, exponent: int = 3,
                     n_steps: int = 256) -> HamiltonianFlow:
    """Time-dependent built-in: a bump Hamiltonian whose center travels from
    start to end; generates a genuinely non-twist area-preserving map."""
    path_rad = radius + max(abs(start), abs(end))
    if path_rad >= DISK_RADIUS:
        raise ValueError("moving bump leaves the disk")

    def center(t):
        return start + (end - start) * t

    def value(t, z):
        rel = np.abs(np.asarray(z, dtype=complex) - center(t))
        u = np.clip(rel / radius, 0.0, 1.0)
        return amplitude * (1 - u * u) ** exponent

    def gradient(t, z):
        z = np.asarray(z, dtype=complex)
        rel = z - center(t)
        rho = np.abs(rel)
        u = np.clip(rho / radius, 0.0, 1.0)
        mag = -2 * amplitude * exponent * u * (1 - u * u) ** (exponent - 1) / radius
        out = np.zeros_like(z)
        mask = (rho > 0) & (rho < radius)
        out[mask] = mag[mask] * rel[mask] / rho[mask]
        return out

    ctr = (start + end) / 2
    rad = abs(end - start) / 2 + radius
    return HamiltonianFlow(value, gradient, Ball(ctr, rad), n_steps=n_steps,
                           name="moving_bump")


def time_reparametrized(flow: HamiltonianFlow, warp, warp_rate) -> HamiltonianFlow:
    """The same time-1 map traversed at a different speed.

    warp must be a monotone bijection of [0, 1] with derivative warp_rate;
    the generating Hamiltonian becomes warp_rate(t) * H(warp(t), .), which
    changes neither the Calabi value nor any traced braid.
    """
    value, gradient = flow.value, flow.gradient
    return HamiltonianFlow(
        value=lambda t, z: warp_rate(t) * value(warp(t), z),
        gradient=lambda t, z: warp_rate(t) * gradient(warp(t), z),
        ball=flow.ball,
        n_steps=flow.n_steps,
        name=f"reparam({flow.name})",
    )


def make_kercal_map(t1: RadialTwist, t2: RadialTwist) -> TwistComposition:
    """Compose t1 with a re-amplituded t2 so the total Calabi value is zero.

    Calabi is linear in the profile amplitude, so the compensating amplitude
    is solved exactly; supports must be disjoint.
    """
    gap = abs(t1.center - t2.center) - (t1.radius + t2.radius)
    if gap <= 0:
        raise ValueError("twist supports overlap; cannot build the pair")
    unit = replace(t2, amplitude=1.0)
    denom = unit.calabi()
    if denom == 0:
        raise ZeroDivisionError("degenerate second twist")
    a2 = -t1.calabi() / denom
    pair = TwistComposition([(t1, 1), (replace(t2, amplitude=a2), 1)])
    if abs(pair.calabi()) > CALABI_TOL:
        raise ArithmeticError("Calabi cancellation failed")
    return pair


def kercal_plateau_pair(turns1: int = -1, turns2: int = 16,
                        center1: complex = 0.30 + 0.40j,
                        center2: complex = -0.30 + 0.40j,
                        radius1: float = 0.36, plateau1: float = 0.33,
                        radius2: float = 0.175,
                        exponent: int = 2) -> TwistComposition:
    """A Calabi-kernel pair of plateau twists with integer-turn plateaus.

    Integer plateau turns make the braids of plateau-borne configurations
    exact full-twist powers (constant quasi-morphism values), which keeps the
    Monte Carlo variance low; the second plateau radius is solved by 1-D root
    finding so the pair lands in the Calabi kernel without leaving the
    integer-turn family.  The defaults pair a wide slow twist with a small
    fast counter-twist: matching Calabi weights (amplitude times radius^4)
    while keeping the averaged quasi-morphism weights (amplitude times
    radius^6) far apart is what leaves a clearly nonzero averaged value.
    """
    from scipy.optimize import brentq

    if turns1 * turns2 >= 0:
        raise ValueError("plateau turn counts must have opposite signs")
    t1 = RadialTwist(center=center1, radius=radius1,
                     amplitude=2 * math.pi * turns1, exponent=exponent,
                     profile="plateau", plateau_radius=plateau1)
    target = -t1.calabi()

    def residual(r0: float) -> float:
        t = RadialTwist(center=center2, radius=radius2,
                        amplitude=2 * math.pi * turns2, exponent=exponent,
                        profile="plateau", plateau_radius=r0)
        return t.calabi() - target

    lo, hi = 1e-4 * radius2, (1 - 1e-9) * radius2
    if residual(lo) * residual(hi) > 0:
        raise ValueError("second twist cannot absorb the Calabi value; "
                         "increase its radius or turn count")
    r0 = brentq(residual, lo, hi, xtol=1e-15, rtol=1e-15)
    t2 = RadialTwist(center=center2, radius=radius2,
                     amplitude=2 * math.pi * turns2, exponent=exponent,
                     profile="plateau", plateau_radius=r0)
    pair = TwistComposition([(t1, 1), (t2, 1)])
    if abs(pair.calabi()) > CALABI_TOL:
        raise ArithmeticError("Calabi cancellation failed")
    if abs(center1 - center2) <= t1.radius + t2.radius:
        raise ValueError("twist supports overlap")
    return pair
