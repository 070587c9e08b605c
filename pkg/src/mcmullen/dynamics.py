"""Arithmetic of the McMullen family f(z) = z**m + lam / z**l.

The point at infinity is represented by ``INF`` (``complex(inf, 0)``); any
non-finite complex number is treated as infinity on input.
"""
import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

INF = complex(math.inf, 0.0)

# cycle-detection tolerance ladder
WINDOW_TOL = 1e-8
POLISH_TOL = 1e-12
SUPERATTRACTING_TOL = 1e-6
INDIFFERENT_TOL = 1e-6


def is_infinite(z) -> bool:
    return not cmath.isfinite(z)


@dataclass(frozen=True)
class Exponents:
    l: int
    m: int

    def __post_init__(self):
        if int(self.l) != self.l or int(self.m) != self.m:
            raise ValueError("exponents must be integers")
        if self.l < 2 or self.m < 2:
            raise ValueError(f"exponents must be >= 2, got l={self.l}, m={self.m}")
        if self.l * self.m <= self.l + self.m:
            raise ValueError(f"need 1/l + 1/m < 1, got l={self.l}, m={self.m}")

    @property
    def degree(self) -> int:
        return self.l + self.m


@dataclass(frozen=True)
class MapParams:
    """A member of the family together with its derived constants."""

    lam: complex
    exp: Exponents
    degree: int = field(init=False)
    crit_radius: float = field(init=False)
    escape_radius: float = field(init=False)

    def __post_init__(self):
        lam = complex(self.lam)
        if lam == 0 or not cmath.isfinite(lam):
            raise ValueError("lambda must be a finite nonzero complex number")
        l, m = self.exp.l, self.exp.m
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "degree", l + m)
        object.__setattr__(self, "crit_radius", (abs(lam) * l / m) ** (1.0 / (l + m)))
        object.__setattr__(self, "escape_radius", escape_radius_for(lam, m))

    @classmethod
    def of(cls, lam, l=3, m=3) -> "MapParams":
        return cls(complex(lam), Exponents(l, m))

    @property
    def l(self) -> int:
        return self.exp.l

    @property
    def m(self) -> int:
        return self.exp.m


def escape_radius_for(lam, m) -> float:
    return max(1.0, (2.0 + abs(lam)) ** (1.0 / (m - 1)))


def escape_radius(fmap: MapParams) -> float:
    """Radius R with |z| >= R implying |f(z)| >= 2|z|."""
    return fmap.escape_radius


def evaluate(fmap: MapParams, z):
    """f(z) on the extended plane; 0 and infinity both map to infinity.

    Accepts a scalar or an array; arrays are evaluated elementwise.
    """
    arr = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        w = arr ** fmap.m + fmap.lam / arr ** fmap.l
    pole = (arr == 0) | ~np.isfinite(arr)
    w = np.where(pole | ~np.isfinite(w), INF, w)
    if w.ndim == 0:
        return complex(w)
    return w


def derivative(fmap: MapParams, z):
    arr = np.asarray(z, dtype=complex)
    if np.any((arr == 0) | ~np.isfinite(arr)):
        raise ValueError("derivative undefined at pole")
    l, m = fmap.l, fmap.m
    d = m * arr ** (m - 1) - l * fmap.lam / arr ** (l + 1)
    if d.ndim == 0:
        return complex(d)
    return d


def critical_points(fmap: MapParams) -> list:
    """The l+m free critical points; index 0 is the principal root."""
    n = fmap.degree
    w0 = cmath.exp(cmath.log(fmap.lam * fmap.l / fmap.m) / n)
    return [w0 * cmath.exp(2j * math.pi * j / n) for j in range(n)]


def critical_values(fmap: MapParams) -> list:
    return [evaluate(fmap, w) for w in critical_points(fmap)]


@dataclass(frozen=True)
class OrbitTrace:
    points: np.ndarray
    escape_index: Optional[int]
    hit_pole: bool

    @property
    def bounded(self) -> bool:
        return self.escape_index is None and not self.hit_pole


def iterate(fmap: MapParams, z0, max_iter: int) -> OrbitTrace:
    """Orbit of z0, stopped at escape, at an exact hit of the pole, or after max_iter steps."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    radius = fmap.escape_radius
    lam, l, m = fmap.lam, fmap.l, fmap.m
    z = complex(z0)
    points = [z]
    for k in range(max_iter + 1):
        if not (abs(z) <= radius):
            return OrbitTrace(np.array(points), k, False)
        if k == max_iter:
            break
        if z == 0:
            return OrbitTrace(np.array(points), None, True)
        try:
            z = z ** m + lam / z ** l
        except OverflowError:
            z = INF
        points.append(z)
    return OrbitTrace(np.array(points), None, False)


class CycleKind(enum.Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    INDIFFERENT = "indifferent"
    REPELLING = "repelling"

    @classmethod
    def from_multiplier(cls, mult) -> "CycleKind":
        a = abs(mult)
        if a < SUPERATTRACTING_TOL:
            return cls.SUPERATTRACTING
        if a < 1.0 - INDIFFERENT_TOL:
            return cls.ATTRACTING
        if a <= 1.0 + INDIFFERENT_TOL:
            return cls.INDIFFERENT
        return cls.REPELLING


@dataclass(frozen=True)
class CycleReport:
    period: int
    representative: complex
    multiplier: complex
    kind: CycleKind

    @property
    def attracting(self) -> bool:
        return self.kind in (CycleKind.SUPERATTRACTING, CycleKind.ATTRACTING)


def _polish(fmap, z, period, tol, max_steps=60):
    # Newton on f^p(z) - z
    for _ in range(max_steps):
        w, dw = z, 1.0 + 0j
        for _ in range(period):
            dw *= derivative(fmap, w)
            w = evaluate(fmap, w)
        if is_infinite(w):
            return None
        step = (w - z) / (dw - 1.0)
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    return None


def find_cycle(fmap: MapParams, seed: OrbitTrace, max_period: int = 64,
               tol: float = WINDOW_TOL) -> Optional[CycleReport]:
    """Detect eventual periodicity of a bounded orbit and polish the cycle.

    Returns None when no period <= max_period is visible in the tail, or when
    Newton polishing of f^p(z) = z does not converge (logged).
    """
    if not seed.bounded:
        raise ValueError("seed orbit is not bounded; cycle search needs a non-escaping orbit")
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    pts = seed.points
    period = None
    for p in range(1, min(max_period, len(pts) - 1) + 1):
        window = min(max(2 * p, 8), len(pts) - p)
        tail = pts[-(p + window):]
        scale = max(1.0, float(np.max(np.abs(tail))))
        if np.all(np.abs(tail[p:] - tail[:-p]) < tol * scale):
            period = p
            break
    if period is None:
        return None
    p = period
    z = _polish(fmap, complex(pts[-1]), p, POLISH_TOL)
    if z is None:
        log.warning("cycle polishing did not converge (period %d)", p)
        return None
    mult = 1.0 + 0j
    w = z
    for _ in range(p):
        mult *= derivative(fmap, w)
        w = evaluate(fmap, w)
    if abs(w - z) > 1e-9 * max(1.0, abs(z)):
        log.warning("polished point is not periodic to tolerance (period %d)", p)
        return None
    return CycleReport(p, z, mult, CycleKind.from_multiplier(mult))


@dataclass(frozen=True)
class RealLevels:
    p: float
    q: float


def real_levels(fmap: MapParams) -> RealLevels:
    """The levels 0 < p < q on the positive axis with f(p) = f(q) = q.

    q is the largest positive fixed point; p is the preimage of q below the
    critical radius. Only defined for real lam > 0 and l == m.
    """
    lam = fmap.lam
    if lam.imag != 0 or lam.real <= 0:
        raise ValueError("real levels need a real positive lambda")
    if fmap.l != fmap.m:
        raise ValueError("real levels are only implemented for l == m")
    lam = lam.real
    l, m = fmap.l, fmap.m
    c = fmap.crit_radius
    radius = fmap.escape_radius

    def f(x):
        return x ** m + lam / x ** l

    def h(x):
        return f(x) - x

    def dh(x):
        return m * x ** (m - 1) - l * lam / x ** (l + 1) - 1.0

    # h is convex on (0, inf); its minimum on [c, R] sits where f' = 1
    x_min = brentq(dh, c, radius, xtol=1e-15)
    if h(x_min) >= 0:
        raise ValueError("real levels absent")
    q = brentq(h, x_min, radius, xtol=1e-15)
    for _ in range(3):
        d = dh(q)
        if d == 0:
            break
        q -= h(q) / d
    lo = c
    while f(lo) <= q:
        lo /= 2.0
    p = brentq(lambda x: f(x) - q, lo, c, xtol=1e-15)
    for _ in range(3):
        d = m * p ** (m - 1) - l * lam / p ** (l + 1)
        if d == 0:
            break
        p -= (f(p) - q) / d
    return RealLevels(p, q)
