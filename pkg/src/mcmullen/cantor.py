"""Model Cantor sets: the two-map interval IFS and its radial annulus version.

Interval endpoints are exact ``Fraction``s throughout; floats appear only in
attractor sampling.
"""
import cmath
import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import Exponents

# 2**22 intervals is about 4M Fraction pairs, already a few GB of Python objects
MAX_LEVEL = 22


@dataclass(frozen=True)
class CantorIFS:
    """g0(x) = (1 - x)/l reverses orientation, g1(x) = 1 + (x - 1)/m preserves it."""

    exp: Exponents

    def g0(self, x):
        return (1 - Fraction(x)) / self.exp.l

    def g1(self, x):
        return 1 + (Fraction(x) - 1) / self.exp.m

    def g0_inv(self, y):
        return 1 - self.exp.l * Fraction(y)

    def g1_inv(self, y):
        return 1 + self.exp.m * (Fraction(y) - 1)

    @property
    def gap(self):
        """The removed open interval (1/l, 1 - 1/m)."""
        return Fraction(1, self.exp.l), 1 - Fraction(1, self.exp.m)


@dataclass(frozen=True)
class IntervalUnion:
    intervals: tuple

    def __post_init__(self):
        iv = tuple((Fraction(a), Fraction(b)) for a, b in self.intervals)
        for a, b in iv:
            if a > b:
                raise ValueError(f"empty interval [{a}, {b}]")
        for (_, b), (c, _) in zip(iv, iv[1:]):
            if not b < c:
                raise ValueError("intervals must be sorted and pairwise disjoint")
        object.__setattr__(self, "intervals", iv)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def contains(self, x) -> bool:
        x = Fraction(x)
        k = self._slot(x)
        return k < len(self.intervals) and self.intervals[k][0] <= x

    def covers(self, other: "IntervalUnion") -> bool:
        """Every interval of other sits inside one interval of self."""
        return all(self.contains(c) and self.contains(d) and self._slot(c) == self._slot(d)
                   for c, d in other.intervals)

    def _slot(self, x):
        # index of the first interval whose right end is >= x
        lo, hi = 0, len(self.intervals)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.intervals[mid][1] < x:
                lo = mid + 1
            else:
                hi = mid
        return lo


def level_set(ifs: CantorIFS, n: int) -> IntervalUnion:
    """I_n: the union of all n-fold compositions of g0, g1 applied to [0, 1]."""
    if n < 0:
        raise ValueError("level must be >= 0")
    if n > MAX_LEVEL:
        raise MemoryError(f"level {n} exceeds the limit of {MAX_LEVEL} (2**{MAX_LEVEL} intervals)")
    cur = [(Fraction(0), Fraction(1))]
    for _ in range(n):
        left = [(ifs.g0(b), ifs.g0(a)) for a, b in reversed(cur)]
        right = [(ifs.g1(a), ifs.g1(b)) for a, b in cur]
        cur = left + right
    return IntervalUnion(tuple(cur))


def member(ifs: CantorIFS, x, n: int) -> bool:
    """Exact test of x in I_n by pulling x back through the branch containing it."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    lo, hi = ifs.gap
    for _ in range(n):
        if x <= lo:
            x = ifs.g0_inv(x)
        elif x >= hi:
            x = ifs.g1_inv(x)
        else:
            return False
    return True


def total_length(ifs: CantorIFS, n: int) -> Fraction:
    if n < 0:
        raise ValueError("level must be >= 0")
    return (Fraction(1, ifs.exp.l) + Fraction(1, ifs.exp.m)) ** n


def hausdorff_distance(a: IntervalUnion, b: IntervalUnion) -> Fraction:
    """Exact Hausdorff distance between two finite unions of closed intervals."""

    def one_sided(src, dst):
        # farthest point of src from dst lies at an endpoint of src or at a
        # midpoint of a gap of dst inside src
        cand = [p for iv in src for p in iv]
        gaps = [(dst.intervals[k][1], dst.intervals[k + 1][0]) for k in range(len(dst) - 1)]
        for g0, g1 in gaps:
            mid = (g0 + g1) / 2
            if src.contains(mid):
                cand.append(mid)
        return max(_dist_to(dst, p) for p in cand)

    return max(one_sided(a, b), one_sided(b, a))


def _dist_to(u: IntervalUnion, x):
    k = u._slot(x)
    best = None
    for j in (k - 1, k):
        if 0 <= j < len(u):
            a, b = u.intervals[j]
            d = Fraction(0) if a <= x <= b else min(abs(x - a), abs(x - b))
            best = d if best is None else min(best, d)
    return best


def write_levels_csv(ifs: CantorIFS, levels, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["level", "index", "a_num", "a_den", "b_num", "b_den"])
    for n in levels:
        for k, (a, b) in enumerate(level_set(ifs, n)):
            w.writerow([n, k, a.numerator, a.denominator, b.numerator, b.denominator])


@dataclass(frozen=True)
class AnnulusModel:
    """Radial IFS on [r0, 1]: g0(r) = (1 - r)/l + r0, g1(r) = 1 - (1 - r)/m."""

    exp: Exponents
    r0: Fraction = Fraction(1, 2)

    def __post_init__(self):
        r0 = Fraction(self.r0).limit_denominator(10 ** 12) if isinstance(self.r0, float) else Fraction(self.r0)
        if not 0 < r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        object.__setattr__(self, "r0", r0)

    @property
    def r1(self) -> Fraction:
        return self.r0 + (1 - self.r0) / self.exp.l

    @property
    def r2(self) -> Fraction:
        return 1 - (1 - self.r0) / self.exp.m

    def g0(self, r):
        return (1 - r) / self.exp.l + self.r0

    def g1(self, r):
        return 1 - (1 - r) / self.exp.m

    def g0_inv(self, r):
        return 1 - self.exp.l * (r - self.r0)

    def g1_inv(self, r):
        return 1 - self.exp.m * (1 - r)

    def radial_level(self, n: int) -> IntervalUnion:
        """The level-n radial set inside [r0, 1]."""
        if n < 0:
            raise ValueError("level must be >= 0")
        if n > MAX_LEVEL:
            raise MemoryError(f"level {n} exceeds the limit of {MAX_LEVEL}")
        cur = [(self.r0, Fraction(1))]
        for _ in range(n):
            left = [(self.g0(b), self.g0(a)) for a, b in reversed(cur)]
            right = [(self.g1(a), self.g1(b)) for a, b in cur]
            cur = left + right
        return IntervalUnion(tuple(cur))


class MiddleAnnulusError(ValueError):
    pass


def annulus_map(model: AnnulusModel, z, tol: float = 1e-12) -> complex:
    """Covering of A = {r0 <= |w| <= 1} by A0 (degree l, reversing) and A1 (degree m)."""
    z = complex(z)
    r, t = abs(z), cmath.phase(z)
    r0, r1, r2 = float(model.r0), float(model.r1), float(model.r2)
    l, m = model.exp.l, model.exp.m
    if r0 - tol <= r <= r1 + tol:
        rho = 1 - l * (r - r0)
        return rho * cmath.exp(-1j * l * t)
    if r2 - tol <= r <= 1 + tol:
        if r == 1:
            return z ** m
        rho = 1 - m * (1 - r)
        return rho * cmath.exp(1j * m * t)
    if r1 < r < r2:
        raise MiddleAnnulusError("middle annulus: use the surgery module")
    raise ValueError(f"|z| = {r} lies outside the annulus [{r0}, 1]")


def attractor_sample(model: AnnulusModel, depth: int, count: int, seed: int = 0) -> np.ndarray:
    """Points of the level-depth approximation to the attractor of the inverse branches.

    Each point starts on the unit circle at a random angle and is pulled back
    depth times through a randomly chosen branch.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    l, m = model.exp.l, model.exp.m
    r0 = float(model.r0)
    r = rng.uniform(r0, 1.0, count)
    t = rng.uniform(0, 2 * math.pi, count)
    branch = rng.integers(0, 2, (depth, count))
    for k in range(depth):
        b0 = branch[k] == 0
        # inverse of A0: modulus g0(rho), argument -(t + 2 pi j)/l
        j0 = rng.integers(0, l, count)
        j1 = rng.integers(0, m, count)
        r_new = np.where(b0, (1 - r) / l + r0, 1 - (1 - r) / m)
        t_new = np.where(b0, -(t + 2 * math.pi * j0) / l, (t + 2 * math.pi * j1) / m)
        r, t = r_new, t_new
    return r * np.exp(1j * t)
