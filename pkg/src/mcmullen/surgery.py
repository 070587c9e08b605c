"""Quasiregular model map of degree l + m assembled from five radial regions.

    |z| <= r0          F = r0**l / z**l
    r0 <= |z| <= r1    F = (1 - l (r - r0)) e^{-ilt}            (inner Cantor annulus)
    r1 <  |z| <  r2    cell complex, onto the closed disk of radius r0
    r2 <= |z| <= 1     F = (1 - m (1 - r)) e^{imt}              (outer Cantor annulus)
    |z| >= 1           F = z**m

The middle annulus is first rescaled radially onto eps <= |zeta| <= 1. In
the zeta annulus sit an (l+m)-pointed star around the eps circle and l + m
(l+m)-gons ("petals") hanging between consecutive star tips. The
region between star and eps circle is cut into l(l+m) inner quads, the region
between star-plus-petals and the unit circle into m(l+m) outer quads. Each
petal goes onto the central polygon of the target; each quad
goes to one of the l+m target quads around it. Quads have one straight side
and one circular side and are filled by straight segments between them, so
every cell map is an explicit diffeomorphism that is affine on straight edges
and linear in angle on arcs. Petals are fanned into triangles around an
interior point and mapped affinely triangle by triangle.
"""
import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numba as nb
import numpy as np

from .dynamics import Exponents
from .grid import FieldGrid, PayloadKind

OUTER, INNER = 0, 1

# region codes returned by the kernel
R_DISK, R_A0, R_MID, R_A1, R_EXT = 0, 1, 2, 3, 4


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class MeshParams:
    """Radii of the cell complex in the normalized annulus eps <= |zeta| <= 1.

    Star notches sit at notch_radius, star tips at tip_radius, petal rims at
    rim_radius; the central target polygon has circumradius core_radius.
    """

    eps: float = 0.5
    notch_radius: float = 0.62
    tip_radius: float = 0.72
    rim_radius: float = 0.82
    core_radius: float = 0.5


def default_mesh(exp: Exponents) -> MeshParams:
    return MeshParams()


@dataclass(frozen=True)
class CellComplex:
    exp: Exponents
    mesh: MeshParams
    star: np.ndarray = field(repr=False)          # l*N vertices x_t, x_{l j} = tip j
    outer: np.ndarray = field(repr=False)         # m*N vertices o_s along the petal rims
    petals: np.ndarray = field(repr=False)        # (N, N) vertices P_{j,k}, anticlockwise from tip j
    petal_centers: np.ndarray = field(repr=False)
    core: np.ndarray = field(repr=False)          # N vertices of the central target polygon
    # ruled quads, one row per cell: kind, index, target, reversed
    quad_meta: np.ndarray = field(repr=False)
    # p0, p1 (complex), radius, theta0, dtheta
    quad_geom: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.exp.l + self.exp.m

    @property
    def counts(self) -> dict:
        kinds = self.quad_meta[:, 0]
        return {
            "outer": int(np.sum(kinds == OUTER)),
            "inner": int(np.sum(kinds == INNER)),
            "petals": len(self.petals),
            "star": len(self.star),
        }

    def petal_target(self, j: int, k: int) -> int:
        """Index of the core vertex that petal vertex P_{j,k} maps to."""
        return (self.exp.m * j + k) % self.n


def _petal(exp, mesh, j):
    # tips at angles 2 pi j / N; rim vertices split the sector into m equal
    # angles, notch vertices into l
    l, m = exp.l, exp.m
    n = l + m
    step = 2 * math.pi / n
    phi = step * j
    pts = [mesh.tip_radius * cmath.exp(1j * phi)]
    pts += [mesh.rim_radius * cmath.exp(1j * (phi + k * step / m)) for k in range(1, m)]
    pts += [mesh.tip_radius * cmath.exp(1j * (phi + step))]
    pts += [mesh.notch_radius * cmath.exp(1j * (phi + (l - i) * step / l)) for i in range(1, l)]
    center = 0.5 * (mesh.notch_radius + mesh.rim_radius) * cmath.exp(1j * (phi + step / 2))
    return np.array(pts), center


def _orient(a, b, c):
    return (b - a).real * (c - a).imag - (b - a).imag * (c - a).real


def build_complex(exp: Exponents, r0: float = 0.5, mesh: Optional[MeshParams] = None) -> CellComplex:
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    mesh = mesh or default_mesh(exp)
    l, m = exp.l, exp.m
    n = l + m
    if not 0 < mesh.eps < mesh.notch_radius < mesh.tip_radius < mesh.rim_radius < 1:
        raise GeometryError("need 0 < eps < notch_radius < tip_radius < rim_radius < 1")
    if not 0 < mesh.core_radius < 1:
        raise GeometryError("core_radius must lie in (0, 1)")

    petals, centers = zip(*(_petal(exp, mesh, j) for j in range(n)))
    petals, centers = np.array(petals), np.array(centers)
    for j in range(n):
        if abs(petals[j, m] - petals[(j + 1) % n, 0]) > 1e-12:
            raise AssertionError("petal vertex m must be the next tip")
        ring = petals[j]
        # every fan triangle around the center must be positively oriented
        if any(_orient(centers[j], ring[k], ring[(k + 1) % n]) <= 0 for k in range(n)):
            raise GeometryError("petals overlap or fold: adjust the star radii")

    star = np.empty(l * n, complex)
    outer = np.empty(m * n, complex)
    for j in range(n):
        star[l * j] = petals[j, 0]
        for i in range(1, l):
            star[l * j + i] = petals[j, n - i]
        for k in range(m):
            outer[m * j + k] = petals[j, k]

    core = mesh.core_radius * np.exp(2j * np.pi * np.arange(n) / n)

    meta, geom = [], []
    for s in range(m * n):
        meta.append((OUTER, s, s % n, 0))
        geom.append((outer[s], outer[(s + 1) % (m * n)], 1.0, 2 * math.pi * s / (m * n), 2 * math.pi / (m * n)))
    for t in range(l * n):
        meta.append((INNER, t, (-t - 1) % n, 1))
        geom.append((star[t], star[(t + 1) % (l * n)], mesh.eps, 2 * math.pi * t / (l * n),
                     2 * math.pi / (l * n)))
    meta = np.array(meta, np.int64)
    geom = np.array(geom, complex)
    cx = CellComplex(exp, mesh, star, outer, petals, centers, core, meta, geom)
    _check_cells(cx)
    return cx


def _ruled_jacobian(g, u, v):
    p0, p1, r, th0, dth = g[0], g[1], g[2].real, g[3].real, g[4].real
    e = np.exp(1j * (th0 + u * dth))
    du = (1 - v) * (p1 - p0) + v * r * 1j * dth * e
    dv = r * e - (p0 + u * (p1 - p0))
    return du.real * dv.imag - du.imag * dv.real


def _check_cells(cx):
    n = cx.n
    uu, vv = np.meshgrid(np.linspace(0, 1, 21), np.linspace(0, 1, 21))
    for (kind, idx, target, _), g in zip(cx.quad_meta, cx.quad_geom):
        jac = _ruled_jacobian(g, uu, vv)
        want = -1 if kind == OUTER else 1
        if not np.all(np.sign(jac) == want):
            raise GeometryError(f"degenerate {'outer' if kind == OUTER else 'inner'} cell {idx}")
    tq = _target_geom(n, cx.mesh.core_radius)
    for g in tq:
        if not np.all(_ruled_jacobian(g, uu, vv) < 0):
            raise GeometryError("degenerate target cell: adjust core_radius")


def _target_geom(n, b):
    core = b * np.exp(2j * np.pi * np.arange(n) / n)
    return np.array([(core[k], core[(k + 1) % n], 1.0, 2 * math.pi * k / n, 2 * math.pi / n)
                     for k in range(n)], complex)


# ---------------------------------------------------------------- kernels

@nb.njit(cache=True)
def _ruled_eval(p0, p1, r, th0, dth, u, v):
    c0 = p0 + u * (p1 - p0)
    c1 = r * cmath.exp(1j * (th0 + u * dth))
    return c0 + v * (c1 - c0)


@nb.njit(cache=True)
def _cross_h(z, p0, p1, r, th0, dth, u):
    c0 = p0 + u * (p1 - p0)
    d = r * cmath.exp(1j * (th0 + u * dth)) - c0
    w = z - c0
    return d.real * w.imag - d.imag * w.real


@nb.njit(cache=True)
def _ruled_invert(z, p0, p1, r, th0, dth):
    # (u, v) with X(u, v) = z, or (nan, nan) when z is outside the two side lines
    h0 = _cross_h(z, p0, p1, r, th0, dth, 0.0)
    h1 = _cross_h(z, p0, p1, r, th0, dth, 1.0)
    # points on a side line (up to rounding) belong to both neighbours
    tol = 1e-13 * (abs(p1 - p0) + r) * (abs(z) + abs(p0) + r)
    if abs(h0) <= tol:
        u = 0.0
    elif abs(h1) <= tol:
        u = 1.0
    elif (h0 > 0) == (h1 > 0):
        return math.nan, math.nan
    else:
        lo, hi = 0.0, 1.0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            hm = _cross_h(z, p0, p1, r, th0, dth, mid)
            if (hm > 0) == (h0 > 0):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16:
                break
        u = 0.5 * (lo + hi)
    c0 = p0 + u * (p1 - p0)
    d = r * cmath.exp(1j * (th0 + u * dth)) - c0
    w = z - c0
    v = (d.real * w.real + d.imag * w.imag) / (d.real * d.real + d.imag * d.imag)
    return u, v


@nb.njit(cache=True)
def _barycentric(z, a, b, c):
    det = (b - a).real * (c - a).imag - (b - a).imag * (c - a).real
    w = z - a
    s = (w.real * (c - a).imag - w.imag * (c - a).real) / det
    t = ((b - a).real * w.imag - (b - a).imag * w.real) / det
    return 1.0 - s - t, s, t


@nb.njit(cache=True)
def _fan_eval(z, ring, center, core, j, m):
    # petal j -> core polygon, affine on each triangle (center, P_k, P_{k+1})
    n = ring.shape[0]
    for k in range(n):
        a, s, t = _barycentric(z, center, ring[k], ring[(k + 1) % n])
        if a >= -1e-12 and s >= -1e-12 and t >= -1e-12:
            return s * core[(m * j + k) % n] + t * core[(m * j + k + 1) % n], k
    return complex(math.nan, math.nan), -1


@nb.njit(cache=True)
def _middle0(zeta, m, meta, geom, tgeom, petals, centers, core, cand_quads, cand_petals):
    # F0 on the sector around arg in [0, 2 pi / N); returns (value in the unit disk, cell id)
    for k in range(cand_petals.shape[0]):
        j = cand_petals[k]
        val, tri = _fan_eval(zeta, petals[j], centers[j], core, j, m)
        if tri >= 0:
            return val, 1000 + 100 * j + tri
    best_bad = 1e300
    best_val = complex(math.nan, math.nan)
    best_id = -1
    for k in range(cand_quads.shape[0]):
        q = cand_quads[k]
        g = geom[q]
        u, v = _ruled_invert(zeta, g[0], g[1], g[2].real, g[3].real, g[4].real)
        if math.isnan(u):
            continue
        bad = max(-u, u - 1.0, -v, v - 1.0)
        if bad < best_bad:
            best_bad = bad
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
            if v < 0.0:
                v = 0.0
            elif v > 1.0:
                v = 1.0
            if meta[q, 3] == 1:
                u = 1.0 - u
            t = tgeom[meta[q, 2]]
            best_val = _ruled_eval(t[0], t[1], t[2].real, t[3].real, t[4].real, u, v)
            best_id = 2000 + q
        if bad <= 0.0:
            break
    if best_bad > 1e-9:
        return complex(math.nan, math.nan), -1
    return best_val, best_id


@nb.njit(cache=True)
def _eval_one(z, force, l, m, r0, r1, r2, eps, meta, geom, tgeom, petals, centers, core,
              cand_quads, cand_petals, rot):
    # returns (F(z), cell id); cell id = region * 10**6 + sector * 10**4 + local cell
    n = l + m
    if not (abs(z.real) < math.inf and abs(z.imag) < math.inf):
        return complex(math.inf, 0.0), R_EXT * 1000000
    r = abs(z)
    region = force
    if region < 0:
        if r <= r0:
            region = R_DISK
        elif r <= r1:
            region = R_A0
        elif r < r2:
            region = R_MID
        elif r < 1.0:
            region = R_A1
        else:
            region = R_EXT
    if region == R_DISK:
        if r == 0.0:
            return complex(math.inf, 0.0), 0
        return r0 ** l / z ** l, 0
    if region == R_EXT:
        return z ** m, R_EXT * 1000000
    t = math.atan2(z.imag, z.real)
    if region == R_A0:
        return (1.0 - l * (r - r0)) * cmath.exp(-1j * l * t), R_A0 * 1000000
    if region == R_A1:
        return (1.0 - m * (1.0 - r)) * cmath.exp(1j * m * t), R_A1 * 1000000
    # middle annulus: reduce to the fundamental sector, F(w^k z) = w^{mk} F(z)
    if t < 0.0:
        t += 2.0 * math.pi
    k = int(t * n / (2.0 * math.pi))
    if k >= n:
        k = n - 1
    w = z * rot[(n - k) % n]
    rho = eps + (1.0 - eps) * (r - r1) / (r2 - r1)
    zeta = w * (rho / r)
    val, cell = _middle0(zeta, m, meta, geom, tgeom, petals, centers, core, cand_quads, cand_petals)
    if cell < 0:
        return val, -1
    return r0 * val * rot[(m * k) % n], R_MID * 1000000 + k * 10000 + cell


@nb.njit(cache=True, nogil=True)
def _eval_many(zs, force, out, cells, l, m, r0, r1, r2, eps, meta, geom, tgeom, petals, centers,
               core, cand_quads, cand_petals, rot):
    for i in range(zs.shape[0]):
        out[i], cells[i] = _eval_one(zs[i], force, l, m, r0, r1, r2, eps, meta, geom, tgeom,
                                     petals, centers, core, cand_quads, cand_petals, rot)


@nb.njit(cache=True, nogil=True)
def _orbits(zs, steps, l, m, r0, r1, r2, eps, meta, geom, tgeom, petals, centers, core,
            cand_quads, cand_petals, rot, visits, depth, escape):
    # visits: steps spent in the middle annulus; depth: first k with |F^k| >= escape
    for i in range(zs.shape[0]):
        z = zs[i]
        visits[i] = 0
        depth[i] = -1
        for k in range(steps + 1):
            a = abs(z)
            if depth[i] < 0 and not (a < escape):
                depth[i] = k
            if r1 < a < r2:
                visits[i] += 1
            if k == steps:
                break
            z, _ = _eval_one(z, -1, l, m, r0, r1, r2, eps, meta, geom, tgeom, petals, centers,
                             core, cand_quads, cand_petals, rot)
            if not (abs(z.real) < math.inf and abs(z.imag) < math.inf):
                if depth[i] < 0:
                    depth[i] = k + 1
                break


# ---------------------------------------------------------------- map

class SurgeryMap:
    def __init__(self, exp: Exponents, r0: float = 0.5, mesh: Optional[MeshParams] = None):
        if not 0 < r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        self.exp = exp
        self.r0 = float(r0)
        self.r1 = self.r0 + (1 - self.r0) / exp.l
        self.r2 = 1 - (1 - self.r0) / exp.m
        self.complex = build_complex(exp, r0, mesh)
        cx = self.complex
        n, l, m = cx.n, exp.l, exp.m
        self._tgeom = _target_geom(n, cx.mesh.core_radius)
        quads = [(s % (m * n)) for s in range(-1, m + 1)]
        quads += [m * n + (t % (l * n)) for t in range(-1, l + 1)]
        self._cand_quads = np.array(quads, np.int64)
        self._cand_petals = np.array([n - 1, 0, 1], np.int64)
        self._rot = np.exp(2j * np.pi * np.arange(n) / n)

    @property
    def degree(self) -> int:
        return self.exp.l + self.exp.m

    def _args(self):
        cx = self.complex
        return (self.exp.l, self.exp.m, self.r0, self.r1, self.r2, cx.mesh.eps, cx.quad_meta,
                cx.quad_geom, self._tgeom, cx.petals, cx.petal_centers, cx.core, self._cand_quads,
                self._cand_petals, self._rot)

    def eval_cells(self, z, force: int = -1):
        zs = np.atleast_1d(np.asarray(z, complex)).ravel()
        out = np.empty(len(zs), complex)
        cells = np.empty(len(zs), np.int64)
        _eval_many(zs, force, out, cells, *self._args())
        return out, cells

    def __call__(self, z):
        arr = np.asarray(z, complex)
        out, _ = self.eval_cells(arr)
        if arr.ndim == 0:
            return complex(out[0])
        return out.reshape(arr.shape)

    eval = __call__

    def piece(self, z, region: int):
        """Evaluate one region's formula regardless of |z| (used for seam checks)."""
        out, _ = self.eval_cells(z, region)
        return out

    def orbit_stats(self, zs, steps: int, escape: float = 1.0):
        zs = np.asarray(zs, complex).ravel()
        visits = np.empty(len(zs), np.int64)
        depth = np.empty(len(zs), np.int64)
        _orbits(zs, steps, *self._args(), visits, depth, escape)
        return visits, depth

    def preimages(self, w) -> list:
        """All solutions of F(z) = w, from the closed forms and cell-wise inversion."""
        w = complex(w)
        l, m, n = self.exp.l, self.exp.m, self.degree
        r0, r1, r2 = self.r0, self.r1, self.r2
        a, t = abs(w), cmath.phase(w)
        sols = []
        if a >= 1:
            sols += [a ** (1 / m) * cmath.exp(1j * (t + 2 * math.pi * k) / m) for k in range(m)]
            sols += [r0 * a ** (-1 / l) * cmath.exp(-1j * (t + 2 * math.pi * k) / l) for k in range(l)]
        elif a >= r0:
            ra = r0 + (1 - a) / l
            sols += [ra * cmath.exp(-1j * (t + 2 * math.pi * k) / l) for k in range(l)]
            rb = 1 - (1 - a) / m
            sols += [rb * cmath.exp(1j * (t + 2 * math.pi * k) / m) for k in range(m)]
        else:
            sols += self._middle_preimages(w / r0)
        return sols

    def _middle_preimages(self, y):
        cx = self.complex
        sols = []
        n, m = cx.n, self.exp.m
        for j in range(n):
            ring, ctr = cx.petals[j], cx.petal_centers[j]
            for k in range(n):
                a, s, t = _barycentric(y, 0j, cx.core[(m * j + k) % n], cx.core[(m * j + k + 1) % n])
                if min(a, s, t) >= 0:
                    sols.append(a * ctr + s * ring[k] + t * ring[(k + 1) % n])
                    break
        for (kind, idx, target, rev), g in zip(cx.quad_meta, cx.quad_geom):
            tg = self._tgeom[target]
            u, v = _ruled_invert(y, tg[0], tg[1], tg[2].real, tg[3].real, tg[4].real)
            if math.isnan(u) or not (0 <= u <= 1 and 0 <= v <= 1):
                continue
            if rev:
                u = 1 - u
            sols.append(_ruled_eval(g[0], g[1], g[2].real, g[3].real, g[4].real, u, v))
        eps = cx.mesh.eps
        out = []
        for zeta in sols:
            rho = abs(zeta)
            r = self.r1 + (rho - eps) * (self.r2 - self.r1) / (1 - eps)
            out.append(zeta * (r / rho))
        return out


@dataclass(frozen=True)
class QuasiregularReport:
    degree_count: int
    max_dilatation: float
    symmetry_error: float
    seam_error: float
    pass_through_violations: int
    degree_range: tuple = (0, 0)
    inversion_failures: int = 0

    def as_dict(self) -> dict:
        return {
            "degreeCount": self.degree_count,
            "maxDilatation": self.max_dilatation,
            "symmetryError": self.symmetry_error,
            "seamError": self.seam_error,
            "passThroughViolations": self.pass_through_violations,
            "degreeRange": list(self.degree_range),
            "inversionFailures": self.inversion_failures,
        }


def _annulus_samples(rng, count, lo, hi):
    r = np.sqrt(rng.uniform(lo * lo, hi * hi, count))
    return r * np.exp(1j * rng.uniform(0, 2 * math.pi, count))


def dilatation(fmap: SurgeryMap, z, h: float = 1e-6):
    """|mu| by central differences; nan where the stencil straddles a cell edge."""
    z = np.asarray(z, complex).ravel()
    pts = np.concatenate([z + h, z - h, z + 1j * h, z - 1j * h, z])
    vals, cells = fmap.eval_cells(pts)
    k = len(z)
    v = vals.reshape(5, k)
    c = cells.reshape(5, k)
    fx = (v[0] - v[1]) / (2 * h)
    fy = (v[2] - v[3]) / (2 * h)
    fz = 0.5 * (fx - 1j * fy)
    fzb = 0.5 * (fx + 1j * fy)
    ok = np.all(c == c[4], axis=0) & (c[4] >= 0) & (np.abs(fz) > 0)
    mu = np.full(k, np.nan)
    mu[ok] = np.abs(fzb[ok]) / np.abs(fz[ok])
    return mu


def verify(fmap: SurgeryMap, sample_budget: int = 10_000, seed: int = 0,
           degree_targets: int = 100, orbit_steps: int = 100) -> QuasiregularReport:
    if sample_budget < 1000:
        raise ValueError("sample_budget must be >= 1000")
    rng = np.random.default_rng(seed)
    n, m = fmap.degree, fmap.exp.m
    r0, r1, r2 = fmap.r0, fmap.r1, fmap.r2

    # degree: generic targets spread over the disk, the annulus and the exterior
    counts, failures = [], 0
    radii = np.concatenate([rng.uniform(0, r0, degree_targets - 2 * (degree_targets // 3)),
                            rng.uniform(r0, 1, degree_targets // 3),
                            rng.uniform(1, 3, degree_targets // 3)])
    for w in radii * np.exp(1j * rng.uniform(0, 2 * math.pi, len(radii))):
        sols = fmap.preimages(w)
        back = fmap(np.array(sols)) if sols else np.array([])
        good = [s for s, b in zip(sols, back) if abs(b - w) <= 1e-9 * max(1.0, abs(w))]
        failures += len(sols) - len(good)
        counts.append(len(_dedupe(good)))
    counts = np.array(counts)
    values, freq = np.unique(counts, return_counts=True)
    degree = int(values[np.argmax(freq)])

    # symmetry
    z = np.concatenate([_annulus_samples(rng, sample_budget // 2, r1, r2),
                        _annulus_samples(rng, sample_budget - sample_budget // 2, 0.5 * r0, 1.5)])
    w = cmath.exp(2j * math.pi / n)
    fz, cz = fmap.eval_cells(z)
    fwz, cwz = fmap.eval_cells(z * w)
    ok = (cz >= 0) & (cwz >= 0)
    failures += int(np.sum(~ok))
    sym = float(np.max(np.abs(fwz[ok] - w ** m * fz[ok]))) if ok.any() else math.nan

    # seams: two-sided formulas on each interface circle
    t = np.linspace(0, 2 * math.pi, 1000, endpoint=False) + 1e-3
    seam = 0.0
    for r, inner, outer in ((r0, R_DISK, R_A0), (r1, R_A0, R_MID), (r2, R_MID, R_A1), (1.0, R_A1, R_EXT)):
        zc = r * np.exp(1j * t)
        seam = max(seam, float(np.max(np.abs(fmap.piece(zc, inner) - fmap.piece(zc, outer)))))

    mu = dilatation(fmap, z)
    max_mu = float(np.nanmax(mu))

    starts = _annulus_samples(rng, sample_budget, 0.0, 1.2)
    visits, _ = fmap.orbit_stats(starts, orbit_steps)
    violations = int(np.sum(visits > 1))

    return QuasiregularReport(degree, max_mu, sym, seam, violations,
                              (int(counts.min()), int(counts.max())), failures)


def _dedupe(points, tol=1e-9):
    out = []
    for p in points:
        if all(abs(p - q) > tol for q in out):
            out.append(p)
    return out


def winding_degree(fmap: SurgeryMap, w, samples: int = 20000) -> int:
    """Number of solutions of F(z) = w in the middle annulus, by the argument principle."""
    t = np.linspace(0, 2 * math.pi, samples + 1)
    total = 0
    for r, sign in ((fmap.r2, 1), (fmap.r1, -1)):
        vals = fmap.piece(r * np.exp(1j * t), R_MID) - w
        d = np.diff(np.unwrap(np.angle(vals)))
        total += sign * int(round(d.sum() / (2 * math.pi)))
    return total


def attractor_render(fmap: SurgeryMap, bounds, width: int, height: int, max_iter: int = 64) -> FieldGrid:
    """Escape depth under F: first k with |F^k(z)| >= 1, or -1 if none within max_iter."""
    if width < 16 or height < 16:
        raise ValueError("resolution must be >= 16")
    grid = FieldGrid.empty(width, height, bounds, PayloadKind.ESCAPE)
    zs = grid.pixel_centers().ravel()
    _, depth = fmap.orbit_stats(zs, max_iter)
    grid.data[...] = depth.reshape(height, width)
    return grid


def write_mesh_csv(cx: CellComplex, fh) -> None:
    """One row per cell vertex: cell kind and index, target cell, vertex order and position."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["cell_kind", "cell_index", "target", "vertex", "re", "im"])
    for j, poly in enumerate(cx.petals):
        for k, p in enumerate(poly):
            w.writerow(["petal", j, "core", k, repr(float(p.real)), repr(float(p.imag))])
    for (kind, idx, target, _), g in zip(cx.quad_meta, cx.quad_geom):
        r, th0, dth = g[2].real, g[3].real, g[4].real
        corners = (g[0], g[1], r * cmath.exp(1j * (th0 + dth)), r * cmath.exp(1j * th0))
        name = "outer" if kind == OUTER else "inner"
        for k, p in enumerate(corners):
            w.writerow([name, idx, target, k, repr(float(p.real)), repr(float(p.imag))])
