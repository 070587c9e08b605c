"""Chordal geometry of curve families on the Riemann sphere.

All distances are chordal: 2|x - y| / sqrt((1 + |x|^2)(1 + |y|^2)), which is
the euclidean distance between the stereographic images on the unit sphere.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numba as nb
import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .grid import FieldGrid, PayloadKind

log = logging.getLogger(__name__)

MIN_CURVE_VERTICES = 8

UNIFORMITY_NOTE = (
    "finite-depth estimate: bounds hold for the curves extracted at the computed "
    "depths only and do not certify uniformity over all peripheral circles"
)


def to_sphere(z) -> np.ndarray:
    """Stereographic image on the unit sphere, shape (..., 3); infinity is the north pole."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,))
    inf = ~np.isfinite(z)
    zz = np.where(inf, 0, z)
    r2 = zz.real ** 2 + zz.imag ** 2
    out[..., 0] = 2 * zz.real / (1 + r2)
    out[..., 1] = 2 * zz.imag / (1 + r2)
    out[..., 2] = (r2 - 1) / (r2 + 1)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def chordal(x, y):
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    xi, yi = ~np.isfinite(x), ~np.isfinite(y)
    xf, yf = np.where(xi, 0, x), np.where(yi, 0, y)
    # hypot keeps huge moduli from overflowing
    hx, hy = np.hypot(1, np.abs(xf)), np.hypot(1, np.abs(yf))
    with np.errstate(all="ignore"):
        d = 2 * (np.abs(xf - yf) / hx) / hy
    d = np.where(xi & ~yi, 2 / hy, d)
    d = np.where(yi & ~xi, 2 / hx, d)
    d = np.where(xi & yi, 0.0, d)
    if d.ndim == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class Curve:
    """Closed polyline; the edge from the last vertex back to the first is implicit."""

    vertices: np.ndarray
    source_depth: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if len(v) < MIN_CURVE_VERTICES:
            raise ValueError(f"a curve needs at least {MIN_CURVE_VERTICES} vertices, got {len(v)}")
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    def is_simple(self) -> bool:
        from shapely.geometry import LinearRing

        if not np.all(np.isfinite(self.vertices)):
            return True
        return LinearRing(np.column_stack([self.vertices.real, self.vertices.imag])).is_simple


@nb.njit(cache=True)
def _farthest_pair(p):
    n = p.shape[0]
    best, bi, bj = 0.0, 0, 0
    for i in range(n):
        for j in range(i + 1, n):
            d = math.sqrt((p[i, 0] - p[j, 0]) ** 2 + (p[i, 1] - p[j, 1]) ** 2 + (p[i, 2] - p[j, 2]) ** 2)
            if d > best:
                best, bi, bj = d, i, j
    return best, bi, bj


def diameter(c: Curve) -> float:
    """Largest chordal distance between two vertices."""
    return float(_farthest_pair(to_sphere(c.vertices))[0])


@dataclass(frozen=True)
class TurningReport:
    k_estimate: float
    witness_pair: tuple
    sample_pairs: int


@nb.njit(cache=True)
def _arc_diameters(p, q_start, q_len):
    # diam[i, L] = diameter of vertices i..i+L (cyclic), swept column by column
    n = p.shape[0]
    nq = q_start.shape[0]
    out = np.zeros(nq)
    order = np.argsort(q_len)
    col = np.zeros(n)
    nxt = np.zeros(n)
    k = 0
    while k < nq and q_len[order[k]] == 0:
        k += 1
    for L in range(1, n):
        for i in range(n):
            j = (i + L) % n
            d = math.sqrt((p[i, 0] - p[j, 0]) ** 2 + (p[i, 1] - p[j, 1]) ** 2 + (p[i, 2] - p[j, 2]) ** 2)
            a = col[i]
            b = col[(i + 1) % n]
            if b > a:
                a = b
            if d > a:
                a = d
            nxt[i] = a
        col, nxt = nxt, col
        while k < nq and q_len[order[k]] == L:
            out[order[k]] = col[q_start[order[k]]]
            k += 1
        if k >= nq:
            break
    return out


def _candidate_pairs(pts, budget, neighbours=8):
    """Deterministic, prefix-nested list of vertex pairs (i < j).

    Spatial nearest neighbours that are far apart along the curve (where
    cusps and bottlenecks live), ranked by arc length over chord, alternate
    with pairs stratified by index separation. Neither list depends on the
    budget, so a larger budget only appends pairs.
    """
    n = len(pts)
    total = n * (n - 1) // 2
    if budget >= total:
        i, j = np.triu_indices(n, 1)
        return np.column_stack([i, j])
    half = budget // 2 + 1

    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    _, nbr = cKDTree(pts).query(pts, k=min(n, neighbours + 1))
    ii = np.repeat(np.arange(n), nbr.shape[1] - 1)
    jj = nbr[:, 1:].ravel()
    lo, hi = np.minimum(ii, jj), np.maximum(ii, jj)
    sep = hi - lo
    keep = np.minimum(sep, n - sep) > 1
    lo, hi = lo[keep], hi[keep]
    arc = cum[hi] - cum[lo]
    arc = np.minimum(arc, perimeter - arc)
    chord = np.linalg.norm(pts[lo] - pts[hi], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        proxy = np.where(chord > 0, arc / chord, 0.0)
    # descending proxy, ties broken by index so the order is reproducible
    order = np.lexsort((hi, lo, -proxy))
    knn = list(zip(lo[order].tolist(), hi[order].tolist()))

    strat = []
    seps = np.arange(1, n // 2 + 1)
    g = max(1, int(round(0.6180339887 * n)))
    while math.gcd(g, n) != 1:
        g += 1
    r = 0
    while len(strat) < half and r < n:
        for s in seps:
            i = int((s * 7919 + r * g) % n)
            strat.append((i, int((i + s) % n)))
        r += 1

    seen = set()
    out = []
    for a, b in _interleave(knn, strat):
        key = (min(a, b), max(a, b))
        if key[0] == key[1] or key in seen:
            continue
        seen.add(key)
        out.append(key)
        if len(out) >= budget:
            break
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def _interleave(a, b):
    for k in range(max(len(a), len(b))):
        if k < len(a):
            yield a[k]
        if k < len(b):
            yield b[k]


def turning_constant(c: Curve, pair_budget: int = 10_000, max_vertices: int = 8192) -> TurningReport:
    """Bounded-turning estimate: max over sampled vertex pairs of diam(smaller arc) / |x - y|.

    Curves longer than max_vertices are subsampled at evenly spaced vertex
    indices first; witness indices refer to the original vertices.
    """
    if pair_budget < 100:
        raise ValueError("pair_budget must be >= 100")
    n0 = len(c.vertices)
    idx = np.arange(n0)
    if n0 > max_vertices:
        idx = np.linspace(0, n0, max_vertices, endpoint=False).astype(np.int64)
    pts = to_sphere(c.vertices[idx])
    n = len(pts)
    pairs = _candidate_pairs(pts, pair_budget)
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.linalg.norm(pts[i] - pts[j], axis=1)
    keep = d > 0
    i, j, d = i[keep], j[keep], d[keep]
    if len(d) == 0:
        return TurningReport(1.0, (0, 0), 0)
    starts = np.concatenate([i, j]).astype(np.int64)
    lens = np.concatenate([j - i, n - (j - i)]).astype(np.int64)
    arcs = _arc_diameters(pts, starts, lens)
    small = np.minimum(arcs[: len(i)], arcs[len(i):])
    ratio = small / d
    w = int(np.argmax(ratio))
    return TurningReport(float(ratio[w]), (int(idx[i[w]]), int(idx[j[w]])), int(len(d)))


@dataclass(frozen=True)
class SeparationReport:
    s_minimum: float
    witness_curves: tuple
    pair_count: int


class IntersectingCurvesError(ValueError):
    def __init__(self, i, j):
        super().__init__(f"curves {i} and {j} intersect")
        self.pair = (i, j)


def _check_disjoint(family):
    from shapely import STRtree
    from shapely.geometry import LinearRing

    rings, ids = [], []
    for k, c in enumerate(family):
        if np.all(np.isfinite(c.vertices)):
            rings.append(LinearRing(np.column_stack([c.vertices.real, c.vertices.imag])))
            ids.append(k)
    if len(rings) < 2:
        return
    tree = STRtree(rings)
    a, b = tree.query(rings, predicate="intersects")
    for p, q in zip(a, b):
        if p < q:
            raise IntersectingCurvesError(ids[p], ids[q])


def separation(family) -> SeparationReport:
    """Smallest dist(gi, gj) / min(diam gi, diam gj) over unordered pairs."""
    family = list(family)
    if len(family) < 2:
        raise ValueError("separation needs at least two curves")
    _check_disjoint(family)
    pts = [to_sphere(c.vertices) for c in family]
    diams = np.array([_farthest_pair(p)[0] for p in pts])
    centers = np.array([p.mean(axis=0) for p in pts])
    radii = np.array([np.linalg.norm(p - ctr, axis=1).max() for p, ctr in zip(pts, centers)])
    trees = [None] * len(family)

    nc = len(family)
    ii, jj = np.triu_indices(nc, 1)
    gap = np.linalg.norm(centers[ii] - centers[jj], axis=1) - radii[ii] - radii[jj]
    scale = np.minimum(diams[ii], diams[jj])
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(scale > 0, np.maximum(gap, 0) / scale, np.inf)
    order = np.argsort(lower, kind="stable")

    best, witness = math.inf, (0, 1)
    for k in order:
        if lower[k] >= best:
            break
        a, b = int(ii[k]), int(jj[k])
        # query the smaller set against the larger one's tree
        if len(pts[a]) > len(pts[b]):
            a, b = b, a
        if trees[b] is None:
            trees[b] = cKDTree(pts[b])
        dist = float(trees[b].query(pts[a], k=1)[0].min())
        if dist <= 0:
            raise IntersectingCurvesError(min(a, b), max(a, b))
        s = dist / scale[k] if scale[k] > 0 else math.inf
        if s < best:
            best, witness = s, (int(ii[k]), int(jj[k]))
    return SeparationReport(float(best), witness, int(len(ii)))


class CurveList(list):
    """List of curves that also carries the number of open contours dropped."""

    def __init__(self, curves=(), dropped_open=0):
        super().__init__(curves)
        self.dropped_open = dropped_open


def _shoelace(rc):
    y, x = rc[:, 0], rc[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def extract_peripheral(grid: FieldGrid, max_depth: int, min_pixels: int = 16) -> CurveList:
    """Trace the boundaries of the components of {0 <= depth <= max_depth}.

    Each component sits inside one Fatou component of the basin of infinity;
    its boundary is traced by marching squares and tagged with the smallest
    depth found in the component, which is the level at which that Fatou
    component first shows up. Components with fewer than min_pixels pixels
    are skipped; contours cut by the grid edge are dropped and counted.
    """
    from skimage.measure import find_contours

    if grid.kind is not PayloadKind.ESCAPE:
        raise ValueError("extract_peripheral needs an escape-depth grid")
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    depth = grid.data
    h, w = depth.shape
    mask = (depth >= 0) & (depth <= max_depth)
    # 4-connectivity, so Fatou components touching only at a pixel corner stay apart
    labels, count = ndimage.label(mask)
    if count == 0:
        return CurveList()
    sizes = np.bincount(labels.ravel())
    mins = ndimage.minimum(depth, labels, index=np.arange(1, count + 1))
    re_min, _, im_min, _ = grid.bounds
    dx, dy = grid.pixel_size

    curves, dropped = [], 0
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None or sizes[lab] < min_pixels:
            continue
        rows, cols = sl
        sub = labels[sl] == lab
        pad = ((0 if rows.start == 0 else 1, 0 if rows.stop == h else 1),
               (0 if cols.start == 0 else 1, 0 if cols.stop == w else 1))
        sub = np.pad(sub, pad).astype(float)
        for rc in find_contours(sub, 0.5, fully_connected="low"):
            if not np.array_equal(rc[0], rc[-1]):
                dropped += 1
                continue
            rc = rc[:-1]
            if len(rc) < MIN_CURVE_VERTICES or _shoelace(rc) < min_pixels:
                continue
            r = rc[:, 0] + rows.start - pad[0][0]
            c = rc[:, 1] + cols.start - pad[1][0]
            z = (re_min + (c + 0.5) * dx) + 1j * (im_min + (r + 0.5) * dy)
            curves.append(Curve(z, int(mins[lab - 1])))
    if dropped:
        log.info("dropped %d open contours at the grid edge", dropped)
    return CurveList(curves, dropped)


@dataclass(frozen=True)
class CarpetReport:
    turning: TurningReport
    worst_curve: int
    per_curve: tuple
    per_depth: dict
    separation: Optional[SeparationReport]
    note: str = field(default=UNIFORMITY_NOTE)


def carpet_report(family, pair_budget: int = 10_000) -> CarpetReport:
    """Worst bounded-turning constant and the relative separation of a family."""
    family = list(family)
    if not family:
        raise ValueError("carpet_report needs a nonempty family")
    per_curve = tuple(turning_constant(c, pair_budget) for c in family)
    worst = int(np.argmax([t.k_estimate for t in per_curve]))
    per_depth = {}
    for c, t in zip(family, per_curve):
        per_depth[c.source_depth] = max(per_depth.get(c.source_depth, 1.0), t.k_estimate)
    sep = separation(family) if len(family) >= 2 else None
    return CarpetReport(per_curve[worst], worst, per_curve, per_depth, sep)
