"""Escape-trichotomy classification and the real slice of the parameter plane."""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .dynamics import CycleReport, Exponents, MapParams, critical_points, evaluate, find_cycle, iterate
from .grid import FieldGrid, PayloadKind, run_tiled

log = logging.getLogger(__name__)


class VerdictClass(enum.IntEnum):
    UNDEFINED = K.UNDEFINED
    CANTOR_SET = K.CANTOR_SET
    CANTOR_CIRCLES = K.CANTOR_CIRCLES
    SIERPINSKI_ESCAPING = K.SIERPINSKI_ESCAPING
    NON_ESCAPING = K.NON_ESCAPING
    INDETERMINATE = K.INDETERMINATE

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    VerdictClass.UNDEFINED: "Undefined",
    VerdictClass.CANTOR_SET: "CantorSet",
    VerdictClass.CANTOR_CIRCLES: "CantorCircles",
    VerdictClass.SIERPINSKI_ESCAPING: "SierpinskiEscaping",
    VerdictClass.NON_ESCAPING: "NonEscaping",
    VerdictClass.INDETERMINATE: "Indeterminate",
}


@dataclass(frozen=True)
class ClassifierConfig:
    max_iter: int = 10_000
    ambiguity_band: float = 0.05
    max_period: int = 64

    def __post_init__(self):
        if self.max_iter < 100:
            raise ValueError("max_iter must be >= 100")
        if not 0 < self.ambiguity_band < 0.5:
            raise ValueError("ambiguity_band must lie in (0, 0.5)")


DEFAULT_CONFIG = ClassifierConfig()


@dataclass(frozen=True)
class Verdict:
    classification: VerdictClass
    escape_index: Optional[int]
    entry_index: Optional[int]
    entry_modulus: Optional[float]
    iterations_used: int

    @property
    def definite(self) -> bool:
        return self.classification is not VerdictClass.INDETERMINATE

    def as_dict(self) -> dict:
        return {
            "class": self.classification.label,
            "escapeIndex": self.escape_index,
            "entryIndex": self.entry_index,
            "entryModulus": self.entry_modulus,
            "iterationsUsed": self.iterations_used,
        }


def classify(fmap: MapParams, cfg: ClassifierConfig = DEFAULT_CONFIG) -> Verdict:
    """Place lam in the Cantor locus, McMullen domain, a Sierpinski hole, or none.

    The free critical value is iterated until it leaves the escape disk. Steps
    just before escape whose modulus clears the critical circle by the
    ambiguity band are attributed to the basin of infinity; the last step
    before them must sit inside the band below the circle (trap door), or the
    verdict is Indeterminate.
    """
    buf = np.empty(cfg.max_iter + 2)
    code, esc, entry, mod, used = K.classify_orbit(
        fmap.lam, fmap.l, fmap.m, cfg.max_iter, cfg.ambiguity_band, buf)
    return Verdict(
        VerdictClass(code),
        None if esc < 0 else int(esc),
        None if entry < 0 else int(entry),
        None if math.isnan(mod) else float(mod),
        int(used),
    )


def classify_grid(exp: Exponents, bounds, width: int, height: int,
                  cfg: ClassifierConfig = DEFAULT_CONFIG, jobs: Optional[int] = None) -> FieldGrid:
    """Verdict codes over a rectangle of the parameter plane (code 0 at lam = 0)."""
    grid = FieldGrid.empty(width, height, bounds, PayloadKind.VERDICT)
    re_min, _, im_min, _ = grid.bounds
    dx, dy = grid.pixel_size

    def work(out, r0, r1):
        K.param_rows(out, r0, r1, re_min, im_min, dx, dy, exp.l, exp.m,
                     cfg.max_iter, cfg.ambiguity_band)

    run_tiled(work, grid.data, jobs)
    return grid


@dataclass(frozen=True)
class RealBracket:
    lambda0: float
    lambda1: float
    tol: float
    lambda0_bracket: tuple
    lambda1_bracket: tuple

    def as_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "tol": self.tol,
            "lambda0Bracket": list(self.lambda0_bracket),
            "lambda1Bracket": list(self.lambda1_bracket),
        }


class BracketingError(RuntimeError):
    def __init__(self, msg, samples):
        super().__init__(msg)
        self.samples = samples


def _bisect(pred, lo, hi, tol):
    # pred(lo) is False, pred(hi) is True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def bracket_real(exp: Exponents, tol: float = 1e-9, cfg: ClassifierConfig = DEFAULT_CONFIG,
                 lo: float = 1e-8, hi: float = 10.0, samples: int = 200) -> RealBracket:
    """Locate the ends of the non-escaping window on the positive real axis.

    lambda0 separates the McMullen domain from the window, lambda1 separates
    the window from the Cantor locus. A geometric pre-scan finds the sign
    changes, bisection narrows each to width <= tol.
    """
    if exp.l != exp.m or exp.l < 3:
        raise ValueError("bracket_real needs l == m >= 3")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def verdict(x):
        return classify(MapParams(complex(x), exp), cfg).classification

    lams = np.geomspace(lo, hi, samples)
    codes = [verdict(x) for x in lams]
    log_rows = [(float(x), c.label) for x, c in zip(lams, codes)]
    cc = [i for i, c in enumerate(codes) if c is VerdictClass.CANTOR_CIRCLES]
    cs = [i for i, c in enumerate(codes) if c is VerdictClass.CANTOR_SET]
    # no McMullen-domain sample may follow a Cantor-locus sample
    if not cc or not cs or max(cc) >= min(cs):
        raise BracketingError("bracketing failed", log_rows)
    i0, i1 = max(cc), min(cs)
    a0 = _bisect(lambda x: verdict(x) is not VerdictClass.CANTOR_CIRCLES, lams[i0], lams[i0 + 1], tol)
    a1 = _bisect(lambda x: verdict(x) is VerdictClass.CANTOR_SET, lams[i1 - 1], lams[i1], tol)
    return RealBracket(0.5 * (a0[0] + a0[1]), 0.5 * (a1[0] + a1[1]), tol,
                       (float(a0[0]), float(a0[1])), (float(a1[0]), float(a1[1])))


def detect_hyperbolic(fmap: MapParams, cfg: ClassifierConfig = DEFAULT_CONFIG) -> Optional[CycleReport]:
    """Attracting cycle captured by the free critical orbit, if any."""
    if classify(fmap, cfg).classification is not VerdictClass.NON_ESCAPING:
        raise ValueError("not in non-escaping locus")
    v = evaluate(fmap, critical_points(fmap)[0])
    orbit = iterate(fmap, v, cfg.max_iter)
    if not orbit.bounded:
        return None
    report = find_cycle(fmap, orbit, cfg.max_period)
    if report is None or not report.attracting:
        return None
    return report
