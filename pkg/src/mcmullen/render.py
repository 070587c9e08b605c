"""Tile-parallel rasterisation of dynamical and parameter planes."""
from typing import Optional

from . import _kernels as K
from .dynamics import Exponents, MapParams
from .grid import MAX_PIXELS, FieldGrid, PayloadKind, run_tiled
from .trichotomy import DEFAULT_CONFIG, ClassifierConfig, classify_grid


def render_julia(fmap: MapParams, bounds, width: int, height: int, max_iter: int = 500,
                 jobs: Optional[int] = None, max_pixels: int = MAX_PIXELS) -> FieldGrid:
    """Escape depth per pixel (-1 where the orbit stays bounded for max_iter steps)."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    grid = FieldGrid.empty(width, height, bounds, PayloadKind.ESCAPE, max_pixels)
    re_min, _, im_min, _ = grid.bounds
    dx, dy = grid.pixel_size

    def work(out, r0, r1):
        K.julia_rows(out, r0, r1, re_min, im_min, dx, dy, fmap.lam, fmap.l, fmap.m,
                     fmap.escape_radius, max_iter)

    run_tiled(work, grid.data, jobs)
    return grid


def render_param(exp: Exponents, bounds, width: int, height: int,
                 cfg: ClassifierConfig = DEFAULT_CONFIG, jobs: Optional[int] = None) -> FieldGrid:
    return classify_grid(exp, bounds, width, height, cfg, jobs)
