"""Quasicircle and separation estimates for the peripheral circles of a carpet.

Numbers are finite-depth estimates: they bound the curves traced at this
resolution and say nothing about the curves that are too small to see.
"""
import sys

from mcmullen import Exponents, MapParams, carpet_report, extract_peripheral, render_julia

res = int(sys.argv[1]) if len(sys.argv) > 1 else 1024
grid = render_julia(MapParams(0.125j, Exponents(3, 3)), (-1.6, 1.6, -1.6, 1.6), res, res, max_iter=200)

for depth in (2, 3, 4, 5):
    curves = extract_peripheral(grid, max_depth=depth, min_pixels=16)
    rep = carpet_report(curves)
    sep = rep.separation.s_minimum if rep.separation else float("nan")
    print(f"depth<={depth}: {len(curves):4d} curves  max K {rep.turning.k_estimate:6.3f}  min s {sep:.4f}")

print(rep.note)
print("worst K by depth:", {k: round(v, 3) for k, v in sorted(rep.per_depth.items())})
