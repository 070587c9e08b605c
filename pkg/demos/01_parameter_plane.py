"""Walk through the escape trichotomy for z^3 + lambda/z^3.

Run from the repo root:  python3 demos/01_parameter_plane.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from mcmullen import (
    ClassifierConfig, Exponents, ImageSpec, MapParams, bracket_real, classify, detect_hyperbolic,
    encode_png, render_julia, render_param,
)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
exp = Exponents(3, 3)

# %% one parameter from each piece of the plane
for lam in (100, 1e-5, 0.125j, 0.02749275):
    v = classify(MapParams(lam, exp))
    print(f"lambda={lam!s:>12}  {v.classification.label:<20} escape={v.escape_index} entry={v.entry_index}")

# %% the real window between the McMullen domain and the Cantor locus
br = bracket_real(exp, tol=1e-9)
print(f"non-escaping window on the positive axis: [{br.lambda0:.9f}, {br.lambda1:.9f}]")
rep = detect_hyperbolic(MapParams(0.02749275, exp))
print(f"at 0.02749275: period {rep.period} cycle, |multiplier| = {abs(rep.multiplier):.2e}")

# %% parameter plane around the origin; the small disk is the McMullen domain,
# the specks around it are Sierpinski holes
g = render_param(exp, (-0.3, 0.3, -0.3, 0.3), 400, 400, ClassifierConfig(max_iter=500))
encode_png(g, ImageSpec(), out / "param_plane.png")
codes, counts = np.unique(g.data, return_counts=True)
print("verdict counts:", dict(zip(codes.tolist(), counts.tolist())))

# %% a Sierpinski carpet Julia set at the centre of a hole
j = render_julia(MapParams(0.125j, exp), (-1.6, 1.6, -1.6, 1.6), 600, 600, max_iter=200)
encode_png(j, ImageSpec(gamma=0.6), out / "julia_carpet.png")
print("wrote", out / "param_plane.png", "and", out / "julia_carpet.png")
