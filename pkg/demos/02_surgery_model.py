"""Build the degree l+m model map and look at what it does.

The model is the standard Cantor-circle picture with a cell complex glued
into the middle annulus. verify() counts preimages, checks the seams and the
rotation symmetry, and samples the dilatation.
"""
import sys
from pathlib import Path

import numpy as np

from mcmullen import AnnulusModel, Exponents, ImageSpec, SurgeryMap, encode_png, verify
from mcmullen.surgery import attractor_render, write_mesh_csv

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

for l, m in ((2, 3), (3, 3)):
    F = SurgeryMap(Exponents(l, m), 0.5)
    rep = verify(F, sample_budget=5000, degree_targets=60)
    print(f"({l},{m}) r1={F.r1:.4f} r2={F.r2:.4f} cells={F.complex.counts}")
    print("   ", {k: (round(v, 4) if isinstance(v, float) else v) for k, v in rep.as_dict().items()})
    with open(out / f"mesh_{l}{m}.csv", "w") as fh:
        write_mesh_csv(F.complex, fh)

# %% escape depth under F; the long-lived points sit over the radial Cantor set
F = SurgeryMap(Exponents(2, 3), 0.5)
g = attractor_render(F, (-1.1, 1.1, -1.1, 1.1), 500, 500, max_iter=30)
encode_png(g, ImageSpec(gamma=0.5), out / "surgery_depth.png")
lv = AnnulusModel(Exponents(2, 3)).radial_level(3)
print("radial level 3:", [(float(a), float(b)) for a, b in lv.intervals])
r = np.abs(g.pixel_centers())[g.data >= 5]
print(f"{len(r)} pixels survive 5 steps, moduli in [{r.min():.3f}, {r.max():.3f}]")
