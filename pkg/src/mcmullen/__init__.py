"""Numerical lab for the McMullen family f(z) = z**m + lam / z**l."""
from .dynamics import (
    INF, CycleKind, CycleReport, Exponents, MapParams, OrbitTrace, RealLevels,
    critical_points, critical_values, derivative, escape_radius, evaluate, find_cycle,
    iterate, real_levels,
)
from .trichotomy import (
    DEFAULT_CONFIG, BracketingError, ClassifierConfig, RealBracket, Verdict, VerdictClass,
    bracket_real, classify, classify_grid, detect_hyperbolic,
)
from .grid import (
    VERDICT_PALETTE, FieldGrid, GridFormatError, ImageSpec, PayloadKind, encode_png,
    read_grid, write_grid,
)
from .render import render_julia, render_param
from .cantor import (
    AnnulusModel, CantorIFS, IntervalUnion, MiddleAnnulusError, annulus_map,
    attractor_sample, hausdorff_distance, level_set, member, total_length,
)
from .surgery import (
    CellComplex, GeometryError, MeshParams, QuasiregularReport, SurgeryMap,
    attractor_render, build_complex, verify,
)
from .geometry import (
    CarpetReport, Curve, IntersectingCurvesError, SeparationReport, TurningReport,
    carpet_report, chordal, diameter, extract_peripheral, separation, turning_constant,
)

__version__ = "0.1.0"
