"""Command-line front end.

Exit codes: 0 success, 2 usage or invalid parameters, 3 indeterminate or
ambiguous result, 4 I/O failure.
"""
import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from .cantor import CantorIFS, write_levels_csv
from .dynamics import Exponents, MapParams
from .geometry import carpet_report, diameter, extract_peripheral
from .grid import VERDICT_PALETTE, GridFormatError, ImageSpec, PayloadKind, encode_png, read_grid, write_grid
from .render import render_julia, render_param
from .surgery import SurgeryMap, verify, write_mesh_csv
from .trichotomy import BracketingError, ClassifierConfig, VerdictClass, bracket_real, classify

EXIT_OK, EXIT_USAGE, EXIT_INDETERMINATE, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "l": 3,
    "m": 3,
    "lambda_re": 0.0,
    "lambda_im": 0.0,
    "max_iter": 10_000,
    "ambiguity_band": 0.05,
    "r0": 0.5,
    "resolution": 512,
    "bounds": (-2.0, 2.0, -2.0, 2.0),
}
PALETTE_KEYS = tuple(f"palette_{k}" for k in range(6))
CONFIG_KEYS = set(DEFAULTS) | set(PALETTE_KEYS)


class UsageError(Exception):
    pass


def _parse_bounds(text):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise UsageError(f"bounds need four comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_rgb(text):
    parts = [int(p) for p in text.replace(" ", "").split(",")]
    if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
        raise UsageError(f"palette entry needs r,g,b in 0..255, got {text!r}")
    return tuple(parts)


_CONVERT = {
    "l": int, "m": int, "lambda_re": float, "lambda_im": float, "max_iter": int,
    "ambiguity_band": float, "r0": float, "resolution": int, "bounds": _parse_bounds,
    **{k: _parse_rgb for k in PALETTE_KEYS},
}


def load_config(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                out[key] = _CONVERT[key](value)
            except ValueError as e:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {e}") from None
    return out


def _parse_lambda(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse lambda {text!r}") from None


def effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    n = getattr(args, "n", None)
    if n is not None:
        cfg["l"] = cfg["m"] = n
    for key in ("l", "m", "max_iter", "ambiguity_band", "r0", "resolution"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    lam = getattr(args, "lam", None)
    if lam is not None:
        z = _parse_lambda(lam)
        cfg["lambda_re"], cfg["lambda_im"] = z.real, z.imag
    if getattr(args, "bounds", None) is not None:
        cfg["bounds"] = _parse_bounds(args.bounds)
    return cfg


def _echo(cfg) -> dict:
    out = {k: v for k, v in cfg.items() if k not in PALETTE_KEYS}
    out["bounds"] = list(cfg["bounds"])
    for k in PALETTE_KEYS:
        if k in cfg:
            out[k] = list(cfg[k])
    return out


def _classifier(cfg) -> ClassifierConfig:
    return ClassifierConfig(max_iter=cfg["max_iter"], ambiguity_band=cfg["ambiguity_band"])


def _lam(cfg) -> complex:
    return complex(cfg["lambda_re"], cfg["lambda_im"])


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _image_spec(cfg, gamma=1.0) -> ImageSpec:
    palette = dict(VERDICT_PALETTE)
    for k in range(6):
        if f"palette_{k}" in cfg:
            palette[k] = cfg[f"palette_{k}"]
    return ImageSpec(palette=palette, gamma=gamma)


# ---------------------------------------------------------------- commands

def cmd_classify(args) -> int:
    cfg = effective_config(args)
    fmap = MapParams(_lam(cfg), Exponents(cfg["l"], cfg["m"]))
    v = classify(fmap, _classifier(cfg))
    _dump({**v.as_dict(), "config": _echo(cfg)})
    return EXIT_OK if v.definite else EXIT_INDETERMINATE


def cmd_scan_ray(args) -> int:
    cfg = effective_config(args)
    exp = Exponents(cfg["l"], cfg["m"])
    ccfg = _classifier(cfg)
    if args.csv:
        lams = np.geomspace(args.lo, args.hi, args.samples)
        with open(args.csv, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "verdictCode"])
            for x in lams:
                w.writerow([repr(float(x)), int(classify(MapParams(complex(x), exp), ccfg).classification)])
    try:
        br = bracket_real(exp, args.tol, ccfg, args.lo, args.hi)
    except BracketingError as e:
        _dump({"error": str(e), "samples": e.samples, "config": _echo(cfg)}, args.json)
        return EXIT_INDETERMINATE
    _dump({**br.as_dict(), "config": _echo(cfg)}, args.json)
    return EXIT_OK


def _resolution(args, cfg):
    w = args.width or cfg["resolution"]
    h = args.height or cfg["resolution"]
    return w, h


def cmd_render_julia(args) -> int:
    cfg = effective_config(args)
    fmap = MapParams(_lam(cfg), Exponents(cfg["l"], cfg["m"]))
    w, h = _resolution(args, cfg)
    grid = render_julia(fmap, cfg["bounds"], w, h, cfg["max_iter"], jobs=args.jobs)
    return _emit_grid(grid, args, cfg)


def cmd_render_param(args) -> int:
    cfg = effective_config(args)
    w, h = _resolution(args, cfg)
    grid = render_param(Exponents(cfg["l"], cfg["m"]), cfg["bounds"], w, h, _classifier(cfg), jobs=args.jobs)
    return _emit_grid(grid, args, cfg)


def _emit_grid(grid, args, cfg) -> int:
    write_grid(grid, args.out)
    if args.png:
        encode_png(grid, _image_spec(cfg, args.gamma), args.png)
    summary = {"grid": args.out, "png": args.png, "sha256": grid.digest(),
               "width": grid.width, "height": grid.height, "kind": grid.kind.name.lower()}
    if grid.kind is PayloadKind.VERDICT:
        codes, counts = np.unique(grid.data, return_counts=True)
        summary["counts"] = {VerdictClass(int(c)).label: int(k) for c, k in zip(codes, counts)}
    _dump({**summary, "config": _echo(cfg)})
    return EXIT_OK


def cmd_metrics(args) -> int:
    cfg = effective_config(args)
    grid = read_grid(args.grid)
    curves = extract_peripheral(grid, args.max_depth, args.min_pixels)
    if not curves:
        _dump({"curves": 0, "droppedOpen": curves.dropped_open, "config": _echo(cfg)}, args.json)
        return EXIT_INDETERMINATE
    rep = carpet_report(curves, args.pairs)
    if args.csv:
        with open(args.csv, "w") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["curveId", "depth", "vertices", "diameter", "kEstimate"])
            for k, (c, t) in enumerate(zip(curves, rep.per_curve)):
                w.writerow([k, c.source_depth, len(c), repr(diameter(c)), repr(t.k_estimate)])
    sep = rep.separation
    _dump({
        "note": rep.note,
        "curves": len(curves),
        "droppedOpen": curves.dropped_open,
        "maxK": rep.turning.k_estimate,
        "maxKCurve": rep.worst_curve,
        "maxKWitness": list(rep.turning.witness_pair),
        "perDepthMaxK": {str(k): v for k, v in sorted(rep.per_depth.items())},
        "sMin": None if sep is None else sep.s_minimum,
        "sMinWitness": None if sep is None else list(sep.witness_curves),
        "pairCount": None if sep is None else sep.pair_count,
        "config": {**_echo(cfg), "max_depth": args.max_depth, "min_pixels": args.min_pixels,
                   "pairs": args.pairs},
    }, args.json)
    return EXIT_OK


def cmd_surgery(args) -> int:
    cfg = effective_config(args)
    fmap = SurgeryMap(Exponents(cfg["l"], cfg["m"]), cfg["r0"])
    rep = verify(fmap, args.samples, seed=args.seed)
    if args.mesh_out:
        with open(args.mesh_out, "w") as fh:
            write_mesh_csv(fmap.complex, fh)
    mesh = fmap.complex.mesh
    _dump({**rep.as_dict(), "r1": fmap.r1, "r2": fmap.r2,
           "mesh": {k: getattr(mesh, k) for k in mesh.__dataclass_fields__},
           "config": {**_echo(cfg), "samples": args.samples, "seed": args.seed}}, args.report)
    return EXIT_OK


def cmd_cantor(args) -> int:
    cfg = effective_config(args)
    ifs = CantorIFS(Exponents(cfg["l"], cfg["m"]))
    levels = range(args.level + 1) if args.all_levels else [args.level]
    if args.out:
        with open(args.out, "w") as fh:
            write_levels_csv(ifs, levels, fh)
    else:
        buf = io.StringIO()
        write_levels_csv(ifs, levels, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p, lam=False, exps=True):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default MCM_JOBS or all cores)")
    if exps:
        p.add_argument("--l", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int, help="shorthand for --l N --m N")
    if lam:
        p.add_argument("--lambda", dest="lam", help="complex parameter, e.g. 0.125j or -0.02+0.01i")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--ambiguity-band", dest="ambiguity_band", type=float)


def _render_flags(p):
    p.add_argument("--bounds", help="re_min,re_max,im_min,im_max")
    p.add_argument("--res", dest="resolution", type=int, help="square resolution")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--out", required=True, help="grid file")
    p.add_argument("--png")
    p.add_argument("--gamma", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcmullen", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="escape-trichotomy verdict for one parameter")
    _common(p, lam=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan-ray", help="bracket the non-escaping window on the positive real axis")
    _common(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--lo", type=float, default=1e-8)
    p.add_argument("--hi", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=1000, help="CSV sweep size")
    p.add_argument("--csv", help="write (lambda, verdictCode) sweep here")
    p.add_argument("--json", help="write the bracket here instead of stdout")
    p.set_defaults(func=cmd_scan_ray)

    p = sub.add_parser("render-julia", help="escape-depth grid of the dynamical plane")
    _common(p, lam=True)
    _render_flags(p)
    p.set_defaults(func=cmd_render_julia)

    p = sub.add_parser("render-param", help="verdict grid of the parameter plane")
    _common(p)
    _render_flags(p)
    p.set_defaults(func=cmd_render_param)

    p = sub.add_parser("metrics", help="bounded-turning and separation report for a grid")
    _common(p, exps=False)
    p.add_argument("grid")
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--min-pixels", type=int, default=16)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("surgery", help="build and verify the quasiregular model map")
    _common(p)
    p.add_argument("--r0", type=float)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.add_argument("--mesh-out", dest="mesh_out")
    p.set_defaults(func=cmd_surgery)

    p = sub.add_parser("cantor", help="exact level sets of the interval IFS as CSV")
    _common(p)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--all-levels", action="store_true", help="emit levels 0..LEVEL")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cantor)
    return ap


# options whose values may start with "-" (negative numbers)
_NEGATIVE_OK = ("--bounds", "--lambda")


def _glue_negative(argv):
    out, it = [], iter(argv)
    for tok in it:
        if tok in _NEGATIVE_OK:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args(_glue_negative(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        ap.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"mcmullen: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GridFormatError, OSError) as e:
        print(f"mcmullen: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, MemoryError) as e:
        ap.print_usage(sys.stderr)
        print(f"mcmullen: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
