"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
numbers before asserting. Run directly with ``python3 tests/test_acceptance.py``
or through pytest.
"""
import cmath
import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from mcmullen import (
    CantorIFS, Curve, Exponents, MapParams, SurgeryMap, VerdictClass,
    bracket_real, carpet_report, chordal, classify, critical_points, detect_hyperbolic, evaluate,
    extract_peripheral, level_set, member, render_julia, render_param, separation, total_length,
    turning_constant, verify,
)
from mcmullen.dynamics import CycleKind

SE_LAMBDA = 0.125j          # centre of a Sierpinski hole with entry index 1
LAMBDA_SUPER = 0.02749275
LAMBDA_PREPER = 0.02583244


def report(n, ok, detail):
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}"
    capman = _CAPTURE.get("capsys")
    if capman is not None:
        with capman.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


_CAPTURE = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _CAPTURE["capsys"] = capsys
    yield
    _CAPTURE.pop("capsys", None)


def test_1_trichotomy_sanity():
    exp = Exponents(3, 3)
    classify(MapParams(0.5, exp))  # warm the compiled kernel
    results = {}
    for lam, want in ((100, VerdictClass.CANTOR_SET), (1e-5, VerdictClass.CANTOR_CIRCLES),
                      (LAMBDA_SUPER, VerdictClass.NON_ESCAPING)):
        t = time.perf_counter()
        v = classify(MapParams(lam, exp))
        results[lam] = (v.classification, time.perf_counter() - t, want)
    # the positive real slice of the window is a Mandelbrot copy without
    # Sierpinski holes, so the sweep runs along the negative axis
    sweep = -np.geomspace(1e-4, 1.0, 1000)
    se = [x for x in sweep if classify(MapParams(x, exp)).classification is VerdictClass.SIERPINSKI_ESCAPING]
    ok = all(c is w and dt < 1.0 for c, dt, w in results.values()) and len(se) > 0
    detail = ", ".join(f"{lam}->{c.label} ({dt * 1e3:.1f} ms)" for lam, (c, dt, _) in results.items())
    report(1, ok, f"{detail}; {len(se)} SierpinskiEscaping of 1000 on [-1, -1e-4], first {se[0] if se else None}")
    assert ok


def test_2_real_axis_window():
    exp = Exponents(3, 3)
    br = bracket_real(exp, tol=1e-9)
    sup = detect_hyperbolic(MapParams(LAMBDA_SUPER, exp))
    pre = detect_hyperbolic(MapParams(LAMBDA_PREPER, exp))
    ok = (br.lambda0 < LAMBDA_PREPER and br.lambda1 > LAMBDA_SUPER
          and sup is not None and abs(sup.multiplier) < 1e-6 and sup.kind is CycleKind.SUPERATTRACTING
          and pre is None)
    mult = "none" if sup is None else f"period {sup.period}, |mult| {abs(sup.multiplier):.3e}"
    report(2, ok, f"lambda0={br.lambda0:.10f} lambda1={br.lambda1:.10f}; at {LAMBDA_SUPER}: {mult}; "
                  f"at {LAMBDA_PREPER}: {'no attracting cycle' if pre is None else pre}")
    assert ok


def test_3_symmetry_suite():
    rng = np.random.default_rng(3)
    worst_f = worst_orbit = worst_F = 0.0
    for l, m in ((2, 3), (3, 3), (2, 4), (4, 5)):
        n = l + m
        w = cmath.exp(2j * math.pi / n)
        for _ in range(50):
            lam = complex(*rng.normal(size=2)) * 10 ** rng.uniform(-3, 0)
            fmap = MapParams(lam, Exponents(l, m))
            z = (rng.normal(size=20) + 1j * rng.normal(size=20))
            lhs = evaluate(fmap, w * z)
            rhs = w ** m * evaluate(fmap, z)
            worst_f = max(worst_f, float(np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs)))))
            # moduli of the free critical orbits agree until escape
            orbits = np.array(critical_points(fmap))
            for _ in range(8):
                orbits = evaluate(fmap, orbits)
                mods = np.abs(orbits)
                if not np.all(np.isfinite(mods)) or mods.max() > fmap.escape_radius:
                    break
                worst_orbit = max(worst_orbit, float((mods.max() - mods.min()) / mods.max()))
        F = SurgeryMap(Exponents(l, m), 0.5)
        z = np.sqrt(rng.uniform(0.1, 2.0, 2000)) * np.exp(1j * rng.uniform(0, 2 * math.pi, 2000))
        worst_F = max(worst_F, float(np.max(np.abs(F(w * z) - w ** m * F(z)))))
    ok = worst_f < 1e-9 and worst_orbit < 1e-9 and worst_F < 1e-9
    report(3, ok, f"f equivariance {worst_f:.2e}, critical-orbit modulus spread {worst_orbit:.2e}, "
                  f"F equivariance {worst_F:.2e}")
    assert ok


def test_4_cantor_exactness():
    ok = True
    for l, m in ((3, 3), (2, 3), (2, 4)):
        ifs = CantorIFS(Exponents(l, m))
        for n in range(16):
            lv = level_set(ifs, n)
            ok &= len(lv) == 2 ** n
            ok &= lv.length() == (Fraction(1, l) + Fraction(1, m)) ** n == total_length(ifs, n)
    rnd = random.Random(4)
    ifs = CantorIFS(Exponents(3, 3))
    agree = 0
    for _ in range(1000):
        den = rnd.randint(1, 3 ** 8)
        x = Fraction(rnd.randint(0, den), den)
        n = rnd.randint(0, 12)
        agree += member(ifs, x, n) == _base3_oracle(x, n)
    ok &= agree == 1000
    report(4, ok, f"counts 2^n and lengths exact for n<=15 on 3 pairs; base-3 oracle agreement {agree}/1000")
    assert ok


def _base3_oracle(x, n):
    """x lies in I_n of the middle-thirds set iff some base-3 expansion avoids digit 1 in n places."""
    # scan the 2**n level-n intervals [k/3^n, (k+1)/3^n] whose index digits avoid 1
    scaled = x * 3 ** n
    lo = math.floor(scaled)
    cands = {lo, lo - 1} if scaled == lo else {lo}
    for k in cands:
        if 0 <= k < 3 ** n and _digits_avoid_one(k, n):
            return True
    return False


def _digits_avoid_one(k, n):
    for _ in range(n):
        if k % 3 == 1:
            return False
        k //= 3
    return True


def test_5_surgery_verification():
    lines, ok = [], True
    for l, m in ((2, 3), (3, 3)):
        rep = verify(SurgeryMap(Exponents(l, m), 0.5), sample_budget=10_000, degree_targets=100)
        good = (rep.degree_count == l + m and rep.degree_range == (l + m, l + m)
                and rep.seam_error < 1e-9 and rep.symmetry_error < 1e-9
                and rep.max_dilatation <= 0.99 and rep.pass_through_violations == 0)
        ok &= good
        lines.append(f"({l},{m}) degree {rep.degree_count} range {rep.degree_range} seam {rep.seam_error:.1e} "
                     f"sym {rep.symmetry_error:.1e} max|mu| {rep.max_dilatation:.4f} "
                     f"pass-through {rep.pass_through_violations}")
    report(5, ok, "; ".join(lines))
    assert ok


def _circle(radius, n, center=0j):
    return Curve(center + radius * np.exp(2j * np.pi * np.arange(n) / n))


def _cardioid(n):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return Curve((1 + np.cos(t)) * np.exp(1j * t) / 4)


def test_6_metrics_oracles():
    k_circle = turning_constant(_circle(0.7, 2000), 10_000)
    ks = [turning_constant(_cardioid(n), 10_000).k_estimate for n in (500, 2000, 8000)]
    inner, outer = _circle(0.1, 720), _circle(0.3, 720)
    sep = separation([inner, outer])
    exact = chordal(0.1, 0.3) / chordal(0.1, -0.1)
    ok = (1 <= k_circle.k_estimate <= 1.01 and ks[0] > 10 and ks[0] < ks[1] < ks[2]
          and abs(sep.s_minimum - exact) < 1e-3)
    report(6, ok, f"circle k={k_circle.k_estimate:.5f} ({k_circle.sample_pairs} pairs); cardioid k at "
                  f"500/2000/8000 vertices = {ks[0]:.1f}/{ks[1]:.1f}/{ks[2]:.1f}; "
                  f"concentric s={sep.s_minimum:.6f} vs closed form {exact:.6f}")
    assert ok


def _carpet(res):
    grid = render_julia(MapParams(SE_LAMBDA, Exponents(3, 3)), (-1.6, 1.6, -1.6, 1.6), res, res, max_iter=200)
    curves = extract_peripheral(grid, max_depth=5, min_pixels=16)
    return curves, carpet_report(curves)


@pytest.mark.slow
def test_7_carpet_hypotheses():
    assert classify(MapParams(SE_LAMBDA, Exponents(3, 3))).classification is VerdictClass.SIERPINSKI_ESCAPING
    c1, r1 = _carpet(2048)
    c2, r2 = _carpet(4096)
    k1, k2 = r1.turning.k_estimate, r2.turning.k_estimate
    s1, s2 = r1.separation.s_minimum, r2.separation.s_minimum
    stable = 0.5 <= k2 / k1 <= 2 and 0.5 <= s2 / s1 <= 2
    ok = len(c1) >= 20 and math.isfinite(k1) and s1 > 0 and stable
    report(7, ok, f"lambda={SE_LAMBDA}: 2048^2 {len(c1)} curves maxK {k1:.3f} sMin {s1:.4f}; "
                  f"4096^2 {len(c2)} curves maxK {k2:.3f} sMin {s2:.4f}; ratios {k2 / k1:.2f}, {s2 / s1:.2f}")
    assert ok


@pytest.mark.slow
def test_8_performance_determinism():
    exp = Exponents(3, 3)
    bounds = (-0.1, 0.1, -0.1, 0.1)
    render_param(exp, bounds, 8, 8, jobs=1)  # compile outside the timed run
    t = time.perf_counter()
    g1 = render_param(exp, bounds, 512, 512, jobs=1)
    dt = time.perf_counter() - t
    digests = {j: render_param(exp, bounds, 512, 512, jobs=j).digest() for j in (2, 8)}
    digests[1] = g1.digest()
    ok = dt < 60 and len(set(digests.values())) == 1
    report(8, ok, f"512^2 parameter render single worker {dt:.1f} s; sha256 for 1/2/8 workers "
                  f"{'identical' if len(set(digests.values())) == 1 else digests}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
