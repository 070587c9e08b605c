"""Compiled inner loops shared by the scalar API and the raster renderers.

Every grid pixel and every scalar call run through the same jitted code, so a
1x1 grid and a direct call agree bit for bit.
"""
import cmath
import math

import numba as nb
import numpy as np

# verdict codes, stable on disk
UNDEFINED = 0
CANTOR_SET = 1
CANTOR_CIRCLES = 2
SIERPINSKI_ESCAPING = 3
NON_ESCAPING = 4
INDETERMINATE = 5


@nb.njit(cache=True, nogil=True)
def ipow(z, n):
    r = 1.0 + 0.0j
    for _ in range(n):
        r *= z
    return r


@nb.njit(cache=True, nogil=True)
def fmap(z, lam, l, m):
    return ipow(z, m) + lam / ipow(z, l)


@nb.njit(cache=True, nogil=True)
def escape_radius(lam_abs, m):
    return max(1.0, (2.0 + lam_abs) ** (1.0 / (m - 1)))


@nb.njit(cache=True, nogil=True)
def crit_radius(lam_abs, l, m):
    return (lam_abs * l / m) ** (1.0 / (l + m))


@nb.njit(cache=True, nogil=True)
def principal_critical_point(lam, l, m):
    return cmath.exp(cmath.log(lam * l / m) / (l + m))


@nb.njit(cache=True, nogil=True)
def escape_depth(z, lam, l, m, radius, max_iter):
    """First k with |f^k(z)| > radius, or -1 if none within max_iter steps."""
    for k in range(max_iter + 1):
        # negated test so nan/inf count as escaped
        if not (abs(z) <= radius):
            return k
        if k == max_iter:
            break
        if z == 0:
            return k + 1
        z = fmap(z, lam, l, m)
    return -1


@nb.njit(cache=True, nogil=True)
def classify_orbit(lam, l, m, max_iter, band, moduli):
    """Trichotomy verdict for one parameter.

    Returns (code, escape_index, entry_index, entry_modulus, iterations_used)
    with -1 / nan standing in for absent values. ``moduli`` is scratch space
    of length >= max_iter + 1.
    """
    lam_abs = abs(lam)
    crit = crit_radius(lam_abs, l, m)
    radius = escape_radius(lam_abs, m)
    z = fmap(principal_critical_point(lam, l, m), lam, l, m)
    n = -1
    for k in range(max_iter + 1):
        a = abs(z)
        moduli[k] = a
        if not (a <= radius):
            n = k
            break
        if k == max_iter:
            break
        if z == 0:
            moduli[k + 1] = math.inf
            n = k + 1
            break
        z = fmap(z, lam, l, m)
    if n < 0:
        return NON_ESCAPING, -1, -1, math.nan, max_iter
    first = n
    hi = crit * (1.0 + band)
    lo = crit * (1.0 - band)
    while n > 0 and moduli[n - 1] > hi:
        n -= 1
    if n == 0:
        return CANTOR_SET, first, -1, math.nan, first
    a = moduli[n - 1]
    if a < lo:
        entry = n - 1
        code = CANTOR_CIRCLES if entry == 0 else SIERPINSKI_ESCAPING
        return code, first, entry, a, first
    return INDETERMINATE, first, -1, math.nan, first


@nb.njit(cache=True, nogil=True)
def julia_rows(out, row0, row1, re_min, im_min, dx, dy, lam, l, m, radius, max_iter):
    width = out.shape[1]
    for j in range(row0, row1):
        y = im_min + (j + 0.5) * dy
        for i in range(width):
            x = re_min + (i + 0.5) * dx
            out[j, i] = escape_depth(complex(x, y), lam, l, m, radius, max_iter)


@nb.njit(cache=True, nogil=True)
def param_rows(out, row0, row1, re_min, im_min, dx, dy, l, m, max_iter, band):
    width = out.shape[1]
    moduli = np.empty(max_iter + 2)
    for j in range(row0, row1):
        y = im_min + (j + 0.5) * dy
        for i in range(width):
            x = re_min + (i + 0.5) * dx
            lam = complex(x, y)
            if lam == 0:
                out[j, i] = UNDEFINED
            else:
                out[j, i] = classify_orbit(lam, l, m, max_iter, band, moduli)[0]
