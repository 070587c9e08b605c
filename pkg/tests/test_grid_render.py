import struct

import numpy as np
import pytest
from PIL import Image

from mcmullen import (
    ClassifierConfig, Exponents, FieldGrid, GridFormatError, ImageSpec, MapParams, PayloadKind,
    encode_png, read_grid, render_julia, render_param, write_grid,
)
from mcmullen.grid import MAGIC, grid_from_bytes, grid_rgb, run_tiled


def small_grid(kind=PayloadKind.ESCAPE):
    data = np.arange(12, dtype=np.int32).reshape(3, 4) % 6
    return FieldGrid(4, 3, (-1.0, 1.0, -0.5, 0.5), kind, data)


def test_round_trip(tmp_path):
    g = small_grid()
    write_grid(g, tmp_path / "a.grid")
    h = read_grid(tmp_path / "a.grid")
    assert h == g and h.digest() == g.digest()
    assert h.bounds == g.bounds and h.kind is g.kind


def test_header_layout():
    raw = small_grid(PayloadKind.VERDICT).to_bytes()
    magic, version, w, h, a, b, c, d, kind = struct.unpack_from("<4sIII4dB", raw)
    assert (magic, version, w, h, kind) == (MAGIC, 1, 4, 3, 1)
    assert (a, b, c, d) == (-1.0, 1.0, -0.5, 0.5)
    assert len(raw) == struct.calcsize("<4sIII4dB") + 4 * 12
    # payload row 0 is the im_min row, little-endian int32
    assert np.frombuffer(raw[-48:-32], "<i4").tolist() == [0, 1, 2, 3]


@pytest.mark.parametrize("mutate,msg", [
    (lambda r: b"XXXX" + r[4:], "bad magic"),
    (lambda r: r[:4] + struct.pack("<I", 2) + r[8:], "unsupported version"),
    (lambda r: r[:20], "truncated header"),
    (lambda r: r[:-4], "truncated payload"),
    (lambda r: r + b"\0", "trailing bytes"),
])
def test_format_errors(mutate, msg):
    with pytest.raises(GridFormatError, match=msg):
        grid_from_bytes(mutate(small_grid().to_bytes()))


def test_pixel_centers():
    g = FieldGrid.empty(1, 1, (0, 2, 0, 4), PayloadKind.ESCAPE)
    assert g.pixel_centers()[0, 0] == 1 + 2j
    g = FieldGrid.empty(2, 2, (0, 2, 0, 2), PayloadKind.ESCAPE)
    assert g.pixel_centers().tolist() == [[0.5 + 0.5j, 1.5 + 0.5j], [0.5 + 1.5j, 1.5 + 1.5j]]


def test_bad_bounds_and_budget():
    with pytest.raises(ValueError):
        FieldGrid.empty(2, 2, (1, 1, 0, 1), PayloadKind.ESCAPE)
    with pytest.raises(MemoryError):
        render_julia(MapParams.of(0.1), (-1, 1, -1, 1), 1000, 1000, max_pixels=10_000)


def test_run_tiled_covers_every_row():
    out = np.zeros((37, 3), np.int32)

    def work(o, r0, r1):
        o[r0:r1] += 1

    run_tiled(work, out, jobs=4, tile_rows=5)
    assert np.all(out == 1)


def test_julia_depths():
    f = MapParams.of(1e-5)
    g = render_julia(f, (-2, 2, -2, 2), 64, 64, max_iter=100, jobs=1)
    z = g.pixel_centers()
    assert np.all(g.data[np.abs(z) > f.escape_radius] == 0)
    # trap door around the pole: |z| < 0.01 maps past the escape radius in one step
    g = render_julia(f, (-0.01, 0.01, -0.01, 0.01), 8, 8, max_iter=100, jobs=1)
    assert np.all(g.data == 1)


def test_julia_determinism_across_workers():
    f = MapParams.of(0.125j)
    digests = {j: render_julia(f, (-1.5, 1.5, -1.5, 1.5), 96, 80, 100, jobs=j).digest() for j in (1, 2, 8)}
    assert len(set(digests.values())) == 1


def test_param_render_examples():
    exp = Exponents(3, 3)
    cfg = ClassifierConfig(max_iter=2000)
    g = render_param(exp, (-0.1, 0.1, -0.1, 0.1), 33, 33, cfg, jobs=1)
    assert g.kind is PayloadKind.VERDICT
    assert g.data[16, 16] == 0                              # lambda = 0 exactly
    assert g.data[16, 17] == 2 and g.data[17, 16] == 2      # McMullen domain around it
    g = render_param(exp, (0.0274, 0.0276, -1e-5, 1e-5), 5, 1, cfg, jobs=1)
    assert np.all(g.data == 4)


def test_png_orientation_and_size(tmp_path):
    g = small_grid(PayloadKind.VERDICT)
    encode_png(g, ImageSpec(), tmp_path / "v.png")
    img = np.asarray(Image.open(tmp_path / "v.png"))
    assert img.shape == (3, 4, 3) and img.dtype == np.uint8
    # top image row is the im_max row of the payload
    assert np.array_equal(img, grid_rgb(g))
    assert np.array_equal(img[0], grid_rgb(g)[0])
    assert len({tuple(p) for p in img.reshape(-1, 3)}) == 6

    one = FieldGrid(1, 1, (0, 1, 0, 1), PayloadKind.ESCAPE, np.array([[3]]))
    encode_png(one, ImageSpec(), tmp_path / "one.png")
    assert Image.open(tmp_path / "one.png").size == (1, 1)


def test_row_flip():
    data = np.array([[1], [2]], np.int32)
    g = FieldGrid(1, 2, (0, 1, 0, 1), PayloadKind.VERDICT, data)
    rgb = grid_rgb(g)
    pal = ImageSpec().palette
    assert tuple(rgb[0, 0]) == pal[2] and tuple(rgb[1, 0]) == pal[1]


def test_palette_must_cover_payload():
    g = FieldGrid(2, 1, (0, 1, 0, 1), PayloadKind.VERDICT, np.array([[1, 9]]))
    with pytest.raises(ValueError, match=r"\[9\]"):
        grid_rgb(g)


def test_gamma_changes_colors_not_geometry():
    g = render_julia(MapParams.of(0.125j), (-1.5, 1.5, -1.5, 1.5), 40, 40, 50, jobs=1)
    a, b = grid_rgb(g, ImageSpec(gamma=1.0)), grid_rgb(g, ImageSpec(gamma=2.0))
    assert not np.array_equal(a, b)
    bounded = g.data[::-1] < 0
    assert np.array_equal(np.all(a == 0, axis=2) & bounded, np.all(b == 0, axis=2) & bounded)
    # equal depths get equal colors under both gammas
    for d in np.unique(g.data):
        sel = g.data[::-1] == d
        assert len({tuple(p) for p in a[sel]}) == 1 and len({tuple(p) for p in b[sel]}) == 1
