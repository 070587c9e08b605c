"""Raster container, binary persistence and PNG encoding.

Grid file layout (all little-endian)::

    magic    4 bytes  b"MCMG"
    version  u32      1
    width    u32
    height   u32
    bounds   4 x f64  re_min, re_max, im_min, im_max
    kind     u8       0 escape depth, 1 verdict code
    payload  i32 * width * height, row-major, row 0 at im_min

Pixel (i, j) samples re_min + (i + 0.5) * (re_max - re_min) / width and the
analogous imaginary coordinate.
"""
import enum
import hashlib
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

MAGIC = b"MCMG"
VERSION = 1
_HEADER = struct.Struct("<4sIII4dB")

# default cap on width * height (int32 payload, so 1 GiB)
MAX_PIXELS = 1 << 28


class PayloadKind(enum.IntEnum):
    ESCAPE = 0
    VERDICT = 1


class GridFormatError(ValueError):
    pass


def _check_bounds(bounds):
    re_min, re_max, im_min, im_max = (float(b) for b in bounds)
    if not (re_max > re_min and im_max > im_min):
        raise ValueError(f"degenerate bounds {bounds}")
    return re_min, re_max, im_min, im_max


@dataclass
class FieldGrid:
    width: int
    height: int
    bounds: tuple
    kind: PayloadKind
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.bounds = _check_bounds(self.bounds)
        self.kind = PayloadKind(self.kind)
        self.data = np.ascontiguousarray(self.data, dtype=np.int32)
        if self.data.shape != (self.height, self.width):
            raise ValueError(f"payload shape {self.data.shape} != {(self.height, self.width)}")

    @classmethod
    def empty(cls, width, height, bounds, kind, max_pixels=MAX_PIXELS):
        if width < 1 or height < 1:
            raise ValueError("width and height must be >= 1")
        if width * height > max_pixels:
            raise MemoryError(f"grid of {width}x{height} exceeds the memory budget of {max_pixels} pixels")
        return cls(width, height, bounds, kind, np.zeros((height, width), np.int32))

    @property
    def pixel_size(self):
        re_min, re_max, im_min, im_max = self.bounds
        return (re_max - re_min) / self.width, (im_max - im_min) / self.height

    def pixel_centers(self):
        """Complex sample points, shape (height, width)."""
        re_min, _, im_min, _ = self.bounds
        dx, dy = self.pixel_size
        x = re_min + (np.arange(self.width) + 0.5) * dx
        y = im_min + (np.arange(self.height) + 0.5) * dy
        return x[None, :] + 1j * y[:, None]

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.width, self.height, *self.bounds, int(self.kind))
        return head + self.data.astype("<i4").tobytes()

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, FieldGrid):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()


def write_grid(grid: FieldGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(grid.to_bytes())


def grid_from_bytes(raw: bytes) -> FieldGrid:
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise GridFormatError("bad magic")
    if len(raw) < _HEADER.size:
        raise GridFormatError("truncated header")
    _, version, width, height, a, b, c, d, kind = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise GridFormatError(f"unsupported version {version}")
    if kind not in (0, 1):
        raise GridFormatError(f"unknown payload kind {kind}")
    need = _HEADER.size + 4 * width * height
    if len(raw) < need:
        raise GridFormatError(f"truncated payload: {len(raw)} bytes, expected {need}")
    if len(raw) > need:
        raise GridFormatError(f"trailing bytes: {len(raw)} bytes, expected {need}")
    data = np.frombuffer(raw, dtype="<i4", offset=_HEADER.size).reshape(height, width)
    return FieldGrid(width, height, (a, b, c, d), PayloadKind(kind), data.astype(np.int32))


def read_grid(path) -> FieldGrid:
    with open(path, "rb") as fh:
        return grid_from_bytes(fh.read())


def default_jobs() -> int:
    env = os.environ.get("MCM_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_tiled(work, out: np.ndarray, jobs: Optional[int] = None, tile_rows: int = 16) -> None:
    """Run ``work(out, row0, row1)`` over disjoint row tiles.

    Each tile writes only its own rows, so the result does not depend on the
    number of workers.
    """
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    height = out.shape[0]
    tiles = [(r, min(r + tile_rows, height)) for r in range(0, height, tile_rows)]
    if jobs == 1 or len(tiles) == 1:
        for r0, r1 in tiles:
            work(out, r0, r1)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for fut in [pool.submit(work, out, r0, r1) for r0, r1 in tiles]:
            fut.result()


# verdict palette: undefined, Cantor set, Cantor circles, Sierpinski hole, non-escaping, indeterminate
VERDICT_PALETTE = {
    0: (0, 0, 0),
    1: (38, 70, 150),
    2: (240, 200, 60),
    3: (200, 60, 60),
    4: (20, 20, 20),
    5: (160, 160, 160),
}


@dataclass(frozen=True)
class ImageSpec:
    palette: Mapping[int, tuple] = field(default_factory=lambda: dict(VERDICT_PALETTE))
    gamma: float = 1.0
    bounded_color: tuple = (0, 0, 0)
    low_color: tuple = (10, 20, 60)
    high_color: tuple = (250, 250, 235)


def _escape_rgb(data, spec):
    out = np.empty(data.shape + (3,), np.uint8)
    bounded = data < 0
    depth = np.where(bounded, 0, data).astype(float)
    top = depth.max() if depth.size else 0.0
    # log shading is cosmetic only
    t = np.log1p(depth) / np.log1p(top) if top > 0 else np.zeros_like(depth)
    t = t ** (1.0 / spec.gamma)
    lo = np.array(spec.low_color, float)
    hi = np.array(spec.high_color, float)
    rgb = lo + (1.0 - t)[..., None] * (hi - lo)
    out[...] = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    out[bounded] = spec.bounded_color
    return out


def grid_rgb(grid: FieldGrid, spec: ImageSpec = ImageSpec()) -> np.ndarray:
    """RGB array with the top row at im_max."""
    if grid.kind is PayloadKind.VERDICT:
        values = np.unique(grid.data)
        missing = [int(v) for v in values if int(v) not in spec.palette]
        if missing:
            raise ValueError(f"palette does not cover payload values {missing}")
        lut = np.zeros((max(int(values.max()), 0) + 1, 3), np.uint8)
        for k, rgb in spec.palette.items():
            if 0 <= k < len(lut):
                lut[k] = rgb
        rgb = lut[grid.data]
    else:
        if np.any(grid.data < -1):
            bad = sorted(set(int(v) for v in grid.data[grid.data < -1]))
            raise ValueError(f"palette does not cover payload values {bad}")
        rgb = _escape_rgb(grid.data, spec)
    return rgb[::-1]


def encode_png(grid: FieldGrid, spec: ImageSpec, path) -> None:
    from PIL import Image

    Image.fromarray(grid_rgb(grid, spec), mode="RGB").save(path, format="PNG")
