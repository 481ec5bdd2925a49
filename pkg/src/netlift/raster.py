"""Raster I/O and wire-mask extraction.

Native formats are binary PGM (P5) for grayscale and binary PBM (P4) for
masks; both round-trip bit-exactly.  PNG is supported read-only.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import BBox, BitMask, NetliftError, ValidationError

MAX_DIM = 16384


class FormatError(NetliftError):
    """Unreadable or out-of-contract file content."""


class GrayImage:
    """8-bit grayscale raster, 0 = black, backed by a read-only (h, w) array."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        arr = np.ascontiguousarray(values, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValidationError(f"image must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValidationError("empty image")
        arr.setflags(write=False)
        self.values = arr

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and np.array_equal(self.values, other.values)

    def __hash__(self):
        raise TypeError("GrayImage is not hashable")

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class ThresholdSpec:
    """Either a fixed cut level or Otsu's automatic threshold."""

    level: int | None = None  # None selects Otsu

    def __post_init__(self):
        if self.level is not None and not (0 <= self.level <= 255):
            raise ValidationError(f"threshold level out of range: {self.level}")

    @classmethod
    def fixed(cls, level: int) -> "ThresholdSpec":
        return cls(level=level)

    @classmethod
    def otsu(cls) -> "ThresholdSpec":
        return cls(level=None)


def _rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    r = rgb[..., 0].astype(np.uint32)
    g = rgb[..., 1].astype(np.uint32)
    b = rgb[..., 2].astype(np.uint32)
    return ((r * 299 + g * 587 + b * 114 + 500) // 1000).astype(np.uint8)


def _check_dims(width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise FormatError(f"non-positive image dimensions {width}x{height}")
    if width > MAX_DIM or height > MAX_DIM:
        raise FormatError(f"image {width}x{height} exceeds the {MAX_DIM}^2 limit")


def _read_pnm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated integers after the magic, honoring
    '#' comments.  Returns the values and the offset of the binary payload."""
    values: list[int] = []
    i = 2  # past the 2-byte magic
    n = len(data)
    while len(values) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        token = data[start:i]
        if not token.isdigit():
            raise FormatError(f"corrupt header token {token!r}")
        values.append(int(token))
    if i >= n:
        raise FormatError("truncated header")
    return values, i + 1  # single whitespace byte terminates the header


def load_pgm_bytes(data: bytes) -> GrayImage:
    if data[:2] != b"P5":
        raise FormatError("not a binary PGM (P5) file")
    (w, h, maxval), off = _read_pnm_tokens(data, 3)
    _check_dims(w, h)
    if maxval != 255:
        raise FormatError(f"unsupported PGM maxval {maxval} (only 255)")
    payload = data[off : off + w * h]
    if len(payload) != w * h:
        raise FormatError("truncated PGM pixel data")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(h, w))


def save_pgm(img: GrayImage, path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.values.tobytes())


def _load_png(data: bytes) -> GrayImage:
    from PIL import Image

    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise FormatError(f"unreadable PNG: {exc}") from exc
    _check_dims(im.width, im.height)
    if im.mode == "L":
        return GrayImage(np.asarray(im, dtype=np.uint8))
    if im.mode in ("1", "LA", "P"):
        im = im.convert("RGB") if im.mode == "P" else im.convert("L")
        if im.mode == "L":
            return GrayImage(np.asarray(im, dtype=np.uint8))
    if im.mode in ("RGB", "RGBA"):
        rgb = np.asarray(im, dtype=np.uint8)[..., :3]
        return GrayImage(_rgb_to_gray(rgb))
    raise FormatError(f"unsupported PNG mode {im.mode!r} (need 8-bit gray or RGB)")


def load_image(path) -> GrayImage:
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"no such image file: {p}")
    data = p.read_bytes()
    if data[:2] == b"P5":
        return load_pgm_bytes(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(data)
    raise FormatError(f"unsupported image format in {p} (need P5 PGM or PNG)")


def otsu_threshold(img: GrayImage) -> int:
    """Cut level T maximizing inter-class variance between {v < T} and
    {v >= T}; ties broken toward the lower level."""
    hist = np.bincount(img.values.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    cum = np.cumsum(hist)
    cum_v = np.cumsum(hist * np.arange(256))
    best_t, best_var = 1, -1.0
    for t in range(1, 256):
        w0 = cum[t - 1]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            var = 0.0
        else:
            mu0 = cum_v[t - 1] / w0
            mu1 = (cum_v[255] - cum_v[t - 1]) / w1
            var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def binarize(img: GrayImage, spec: ThresholdSpec = ThresholdSpec.otsu(), invert: bool = False) -> BitMask:
    """Ink mask: a bit is set iff the pixel is darker than the threshold."""
    level = spec.level if spec.level is not None else otsu_threshold(img)
    bits = img.values < level
    if invert:
        bits = img.values >= level
    return BitMask(bits)


def subtract_regions(mask: BitMask, boxes, margin: int = 2) -> BitMask:
    """Clear every pixel inside any box expanded by `margin`; boxes may
    hang off the mask and are clipped."""
    out = np.array(mask.pixels)
    h, w = out.shape
    for box in boxes:
        x0 = max(0, box.min.x - margin)
        y0 = max(0, box.min.y - margin)
        x1 = min(w - 1, box.max.x + margin)
        y1 = min(h - 1, box.max.y + margin)
        if x0 > x1 or y0 > y1:
            continue
        out[y0 : y1 + 1, x0 : x1 + 1] = False
    return BitMask(out)


def save_mask(mask: BitMask, path) -> None:
    header = f"P4\n{mask.width} {mask.height}\n".encode("ascii")
    packed = np.packbits(mask.pixels, axis=1)
    Path(path).write_bytes(header + packed.tobytes())


def load_mask(path) -> BitMask:
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"no such mask file: {p}")
    data = p.read_bytes()
    if data[:2] != b"P4":
        raise FormatError("not a binary PBM (P4) file")
    (w, h), off = _read_pnm_tokens(data, 2)
    _check_dims(w, h)
    row_bytes = (w + 7) // 8
    payload = data[off : off + row_bytes * h]
    if len(payload) != row_bytes * h:
        raise FormatError("truncated PBM pixel data")
    rows = np.frombuffer(payload, dtype=np.uint8).reshape(h, row_bytes)
    bits = np.unpackbits(rows, axis=1)[:, :w].astype(bool)
    return BitMask(bits)
