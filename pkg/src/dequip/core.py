"""Image/patch data model, patch grids, aggregation and PGM I/O.

Images are plain 2-D ``float64`` arrays indexed ``[row, col]`` on a nominal
[0, 255] intensity scale.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundsError, CoverageError, FormatError, ValidationError

Origin = tuple[int, int]


def as_image(data, name: str = "image") -> np.ndarray:
    """Return ``data`` as a validated float64 image array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValidationError(f"{name} must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return img


@dataclass(frozen=True)
class Patch:
    """A square sub-grid of an image.

    Attributes:
        values: (side, side) array of intensities.
        origin: (row, col) of the top-left pixel in the source image.
    """

    values: np.ndarray
    origin: Origin = (0, 0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            side = int(round(np.sqrt(v.size)))
            if side * side != v.size:
                raise ValidationError(f"patch of {v.size} values is not square")
            v = v.reshape(side, side)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValidationError(f"patch values must be square, got shape {v.shape}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Row-major vector of the patch values."""
        return self.values.reshape(-1)


@dataclass(frozen=True)
class PatchGrid:
    positions: tuple[Origin, ...]
    side: int
    stride: int

    def __len__(self) -> int:
        return len(self.positions)


def extract_patch(image: np.ndarray, origin: Origin, side: int, cyclic: bool = False) -> Patch:
    """Copy a ``side`` x ``side`` patch whose top-left pixel is ``origin``.

    With ``cyclic=True`` indices wrap modulo the image dimensions, otherwise a
    patch overflowing the image raises :class:`BoundsError`.
    """
    h, w = image.shape
    r, c = int(origin[0]), int(origin[1])
    if side < 1 or side > min(h, w):
        raise ValidationError(f"patch side {side} invalid for {h}x{w} image")
    if cyclic:
        rows = (r + np.arange(side)) % h
        cols = (c + np.arange(side)) % w
        return Patch(image[np.ix_(rows, cols)].copy(), (r, c))
    if r < 0 or c < 0 or r + side > h or c + side > w:
        raise BoundsError(f"patch at {origin} with side {side} exceeds {h}x{w} image")
    return Patch(image[r:r + side, c:c + side].copy(), (r, c))


def _axis_origins(dim: int, side: int, stride: int) -> list[int]:
    last = dim - side
    origins = list(range(0, last + 1, stride))
    if origins[-1] != last:
        origins.append(last)
    return origins


def patch_grid(width: int, height: int, side: int, stride: int) -> PatchGrid:
    """Row-major grid of patch origins covering every pixel.

    Origins sit on multiples of ``stride``; the final origin of each axis is
    clamped to ``dim - side``.
    """
    if side < 1 or side > min(width, height):
        raise ValidationError(f"patch side {side} invalid for {width}x{height} image")
    if not 1 <= stride <= side:
        # a stride wider than the patch would leave uncovered gaps
        raise ValidationError(f"stride must be in [1, {side}], got {stride}")
    rows = _axis_origins(height, side, stride)
    cols = _axis_origins(width, side, stride)
    return PatchGrid(tuple((r, c) for r in rows for c in cols), side, stride)


def aggregate_patches(patches: Iterable[Patch], width: int, height: int) -> np.ndarray:
    """Average overlapping patches back into a ``height`` x ``width`` image.

    Patches are accumulated in the order given, so identical inputs give
    bit-identical outputs.
    """
    acc = np.zeros((height, width))
    count = np.zeros((height, width))
    for patch in patches:
        r, c = patch.origin
        s = patch.side
        if r < 0 or c < 0 or r + s > height or c + s > width:
            raise BoundsError(f"patch at {patch.origin} with side {s} exceeds {width}x{height} output")
        acc[r:r + s, c:c + s] += patch.values
        count[r:r + s, c:c + s] += 1.0
    if np.any(count == 0):
        missing = np.argwhere(count == 0)[0]
        raise CoverageError(f"pixel {tuple(int(i) for i in missing)} is not covered by any patch")
    return acc / count


# ---------------------------------------------------------------- PGM I/O

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        tok = m.group(1)
        if b"#" in tok:
            # comment glued to a token, e.g. "255#x"
            tok = tok.split(b"#", 1)[0]
            nl = data.find(b"\n", m.start(1))
            pos = len(data) if nl < 0 else nl + 1
        else:
            pos = m.end(1)
        tokens.append(tok)
    return tokens, pos


def load_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a P2 or P5 PGM file, rescaling intensities so maxval maps to 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise FormatError(f"unsupported PGM magic {data[:2]!r} in {path}")
    magic = data[:2]
    try:
        (w_tok, h_tok, m_tok), pos = _header_tokens(data[2:], 3)
        width, height, maxval = int(w_tok), int(h_tok), int(m_tok)
    except ValueError as exc:
        raise FormatError(f"malformed PGM header in {path}: {exc}") from exc
    if width < 1 or height < 1 or not 0 < maxval <= 65535:
        raise FormatError(f"invalid PGM geometry/maxval {width}x{height}/{maxval} in {path}")
    body = data[2 + pos:]
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        body = body[1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(body) < n * dtype.itemsize:
            raise OSError(f"truncated PGM raster in {path}: {len(body)} bytes for {n} pixels")
        pixels = np.frombuffer(body, dtype=dtype, count=n).astype(np.float64)
    else:
        # strip comments from the ASCII raster
        text = re.sub(rb"#[^\n]*", b"", body)
        try:
            pixels = np.array(text.split(), dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"bad ASCII PGM raster in {path}") from exc
        if pixels.size < n:
            raise OSError(f"truncated PGM raster in {path}: {pixels.size} values for {n} pixels")
        pixels = pixels[:n]
    if np.any(pixels > maxval):
        raise FormatError(f"PGM sample exceeds maxval {maxval} in {path}")
    img = pixels.reshape(height, width)
    if maxval != 255:
        img = img * (255.0 / maxval)
    return img


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-up."""
    return np.floor(np.clip(image, 0.0, 255.0) + 0.5).astype(np.uint8)


def save_pgm(image: np.ndarray, path: str | os.PathLike) -> None:
    """Write ``image`` as an 8-bit binary (P5) PGM."""
    img = as_image(image)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(to_uint8(img).tobytes())


def image_patches(image: np.ndarray, positions: Sequence[Origin], side: int) -> np.ndarray:
    """Stack the non-cyclic patches at ``positions`` into an (n, side, side) array."""
    windows = np.lib.stride_tricks.sliding_window_view(image, (side, side))
    rows = np.fromiter((p[0] for p in positions), dtype=np.intp, count=len(positions))
    cols = np.fromiter((p[1] for p in positions), dtype=np.intp, count=len(positions))
    return windows[rows, cols].copy()
