"""Image container, centered coordinate frame, and PGM file I/O.

Pixel (row ``r``, col ``c``) maps to the continuous point
``x = c - (width - 1) / 2``, ``y = (height - 1) / 2 - r``: the origin sits
at the geometric center of the raster and y grows upward, so moment
integrals and rotations use ordinary right-handed math conventions
regardless of storage order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoordinateFrame",
    "Image",
    "PgmParseError",
    "load_pgm",
    "save_pgm",
    "sample_bilinear",
]

_MAX_MAXVAL = 65535


class PgmParseError(ValueError):
    """Malformed PGM input; the message names the offending byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class CoordinateFrame:
    """Centered continuous frame over a raster grid.

    One length unit per pixel; the origin is the geometric center
    ``((width - 1) / 2, (height - 1) / 2)`` in pixel indices, and the
    stored row axis (down) maps to mathematical y (up).
    """

    width: int
    height: int
    pixel_size: float = 1.0

    @property
    def origin_col(self) -> float:
        return (self.width - 1) / 2.0

    @property
    def origin_row(self) -> float:
        return (self.height - 1) / 2.0

    def to_xy(self, row: float, col: float) -> tuple[float, float]:
        """Continuous coordinates of a (row, col) position."""
        return col - self.origin_col, self.origin_row - row

    def to_rowcol(self, x: float, y: float) -> tuple[float, float]:
        """Inverse map: (row, col) position of a continuous point."""
        return self.origin_row - y, x + self.origin_col

    def x_coords(self) -> np.ndarray:
        """x coordinate of every column, left to right."""
        return np.arange(self.width, dtype=np.float64) - self.origin_col

    def y_coords(self) -> np.ndarray:
        """y coordinate of every row, top to bottom (decreasing)."""
        return self.origin_row - np.arange(self.height, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable grayscale image with intensities in [0, 1].

    ``pixels`` is a read-only float64 array of shape (height, width),
    row-major. Construction validates that every intensity is finite and
    non-negative; total-mass positivity is checked by the moment
    operations, which reject degenerate (all-zero) images.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel intensities must be finite")
        if np.any(arr < 0.0):
            raise ValueError("pixel intensities must be non-negative")
        if arr is self.pixels and arr.flags.writeable:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def frame(self) -> CoordinateFrame:
        return CoordinateFrame(self.width, self.height)


def _header_tokens(data: bytes):
    """Yield (token, offset) pairs, skipping whitespace and # comments."""
    i, n = 0, len(data)
    while i < n:
        b = data[i]
        if b in b" \t\r\n\v\f":
            i += 1
        elif b == ord("#"):
            while i < n and data[i] not in b"\r\n":
                i += 1
        else:
            start = i
            while i < n and data[i] not in b" \t\r\n\v\f#":
                i += 1
            yield data[start:i], start


def _parse_int_token(token: bytes, offset: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise PgmParseError(
            f"malformed header: {what} is not an integer: {token[:20]!r}", offset
        ) from None


def load_pgm(path) -> Image:
    """Load a binary (P5) or ASCII (P2) PGM file as an Image.

    Intensities are scaled to [0, 1] by dividing by the header maxval.
    Header comments (``#`` to end of line) are accepted; maxval must be
    in 1..65535. Parse failures raise :class:`PgmParseError` naming the
    byte offset.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = _header_tokens(data)
    try:
        magic, magic_off = next(tokens)
    except StopIteration:
        raise PgmParseError("malformed header: empty file", 0) from None
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(
            f"malformed header: expected magic 'P2' or 'P5', got {magic[:8]!r}",
            magic_off,
        )

    fields = []
    for what in ("width", "height", "maxval"):
        try:
            token, off = next(tokens)
        except StopIteration:
            raise PgmParseError(
                f"malformed header: missing {what}", len(data)
            ) from None
        fields.append((_parse_int_token(token, off, what), off))
    (width, w_off), (height, h_off), (maxval, mv_off) = fields

    if width < 1 or height < 1:
        raise PgmParseError(f"malformed header: bad dimensions {width}x{height}", w_off)
    if maxval == 0:
        raise PgmParseError("maxval is zero", mv_off)
    if maxval > _MAX_MAXVAL:
        raise PgmParseError(f"maxval {maxval} out of range (max {_MAX_MAXVAL})", mv_off)

    count = width * height
    if magic == b"P5":
        # Binary payload starts after exactly one whitespace byte past maxval.
        payload_start = mv_off + len(str(maxval)) + 1
        bytes_per = 1 if maxval < 256 else 2
        need = count * bytes_per
        payload = data[payload_start : payload_start + need]
        if len(payload) < need:
            raise PgmParseError(
                f"truncated payload: expected {need} bytes, got {len(payload)}",
                len(data),
            )
        dtype = np.uint8 if bytes_per == 1 else np.dtype(">u2")
        samples = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    else:
        samples = np.empty(count, dtype=np.float64)
        got = 0
        for token, off in tokens:
            if got >= count:
                break
            value = _parse_int_token(token, off, "sample")
            if value < 0 or value > maxval:
                raise PgmParseError(f"sample {value} exceeds maxval {maxval}", off)
            samples[got] = value
            got += 1
        if got < count:
            raise PgmParseError(
                f"truncated payload: expected {count} samples, got {got}", len(data)
            )

    pixels = (samples / float(maxval)).reshape(height, width)
    return Image(pixels)


def save_pgm(img: Image, path, maxval: int = 65535) -> None:
    """Write an Image as binary PGM (P5) with round-half-up quantization.

    maxval must be 255 or 65535. Round-tripping through :func:`load_pgm`
    reproduces every intensity within 1 / (2 * maxval).
    """
    if maxval not in (255, 65535):
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    arr = img.pixels
    if np.any(arr < 0.0):
        raise ValueError("cannot save image with negative intensities")
    if np.any(arr > 1.0 + 1e-9):
        raise ValueError("cannot save image with intensities above 1")
    quantized = np.floor(np.clip(arr, 0.0, 1.0) * maxval + 0.5)
    quantized = np.minimum(quantized, maxval)
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quantized.astype(dtype).tobytes())


def sample_bilinear(img: Image, x: float, y: float) -> float:
    """Bilinear interpolation of the image density at a continuous point.

    Points outside the grid read as zero (zero padding); exactly on a
    pixel center this returns that pixel's value.
    """
    row, col = img.frame.to_rowcol(x, y)
    h, w = img.height, img.width
    r0 = math.floor(row)
    c0 = math.floor(col)
    fr = row - r0
    fc = col - c0
    total = 0.0
    pix = img.pixels
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        rr = r0 + dr
        if wr == 0.0 or rr < 0 or rr >= h:
            continue
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            cc = c0 + dc
            if wc == 0.0 or cc < 0 or cc >= w:
                continue
            total += wr * wc * pix[rr, cc]
    return total
