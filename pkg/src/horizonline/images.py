"""Image containers and file I/O.

All pipeline stages exchange images through :class:`GrayImage` /
:class:`RgbImage`.  Both wrap a read-only, C-contiguous numpy array with the
usual raster convention: origin at the top-left corner, ``x`` (column index)
growing rightward, ``y`` (row index) growing downward.

Supported on-disk formats are binary PGM (``P5``, the bit-exact fixture
format used throughout the test suite) and 8-bit grayscale / RGB PNG.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np


class ImageLoadError(Exception):
    """Base class for image decoding failures; message includes the path."""


class UnsupportedImageError(ImageLoadError):
    """File is not a supported format or bit depth."""


class TruncatedImageError(ImageLoadError):
    """File header promises more pixel data than the file contains."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Single-channel 8-bit raster of shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = self.pixels
        if p.ndim != 2 or p.dtype != np.uint8:
            raise ValueError(f"GrayImage needs a 2-D uint8 array, got {p.dtype} {p.shape}")
        object.__setattr__(self, "pixels", _freeze(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the pixel bytes."""
        return self.pixels.reshape(-1)


@dataclass(frozen=True)
class RgbImage:
    """Interleaved 8-bit RGB raster of shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"RgbImage needs a (H, W, 3) uint8 array, got {p.dtype} {p.shape}")
        object.__setattr__(self, "pixels", _freeze(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def _read_pgm(raw: bytes, path: Path) -> GrayImage:
    # Header: "P5", whitespace-separated width/height/maxval, '#' comments
    # allowed, then a single whitespace byte before the pixel payload.
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        token = raw[start:pos]
        if not token.isdigit():
            raise UnsupportedImageError(f"{path}: malformed PGM header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise UnsupportedImageError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedImageError(f"{path}: PGM maxval {maxval} is not 8-bit")
    pos += 1  # exactly one whitespace byte after maxval
    payload = raw[pos : pos + width * height]
    if len(payload) < width * height:
        raise TruncatedImageError(
            f"{path}: expected {width * height} pixel bytes, found {len(payload)}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels.copy())


def _read_png(path: Path) -> Union[GrayImage, RgbImage]:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode not in ("L", "RGB"):
                raise UnsupportedImageError(
                    f"{path}: PNG mode {mode!r} not supported (need 8-bit gray or RGB)"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise UnsupportedImageError(f"{path}: {exc}") from exc
    except (OSError, SyntaxError) as exc:
        raise TruncatedImageError(f"{path}: PNG decode failed: {exc}") from exc
    if arr.ndim == 2:
        return GrayImage(arr)
    return RgbImage(arr)


def load_image(path: Union[str, Path]) -> Union[GrayImage, RgbImage]:
    """Decode a PGM (P5) or PNG file.

    Raises ``OSError`` for unreadable files, :class:`UnsupportedImageError`
    for unknown formats or bit depths, and :class:`TruncatedImageError` when
    the pixel payload is shorter than the header promises.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] == b"P5":
        return _read_pgm(raw, path)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise UnsupportedImageError(f"{path}: not a binary PGM or PNG file")


def save_pgm(img: GrayImage, path: Union[str, Path]) -> None:
    """Write a binary PGM (P5, maxval 255); round-trips bit-exactly."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


_LUMA_WEIGHTS = {
    # Rec. 601 luma; "mean" is a plain channel average kept for comparing
    # against ground truth produced with a different gray conversion.
    "rec601": (0.299, 0.587, 0.114),
    "mean": (1 / 3, 1 / 3, 1 / 3),
}


def to_gray(img: RgbImage, conversion: str = "rec601") -> GrayImage:
    """Collapse RGB to intensity with round-half-up quantization."""
    try:
        wr, wg, wb = _LUMA_WEIGHTS[conversion]
    except KeyError:
        raise ValueError(f"unknown gray conversion {conversion!r}") from None
    p = img.pixels.astype(np.float64)
    luma = p[:, :, 0] * wr + p[:, :, 1] * wg + p[:, :, 2] * wb
    out = np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(out)


def as_gray(img: Union[GrayImage, RgbImage], conversion: str = "rec601") -> GrayImage:
    if isinstance(img, GrayImage):
        return img
    return to_gray(img, conversion)
