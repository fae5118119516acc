"""Foundational math, color, and image types with bit-exact file I/O.

Conventions used throughout the package:

* positions are millimeters, directions are unit vectors,
* radiometric images ("linear images") are float32 numpy arrays of shape
  (height, width, 3), row 0 at the top, channels R, G, B,
* PFM is the lossless float storage format (negative scale = little-endian,
  rows stored bottom-up), PNG is the 8-bit sRGB visualization format.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

SRGB_BREAK = 0.0031308
SRGB_INV_BREAK = 0.04045


class MalformedFileError(ValueError):
    """Raised when an image file cannot be decoded."""


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector along v. Length must exceed 1e-12."""
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero vector")
    return np.asarray(v, dtype=np.float64) / n


def linear_to_srgb(v):
    """IEC 61966-2-1 transfer from linear radiometric values to sRGB in [0,1].

    Accepts scalars or arrays; input is clamped to [0,1] first.
    """
    v = np.clip(v, 0.0, 1.0)
    return np.where(v <= SRGB_BREAK, 12.92 * v, 1.055 * np.power(v, 1.0 / 2.4) - 0.055)


def srgb_to_linear(v):
    """Inverse sRGB transfer; out-of-range input is clamped to [0,1]."""
    v = np.clip(v, 0.0, 1.0)
    return np.where(v <= SRGB_INV_BREAK, v / 12.92, np.power((v + 0.055) / 1.055, 2.4))


def new_image(width: int, height: int, fill=0.0) -> np.ndarray:
    """Allocate a linear image raster (height, width, 3) float32."""
    img = np.empty((height, width, 3), dtype=np.float32)
    img[:] = fill
    return img


def _read_token(f) -> bytes:
    """Read one whitespace-delimited header token from a binary stream."""
    tok = b""
    while True:
        c = f.read(1)
        if c == b"":
            raise MalformedFileError("unexpected end of PFM header")
        if c in b" \t\r\n":
            if tok:
                return tok
            continue
        tok += c


def write_pfm(img: np.ndarray, path) -> None:
    """Write a float32 image as PFM, bit-exact for round trips.

    (h, w, 3) arrays are written as color 'PF', (h, w) arrays as
    grayscale 'Pf'. Rows are stored bottom-up with little-endian scale -1.
    """
    img = np.asarray(img)
    if img.ndim == 3 and img.shape[2] == 3:
        tag = b"PF"
    elif img.ndim == 2:
        tag = b"Pf"
    else:
        raise ValueError(f"PFM supports (h,w,3) or (h,w) arrays, got shape {img.shape}")
    h, w = img.shape[0], img.shape[1]
    data = np.flipud(img).astype("<f4", copy=False)
    with open(path, "wb") as f:
        f.write(tag + b"\n")
        f.write(f"{w} {h}\n".encode())
        f.write(b"-1.0\n")
        f.write(data.tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into (h, w, 3) or (h, w) float32.

    The sign of the scale line encodes endianness (negative = little).
    """
    with open(path, "rb") as f:
        tag = _read_token(f)
        if tag not in (b"PF", b"Pf"):
            raise MalformedFileError(f"not a PFM file (tag {tag!r})")
        try:
            w = int(_read_token(f))
            h = int(_read_token(f))
            scale = float(_read_token(f))
        except ValueError as e:
            raise MalformedFileError(f"bad PFM header: {e}") from e
        if w <= 0 or h <= 0 or w * h > 10**9:
            raise MalformedFileError(f"bad PFM dimensions {w}x{h}")
        channels = 3 if tag == b"PF" else 1
        count = w * h * channels
        buf = f.read(4 * count)
    if len(buf) != 4 * count:
        raise MalformedFileError(f"truncated PFM payload: expected {4*count} bytes, got {len(buf)}")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(buf, dtype=dtype).astype(np.float32, copy=False)
    shape = (h, w, 3) if channels == 3 else (h, w)
    return np.flipud(data.reshape(shape)).copy()


def to_srgb_u8(img: np.ndarray) -> np.ndarray:
    """Quantize a linear image to 8-bit sRGB, round-to-nearest."""
    srgb = linear_to_srgb(np.asarray(img, dtype=np.float64))
    return np.rint(srgb * 255.0).astype(np.uint8)


def write_png_srgb(img: np.ndarray, path) -> None:
    """Write a linear image as an 8-bit sRGB PNG (no alpha)."""
    u8 = to_srgb_u8(img)
    if u8.ndim == 2:
        u8 = np.repeat(u8[:, :, None], 3, axis=2)
    Image.fromarray(u8, mode="RGB").save(path, format="PNG")


def read_png(path) -> np.ndarray:
    """Read an 8-bit PNG as raw sRGB bytes (h, w, 3) uint8."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
