"""Planar float images: container, color conversion, filtering, file I/O.

Pixel values live in [0, 1] as float64 throughout. Interchange with 8-bit
files happens only at load/save time (divide by 255 in, round-to-nearest
out), so every intermediate stage keeps full precision.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ImageIOError, InvalidInputError


class ColorSpace(Enum):
    RGB = "rgb"
    HSV = "hsv"
    GRAY = "gray"


@dataclass(frozen=True)
class PlanarImage:
    """Image stored as (channels, height, width) float64 planes.

    Channels is 1 for GRAY and 3 for RGB/HSV; all samples must be finite
    and within [0, 1]. Violations raise InvalidInputError at construction.
    """

    planes: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3:
            raise InvalidInputError(
                f"planes must be (channels, height, width), got shape {planes.shape}"
            )
        channels = planes.shape[0]
        if channels not in (1, 3):
            raise InvalidInputError(f"expected 1 or 3 channels, got {channels}")
        if (self.space is ColorSpace.GRAY) != (channels == 1):
            raise InvalidInputError(
                f"{self.space.value} image cannot have {channels} channel(s)"
            )
        if not np.all(np.isfinite(planes)):
            raise InvalidInputError("pixel values must be finite")
        if planes.size and (planes.min() < 0.0 or planes.max() > 1.0):
            raise InvalidInputError(
                f"pixel values must lie in [0, 1], got range "
                f"[{planes.min():g}, {planes.max():g}]"
            )
        object.__setattr__(self, "planes", planes)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def plane(self, index: int) -> np.ndarray:
        return self.planes[index]

    def to_interleaved(self) -> np.ndarray:
        """Return a (height, width, channels) copy."""
        return np.moveaxis(self.planes, 0, 2).copy()

    @classmethod
    def from_gray(cls, values) -> "PlanarImage":
        values = np.asarray(values, dtype=np.float64)
        return cls(values[np.newaxis, :, :], ColorSpace.GRAY)


def rgb_to_hsv(image: PlanarImage) -> PlanarImage:
    """Convert RGB planes to hexcone HSV.

    V is exactly max(R, G, B); H lies in [0, 1) with S = 0 (and H = 0)
    on achromatic pixels.
    """
    if image.space is not ColorSpace.RGB:
        raise InvalidInputError(f"expected an RGB image, got {image.space.value}")
    r, g, b = image.planes
    v = np.maximum(np.maximum(r, g), b)
    chroma = v - np.minimum(np.minimum(r, g), b)
    safe = np.where(chroma == 0.0, 1.0, chroma)
    hue6 = np.select(
        [chroma == 0.0, v == r, v == g],
        [np.zeros_like(v), ((g - b) / safe) % 6.0, (b - r) / safe + 2.0],
        default=(r - g) / safe + 4.0,
    )
    s = chroma / np.where(v == 0.0, 1.0, v)
    return PlanarImage(np.stack([hue6 / 6.0, s, v]), ColorSpace.HSV)


def hsv_to_rgb(image: PlanarImage) -> PlanarImage:
    """Invert rgb_to_hsv; max(R, G, B) of the output equals V exactly."""
    if image.space is not ColorSpace.HSV:
        raise InvalidInputError(f"expected an HSV image, got {image.space.value}")
    h, s, v = image.planes
    hue6 = (h % 1.0) * 6.0
    sector = np.floor(hue6).astype(np.intp) % 6
    frac = hue6 - np.floor(hue6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    # One channel per sector holds v itself, so the value plane survives.
    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    return PlanarImage(np.stack([r, g, b]), ColorSpace.RGB)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps with radius ceil(3 * sigma), normalized to sum 1."""
    if not sigma > 0.0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    return kernel / kernel.sum()


def gaussian_blur(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian on a raw 2-D array.

    Edges are handled by symmetric reflection including the edge sample,
    which keeps the kernel mass at 1 everywhere and therefore preserves
    the image mean.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise InvalidInputError(f"expected a 2-D array, got shape {values.shape}")
    kernel = gaussian_kernel(sigma)
    out = correlate1d(values, kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def gaussian_filter(image: PlanarImage, sigma: float) -> PlanarImage:
    """Blur every plane of an image; output is clipped back to [0, 1]."""
    blurred = np.stack([gaussian_blur(plane, sigma) for plane in image.planes])
    return PlanarImage(np.clip(blurred, 0.0, 1.0), image.space)


def quantize(planes: np.ndarray) -> np.ndarray:
    """Round [0, 1] samples to 8-bit codes."""
    return np.clip(np.rint(np.asarray(planes) * 255.0), 0, 255).astype(np.uint8)


def _next_header_token(stream, path) -> bytes:
    """Read one whitespace-delimited netpbm header token.

    Skips '#' comments through end of line. Consumes exactly the single
    whitespace byte that terminates the token, leaving the stream at the
    first byte after it.
    """
    token = bytearray()
    while True:
        ch = stream.read(1)
        if not ch:
            if token:
                return bytes(token)
            raise ImageIOError(path, "truncated header")
        if ch == b"#":
            while ch and ch != b"\n":
                ch = stream.read(1)
            ch = b"\n" if ch else b""
            if not ch:
                continue
        if ch.isspace():
            if token:
                return bytes(token)
            continue
        token += ch


def _header_int(stream, path, what: str) -> int:
    token = _next_header_token(stream, path)
    try:
        value = int(token)
    except ValueError:
        raise ImageIOError(path, f"bad {what} in header: {token!r}") from None
    if value <= 0:
        raise ImageIOError(path, f"bad {what} in header: {value}")
    return value


def _load_pnm(stream, path, channels: int) -> PlanarImage:
    width = _header_int(stream, path, "width")
    height = _header_int(stream, path, "height")
    maxval = _header_int(stream, path, "maxval")
    if maxval != 255:
        raise ImageIOError(path, f"unsupported maxval {maxval}, only 255 is accepted")
    expected = width * height * channels
    raw = stream.read(expected)
    if len(raw) < expected:
        raise ImageIOError(
            path, f"truncated pixel data: expected {expected} bytes, got {len(raw)}"
        )
    samples = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
    if channels == 1:
        return PlanarImage.from_gray(samples.reshape(height, width))
    planes = np.moveaxis(samples.reshape(height, width, 3), 2, 0)
    return PlanarImage(planes, ColorSpace.RGB)


def load_image(path) -> PlanarImage:
    """Load a PPM (P6), PGM (P5) or PNG file, sniffing by content.

    Args:
        path: file to read.

    Returns:
        RGB image for P6/PNG input, GRAY for P5.

    Raises:
        ImageIOError: on unreadable files, unknown formats, or malformed
            netpbm data (bad magic, maxval other than 255, truncation).
    """
    path = Path(path)
    try:
        stream = open(path, "rb")
    except OSError as exc:
        raise ImageIOError(path, f"cannot open: {exc.strerror or exc}") from exc
    with stream:
        magic = stream.read(2)
        if magic == b"P6":
            return _load_pnm(stream, path, channels=3)
        if magic == b"P5":
            return _load_pnm(stream, path, channels=1)
        if magic == b"\x89P":
            stream.seek(0)
            return _load_png(stream, path)
    raise ImageIOError(path, f"unrecognized image format (magic {magic!r})")


def _load_png(stream, path) -> PlanarImage:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(stream) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise ImageIOError(path, "not a decodable PNG file") from exc
    return PlanarImage(np.moveaxis(rgb, 2, 0), ColorSpace.RGB)


def save_image(image: PlanarImage, path) -> None:
    """Write an image as PPM, PGM or PNG according to the path suffix.

    PPM accepts RGB only and PGM accepts GRAY only; HSV must be converted
    back to RGB before saving. Samples are quantized round-to-nearest.
    """
    if image.space is ColorSpace.HSV:
        raise InvalidInputError("HSV images must be converted to RGB before saving")
    path = Path(path)
    suffix = path.suffix.lower()
    codes = quantize(image.planes)
    try:
        if suffix == ".ppm":
            if image.space is not ColorSpace.RGB:
                raise InvalidInputError("PPM output requires an RGB image")
            header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
            path.write_bytes(header + np.moveaxis(codes, 0, 2).tobytes())
        elif suffix == ".pgm":
            if image.space is not ColorSpace.GRAY:
                raise InvalidInputError("PGM output requires a GRAY image")
            header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
            path.write_bytes(header + codes[0].tobytes())
        elif suffix == ".png":
            from PIL import Image

            array = codes[0] if image.channels == 1 else np.moveaxis(codes, 0, 2)
            Image.fromarray(array).save(path, format="PNG")
        else:
            raise ImageIOError(path, f"unsupported output format {suffix!r}")
    except OSError as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise ImageIOError(path, f"cannot write: {exc.strerror or exc}") from exc
