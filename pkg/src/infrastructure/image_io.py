"""
Grayscale image input and output: binary PGM files, MNIST IDX image files and a
built-in synthetic glyph.
Infrastructure layer - file formats.
"""
import gzip
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_pgm(path: PathLike, image: np.ndarray) -> Path:
    """Write intensities in [0, 1] as an 8-bit binary PGM (P5)."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())
    return path


def _pgm_tokens(data: bytes, count: int) -> tuple:
    tokens = []
    position = 0
    while len(tokens) < count:
        while data[position:position + 1].isspace():
            position += 1
        if data[position:position + 1] == b"#":
            while data[position:position + 1] not in (b"\n", b""):
                position += 1
            continue
        start = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        tokens.append(data[start:position])
    return tokens, position + 1


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary PGM (P5) file into intensities in [0, 1]."""
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM file")
    width, height, max_value = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = np.uint8 if max_value < 256 else np.dtype(">u2")
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    return pixels.reshape(height, width).astype(float) / max_value


def read_idx_images(path: PathLike) -> np.ndarray:
    """Read an IDX3 unsigned-byte image file (optionally gzipped) into (N, rows, cols) in [0, 1]."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as handle:
        magic, count, rows, cols = struct.unpack(">IIII", handle.read(16))
        if magic != 2051:
            raise ValueError(f"{path} is not an IDX image file (magic {magic})")
        pixels = np.frombuffer(handle.read(count * rows * cols), dtype=np.uint8)
    logger.info(f"Read {count} images of {rows}x{cols} from {path}")
    return pixels.reshape(count, rows, cols).astype(float) / 255.0


def synthetic_glyph(side: int = 28) -> np.ndarray:
    """A handwritten-looking zero: a ring of stroke intensity on a dark background."""
    coords = (np.arange(side) + 0.5) / side
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    radius = np.sqrt(((xx - 0.5) / 0.28) ** 2 + ((yy - 0.5) / 0.36) ** 2)
    stroke = np.exp(-((radius - 1.0) ** 2) / (2 * 0.12 ** 2))
    return np.clip(np.where(stroke > 0.05, stroke, 0.0), 0.0, 1.0)


def load_clean_image(side: int, mnist_path: PathLike = None, index: int = 0) -> np.ndarray:
    """The clean image for the image problems: an MNIST digit when a file is given, else the glyph."""
    if mnist_path is None:
        return synthetic_glyph(side)
    images = read_idx_images(mnist_path)
    image = images[index]
    if image.shape != (side, side):
        raise ValueError(f"IDX images are {image.shape}, expected {side}x{side}")
    return image
