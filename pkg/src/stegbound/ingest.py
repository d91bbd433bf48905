"""Grayscale image ingestion and per-image capacity reports.

Supports binary PGM (P5) only, 8- and 16-bit, bit-exact per the netpbm
convention: whitespace-separated ASCII header tokens, '#' comments ending
at a newline, a single whitespace byte before the payload, big-endian
2-byte samples when maxval > 255.

An image is partitioned into cliques (independent pixels, non-overlapping
square blocks, or the whole image as one clique), a per-clique Gaussian
model is estimated by the sample covariance with ridge shrinkage, and the
capacity bound for (number of cliques, epsilon) is reported.  The block
estimator is a stand-in — no estimation recipe exists for correlated
cliques on real media — and reports say so.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .capacity import EmbeddingBound, max_rate
from .errors import (
    BadHeaderError,
    EmptyImageError,
    NotPositiveDefiniteError,
    TooFewSamplesError,
    TruncatedError,
    UnsupportedFormatError,
)
from .gaussian import GaussianModel, diff_entropy

__all__ = [
    "GrayImage",
    "CliqueSpec",
    "ImageCapacityReport",
    "load_pgm",
    "save_pgm",
    "partition",
    "estimate_cov",
    "image_capacity",
]

ESTIMATOR_NOTE = (
    "per-clique model from block-sample covariance with ridge shrinkage; "
    "stand-in estimator, the rate bound itself depends on n and epsilon only"
)

_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale intensity grid with values in [0, maxval]."""

    width: int
    height: int
    maxval: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        if not (1 <= self.maxval <= 65535):
            raise ValueError(f"maxval must lie in [1, 65535], got {self.maxval}")
        px = np.array(self.pixels, dtype=np.uint16)
        if px.shape != (self.height, self.width):
            raise ValueError(f"pixels must have shape (height, width) = {(self.height, self.width)}")
        if px.size and int(px.max()) > self.maxval:
            raise ValueError(f"pixel value {int(px.max())} exceeds maxval {self.maxval}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class CliqueSpec:
    """How to carve an image into cliques.

    ``independent-pixels`` treats every pixel as its own clique;
    ``square-block`` tiles non-overlapping ``block_edge`` squares,
    cropping remainder rows/columns; ``single-clique`` treats the whole
    image as one clique (the fully correlated extreme, n = 1).
    ``shrinkage`` is the ridge weight for covariance estimation.
    """

    mode: Literal["independent-pixels", "square-block", "single-clique"] = "independent-pixels"
    block_edge: int | None = None
    shrinkage: float = 0.05

    def __post_init__(self):
        if self.mode not in ("independent-pixels", "square-block", "single-clique"):
            raise ValueError(f"unknown clique mode {self.mode!r}")
        if self.mode == "square-block":
            if self.block_edge is None or self.block_edge < 1:
                raise ValueError("square-block mode needs a positive block_edge")
        if not (0.0 <= self.shrinkage <= 1.0):
            raise ValueError(f"shrinkage must lie in [0, 1], got {self.shrinkage!r}")


@dataclass(frozen=True)
class ImageCapacityReport:
    """Capacity bound for one image plus per-clique model diagnostics.

    ``model_entropy_nats`` and ``message_cov`` are None in single-clique
    mode (one sample cannot support an estimate); ``message_scale`` is
    the factor (a - 1) multiplying the estimated clique covariance to get
    the optimal message covariance.
    """

    bound: EmbeddingBound
    clique_count: int
    clique_dim: int
    model_entropy_nats: float | None
    message_scale: float
    message_cov: list | None
    estimator_note: str = ESTIMATOR_NOTE


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping '#' comments."""
    length = len(data)
    while pos < length:
        byte = data[pos : pos + 1]
        if byte == b"#":
            while pos < length and data[pos : pos + 1] != b"\n":
                pos += 1
        elif byte in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < length and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise BadHeaderError("unexpected end of header")
    return data[start:pos], pos


def load_pgm(source) -> GrayImage:
    """Parse a binary (P5) PGM from bytes or a binary stream."""
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    data = bytes(data)
    try:
        magic, pos = _read_token(data, 0)
    except BadHeaderError:
        raise UnsupportedFormatError("empty stream is not a P5 PGM") from None
    if magic != b"P5":
        raise UnsupportedFormatError(f"expected P5 magic, got {magic[:8]!r}")
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _read_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise BadHeaderError(f"{name} token {token!r} is not an integer") from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise BadHeaderError(f"dimensions must be positive, got {width}x{height}")
    if not (1 <= maxval <= 65535):
        raise BadHeaderError(f"maxval must lie in [1, 65535], got {maxval}")
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise BadHeaderError("missing single whitespace byte before payload")
    pos += 1
    bytes_per_sample = 2 if maxval > 255 else 1
    need = width * height * bytes_per_sample
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise TruncatedError(f"payload has {len(payload)} bytes, header promises {need}")
    dtype = ">u2" if bytes_per_sample == 2 else np.uint8
    pixels = np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(np.uint16)
    if int(pixels.max(initial=0)) > maxval:
        raise BadHeaderError(f"sample value {int(pixels.max())} exceeds maxval {maxval}")
    return GrayImage(width=width, height=height, maxval=maxval, pixels=pixels)


def save_pgm(image: GrayImage) -> bytes:
    """Serialize to P5 bytes; load_pgm(save_pgm(img)) reproduces img."""
    header = f"P5\n{image.width} {image.height}\n{image.maxval}\n".encode("ascii")
    if image.maxval > 255:
        payload = image.pixels.astype(">u2").tobytes()
    else:
        payload = image.pixels.astype(np.uint8).tobytes()
    return header + payload


def partition(image: GrayImage, spec: CliqueSpec) -> np.ndarray:
    """Clique sample matrix of shape (clique_count, clique_dim).

    Independent mode returns every pixel as a length-1 vector; block mode
    returns row-major flattened ``block_edge**2`` tiles, cropping any
    remainder; single-clique mode returns one row holding the whole image.
    """
    grid = image.pixels.astype(np.float64)
    if spec.mode == "independent-pixels":
        return grid.reshape(-1, 1)
    if spec.mode == "single-clique":
        return grid.reshape(1, -1)
    edge = spec.block_edge
    rows = image.height // edge
    cols = image.width // edge
    if rows == 0 or cols == 0:
        raise EmptyImageError(f"block edge {edge} exceeds image {image.width}x{image.height}")
    cropped = grid[: rows * edge, : cols * edge]
    blocks = cropped.reshape(rows, edge, cols, edge).swapaxes(1, 2)
    return blocks.reshape(rows * cols, edge * edge)


def estimate_cov(samples: np.ndarray, shrinkage: float) -> GaussianModel:
    """Gaussian model from sample vectors with ridge-shrunk covariance.

    The raw sample covariance S is blended as
    ``(1 - shrinkage) * S + shrinkage * (tr(S)/k) * I``; shrinkage = 1
    always factorizes for non-constant input, shrinkage = 0 keeps S
    untouched (and fails for e.g. a constant image).
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"samples must be a (count, dim) array, got shape {arr.shape}")
    count, dim = arr.shape
    if count < 2:
        raise TooFewSamplesError(f"need at least 2 samples to estimate covariance, got {count}")
    if not (0.0 <= shrinkage <= 1.0):
        raise ValueError(f"shrinkage must lie in [0, 1], got {shrinkage!r}")
    mean = arr.mean(axis=0)
    centered = arr - mean
    raw = centered.T @ centered / (count - 1)
    ridge = (np.trace(raw) / dim) * np.eye(dim)
    blended = (1.0 - shrinkage) * raw + shrinkage * ridge
    if not blended.any():
        # Constant input: the all-zero matrix would otherwise construct a
        # degenerate model instead of surfacing the estimation failure.
        raise NotPositiveDefiniteError("estimated covariance is identically zero", pivot=0)
    return GaussianModel(mean, blended)


def image_capacity(image: GrayImage, spec: CliqueSpec, epsilon: float) -> ImageCapacityReport:
    """Capacity bound with n = clique count, plus estimated-model diagnostics.

    The bound is a function of (n, epsilon) alone; the estimated clique
    model documents what the optimal message distribution would look like
    on this image (covariance ``message_scale`` times the estimate).
    """
    samples = partition(image, spec)
    clique_count, clique_dim = samples.shape
    bound = max_rate(clique_count, epsilon)
    scale = bound.a - 1.0
    if spec.mode == "single-clique" or clique_count < 2:
        entropy = None
        message_cov = None
    else:
        model = estimate_cov(samples, spec.shrinkage)
        entropy = diff_entropy(model)
        message_cov = (scale * model.cov).tolist()
    return ImageCapacityReport(
        bound=bound,
        clique_count=clique_count,
        clique_dim=clique_dim,
        model_entropy_nats=entropy,
        message_scale=scale,
        message_cov=message_cov,
    )
