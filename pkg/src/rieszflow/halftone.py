"""Stippling of grayscale PGM images by discrepancy particle descent (r = 1)."""

import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from PIL import Image

from rieszflow.errors import DegenerateImageError, DomainError, PgmParseError
from rieszflow.measures import DiscreteMeasure
from rieszflow.particles import SimConfig, SimLog, run

logger = logging.getLogger(__name__)

PGM_MAGIC = (b"P2", b"P5")
MAX_PGM_VALUE = 65535
HEADER_BREAKS = b" \t\n\r\x0b\x0c#"
SVG_NS = "http://www.w3.org/2000/svg"

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class PixelMeasure:
    """Pixel masses at their centres in [0, aspect] x [0, 1], row-major order."""

    width: int
    height: int
    weights: np.ndarray
    positions: np.ndarray
    aspect: Optional[float] = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1)
        positions = np.array(self.positions, dtype=float).reshape(-1, 2)
        if weights.size != positions.shape[0]:
            raise DomainError("one weight per pixel position is required")
        if np.any(weights < 0) or not math.isclose(math.fsum(weights), 1.0, abs_tol=1e-12):
            raise DomainError("pixel weights must be nonnegative and sum to 1")
        weights.setflags(write=False)
        positions.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "positions", positions)
        if self.aspect is None:
            object.__setattr__(self, "aspect", self.width / self.height)

    @classmethod
    def from_gray(cls, gray: np.ndarray, full_scale: int) -> "PixelMeasure":
        gray = np.asarray(gray, dtype=float)
        height, width = gray.shape
        mass = np.clip(full_scale - gray, 0.0, None).reshape(-1)
        total = math.fsum(mass)
        if total <= 0:
            raise DegenerateImageError("image has no dark pixels (zero total mass)")
        rows, cols = np.divmod(np.arange(height * width), width)
        positions = np.column_stack(
            [(cols + 0.5) / height, 1.0 - (rows + 0.5) / height]
        )
        return cls(width, height, mass / total, positions)

    def subsample(self, stride: int) -> "PixelMeasure":
        """Aggregate ``stride x stride`` pixel blocks onto the block centres."""
        if stride < 1:
            raise DomainError(f"stride must be >= 1, got {stride}")
        if stride == 1:
            return self
        width = -(-self.width // stride)
        height = -(-self.height // stride)
        rows, cols = np.divmod(np.arange(self.width * self.height), self.width)
        block = (rows // stride) * width + cols // stride
        count = np.bincount(block, minlength=width * height)
        weights = np.bincount(block, weights=self.weights, minlength=width * height)
        x = np.bincount(block, weights=self.positions[:, 0], minlength=width * height)
        y = np.bincount(block, weights=self.positions[:, 1], minlength=width * height)
        positions = np.column_stack([x / count, y / count])
        return PixelMeasure(width, height, weights / math.fsum(weights), positions, self.aspect)

    def as_measure(self) -> DiscreteMeasure:
        """Target measure on the pixels with positive mass."""
        keep = self.weights > 0
        weights = self.weights[keep]
        return DiscreteMeasure(self.positions[keep], weights / math.fsum(weights))

    @property
    def center(self) -> Tuple[float, float]:
        return (self.aspect / 2.0, 0.5)


def _header_fields(data: bytes) -> Tuple[List[bytes], int]:
    """Magic, width, height and maxval tokens plus the raster offset."""
    fields: List[bytes] = []
    pos = 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and data[pos] not in HEADER_BREAKS:
            pos += 1
        if start == pos:
            raise PgmParseError("truncated PGM header")
        fields.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    return fields, pos + 1


def load_pgm(path: PathLike) -> PixelMeasure:
    """Binary (P5) or plain (P2) PGM image as a pixel measure, dark = heavy.

    Samples are read raw and weighted by ``maxval - v`` with the header's
    maxval, so non-standard depths such as maxval = 7 stay exact.
    """
    try:
        data = Path(path).read_bytes()
        fields, offset = _header_fields(data)
        if fields[0] not in PGM_MAGIC:
            raise PgmParseError(f"expected a grayscale PGM, got magic {fields[0]!r}")
        width, height, maxval = (int(field) for field in fields[1:])
        if width < 1 or height < 1 or not 0 < maxval <= MAX_PGM_VALUE:
            raise PgmParseError(f"bad PGM header {width}x{height}, maxval {maxval}")
        count = width * height
        if fields[0] == b"P5":
            dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
            gray = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        else:
            tokens = data[offset:].split()
            if len(tokens) < count:
                raise PgmParseError(f"expected {count} samples, found {len(tokens)}")
            gray = np.array([int(token) for token in tokens[:count]], dtype=np.int64)
    except PgmParseError as e:
        raise PgmParseError(f"{path}: {e}") from e
    except (OSError, ValueError) as e:
        raise PgmParseError(f"{path}: cannot parse PGM: {e}") from e
    if np.any(gray > maxval) or np.any(gray < 0):
        raise PgmParseError(f"{path}: samples exceed maxval {maxval}")
    logger.debug("loaded %s: %dx%d, maxval %d", path, width, height, maxval)
    return PixelMeasure.from_gray(gray.reshape(height, width), maxval)


def save_pgm(path: PathLike, gray: np.ndarray) -> None:
    """Write an 8-bit binary PGM."""
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise DomainError("save_pgm expects a 2D uint8 array")
    Image.fromarray(gray).save(path, format="PPM")


@dataclass(frozen=True, eq=False)
class HalftoneConfig:
    image: PixelMeasure
    M: int
    steps: int
    stride: int = 1
    tau0: Optional[float] = None
    tau_max: Optional[float] = None
    half_width: float = 1e-9
    seed: int = 0
    snapshot_every: int = 1
    strict_energy: bool = True
    show_progress: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise DomainError(f"M must be >= 1, got {self.M}")
        if self.stride < 1:
            raise DomainError(f"stride must be >= 1, got {self.stride}")

    def sim_config(self) -> SimConfig:
        return SimConfig(
            M=self.M,
            d=2,
            r=1.0,
            target=self.image.subsample(self.stride).as_measure(),
            steps=self.steps,
            tau0=self.tau0,
            tau_max=self.tau_max,
            center=self.image.center,
            half_width=self.half_width,
            seed=self.seed,
            snapshot_every=self.snapshot_every,
            strict_energy=self.strict_energy,
            show_progress=self.show_progress,
            workers=self.workers,
        )


def run_halftone(cfg: HalftoneConfig) -> Tuple[DiscreteMeasure, SimLog]:
    """Final dot set and the simulation log."""
    sim = cfg.sim_config()
    logger.info(
        "halftoning %dx%d image (stride %d) with %d dots",
        cfg.image.width,
        cfg.image.height,
        cfg.stride,
        cfg.M,
    )
    log = run(sim)
    return log.final.as_measure(), log


def export_svg(
    dots: Union[DiscreteMeasure, np.ndarray],
    radius: float,
    canvas: Tuple[float, float],
    aspect: float = 1.0,
) -> str:
    """One filled circle per dot on a ``canvas = (width, height)`` pixel canvas."""
    width, height = canvas
    ET.register_namespace("", SVG_NS)
    root = ET.Element(
        f"{{{SVG_NS}}}svg",
        {
            "width": format(width, "g"),
            "height": format(height, "g"),
            "viewBox": f"0 0 {format(width, 'g')} {format(height, 'g')}",
        },
    )
    points = dots.points if isinstance(dots, DiscreteMeasure) else dots
    for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
        ET.SubElement(
            root,
            f"{{{SVG_NS}}}circle",
            {
                "cx": format(x * width / aspect, ".17g"),
                "cy": format((1.0 - y) * height, ".17g"),
                "r": format(radius, ".17g"),
                "fill": "black",
            },
        )
    return ET.tostring(root, encoding="unicode")
