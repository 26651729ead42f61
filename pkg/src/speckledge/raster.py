"""Core raster types and bit-exact file I/O.

All pixel processing in this package runs on double-precision rasters in
[0, 1]; 8-bit quantization happens only at file boundaries.  Images are
immutable after construction (the backing arrays are marked read-only), so
every operation in the package is a pure function that is safe to call
concurrently.

File formats: binary/ASCII PGM (P5/P2, maxval 255), binary/ASCII PBM
(P4/P1, bit 1 = black = foreground), and plain CSV float matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

CHANNEL_TAGS = ("HH", "HV", "VV")

# Mean of k values <= 1 can exceed 1 by a few ulp in floating point; anything
# beyond this slack is a real invariant violation.
_EPS_SLACK = 1e-9


class NetpbmError(ValueError):
    """Malformed or unsupported Netpbm (PGM/PBM) file."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ByteImage:
    """8-bit gray raster with values in {0..255}, row-major."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("ByteImage requires a non-empty 2-D array")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError("ByteImage requires integer pixel values")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("ByteImage values must lie in {0..255}")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Real-valued raster in [0, 1], the working representation everywhere."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("GrayImage requires a non-empty 2-D array")
        if not np.isfinite(arr).all():
            raise ValueError("GrayImage values must be finite")
        lo, hi = arr.min(), arr.max()
        if lo < -_EPS_SLACK or hi > 1.0 + _EPS_SLACK:
            raise ValueError(f"GrayImage values must lie in [0, 1], got [{lo}, {hi}]")
        if lo < 0.0 or hi > 1.0:
            arr = np.clip(arr, 0.0, 1.0)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


# An edge-strength map is a GrayImage whose values are normalized resultant
# force (or gradient) magnitudes; the alias keeps signatures self-describing.
EdgeStrengthMap = GrayImage


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Boolean raster; True marks edge/foreground pixels."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("BinaryImage requires a non-empty 2-D array")
        if arr.dtype != np.bool_:
            if not (np.issubdtype(arr.dtype, np.integer) and np.isin(arr, (0, 1)).all()):
                raise ValueError("BinaryImage requires boolean (or 0/1) values")
            arr = arr.astype(bool)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class MultiChannelImage:
    """Co-registered amplitude channels keyed by polarization tag."""

    channels: Mapping[str, GrayImage] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.channels:
            raise ValueError("MultiChannelImage requires at least one channel")
        shapes = set()
        for tag, img in self.channels.items():
            if tag not in CHANNEL_TAGS:
                raise ValueError(f"unknown channel tag {tag!r}, expected one of {CHANNEL_TAGS}")
            shapes.add(img.data.shape)
        if len(shapes) != 1:
            raise ValueError(f"channel dimensions differ: {sorted(shapes)}")
        object.__setattr__(self, "channels", dict(self.channels))

    @property
    def width(self) -> int:
        return next(iter(self.channels.values())).width

    @property
    def height(self) -> int:
        return next(iter(self.channels.values())).height

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t for t in CHANNEL_TAGS if t in self.channels)

    def __getitem__(self, tag: str) -> GrayImage:
        return self.channels[tag]


def normalize(img: ByteImage) -> GrayImage:
    """Map 8-bit levels q to (q + 1) / 256, a strictly positive value in [1/256, 1].

    The +1 offset keeps every pixel away from zero, which would otherwise
    dominate mass-product detectors.
    """
    return GrayImage((img.data.astype(np.float64) + 1.0) / 256.0)


def quantize(img: GrayImage) -> ByteImage:
    """Map [0, 1] values to {0..255} by round-half-away-from-zero on v*255."""
    levels = np.floor(img.data * 255.0 + 0.5)
    return ByteImage(np.clip(levels, 0, 255).astype(np.uint8))


# --------------------------------------------------------------------------
# Netpbm I/O


def _parse_netpbm_header(blob: bytes, path: Path, n_fields: int) -> tuple[bytes, list[int], int]:
    """Return (magic, header integers, offset of payload start)."""
    if len(blob) < 2:
        raise NetpbmError(f"{path}: malformed header (file too short)")
    magic = blob[:2]
    pos = 2
    fields: list[int] = []
    while len(fields) < n_fields:
        if pos >= len(blob):
            raise NetpbmError(f"{path}: malformed header (unexpected end of file)")
        c = blob[pos : pos + 1]
        if c == b"#":
            nl = blob.find(b"\n", pos)
            pos = len(blob) if nl < 0 else nl + 1
        elif c.isspace():
            pos += 1
        elif c.isdigit():
            end = pos
            while end < len(blob) and blob[end : end + 1].isdigit():
                end += 1
            fields.append(int(blob[pos:end]))
            pos = end
        else:
            raise NetpbmError(f"{path}: malformed header (unexpected byte {c!r})")
    # exactly one whitespace byte separates the header from a binary payload
    if pos < len(blob) and blob[pos : pos + 1].isspace():
        pos += 1
    return magic, fields, pos


def _ascii_ints(blob: bytes, path: Path) -> np.ndarray:
    body = b" ".join(
        line.split(b"#", 1)[0] for line in blob.splitlines()
    )
    try:
        return np.array(body.split(), dtype=np.int64)
    except ValueError as exc:
        raise NetpbmError(f"{path}: malformed ASCII payload ({exc})") from None


def read_pgm(path: str | Path) -> ByteImage:
    """Read a binary (P5) or ASCII (P2) PGM with maxval 255."""
    path = Path(path)
    blob = path.read_bytes()
    magic, (width, height, maxval), pos = _parse_netpbm_header(blob, path, 3)
    if magic not in (b"P5", b"P2"):
        raise NetpbmError(f"{path}: malformed header (magic {magic!r}, expected P5 or P2)")
    if width <= 0 or height <= 0:
        raise NetpbmError(f"{path}: malformed header (non-positive dimensions)")
    if maxval != 255:
        raise NetpbmError(f"{path}: unsupported maxval {maxval} (only 255)")
    n = width * height
    if magic == b"P5":
        payload = blob[pos : pos + n]
        if len(payload) < n:
            raise NetpbmError(f"{path}: truncated payload ({len(payload)} of {n} bytes)")
        data = np.frombuffer(payload, dtype=np.uint8, count=n)
    else:
        values = _ascii_ints(blob[pos:], path)
        if values.size < n:
            raise NetpbmError(f"{path}: truncated payload ({values.size} of {n} samples)")
        values = values[:n]
        if values.min() < 0 or values.max() > maxval:
            raise NetpbmError(f"{path}: sample out of range [0, {maxval}]")
        data = values.astype(np.uint8)
    return ByteImage(data.reshape(height, width))


def write_pgm(img: ByteImage, path: str | Path, ascii_format: bool = False) -> None:
    """Write a PGM; P5 by default, P2 when ascii_format is set."""
    path = Path(path)
    if ascii_format:
        lines = [f"P2\n{img.width} {img.height}\n255\n"]
        lines += [" ".join(str(v) for v in row) + "\n" for row in img.data]
        path.write_text("".join(lines))
    else:
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.data.tobytes())


def read_pbm(path: str | Path) -> BinaryImage:
    """Read a packed (P4) or ASCII (P1) PBM; bit 1 = black = foreground."""
    path = Path(path)
    blob = path.read_bytes()
    magic, (width, height), pos = _parse_netpbm_header(blob, path, 2)
    if magic not in (b"P4", b"P1"):
        raise NetpbmError(f"{path}: malformed header (magic {magic!r}, expected P4 or P1)")
    if width <= 0 or height <= 0:
        raise NetpbmError(f"{path}: malformed header (non-positive dimensions)")
    if magic == b"P4":
        row_bytes = (width + 7) // 8
        n = row_bytes * height
        payload = blob[pos : pos + n]
        if len(payload) < n:
            raise NetpbmError(f"{path}: truncated payload ({len(payload)} of {n} bytes)")
        packed = np.frombuffer(payload, dtype=np.uint8, count=n).reshape(height, row_bytes)
        bits = np.unpackbits(packed, axis=1)[:, :width]
        data = bits.astype(bool)
    else:
        values = _ascii_ints(blob[pos:], path)
        n = width * height
        if values.size < n:
            raise NetpbmError(f"{path}: truncated payload ({values.size} of {n} samples)")
        values = values[:n]
        if not np.isin(values, (0, 1)).all():
            raise NetpbmError(f"{path}: PBM samples must be 0 or 1")
        data = values.astype(bool).reshape(height, width)
    return BinaryImage(data)


def write_pbm(img: BinaryImage, path: str | Path, ascii_format: bool = False) -> None:
    """Write a PBM; packed P4 by default (rows padded to byte boundaries)."""
    path = Path(path)
    if ascii_format:
        lines = [f"P1\n{img.width} {img.height}\n"]
        lines += [" ".join("1" if v else "0" for v in row) + "\n" for row in img.data]
        path.write_text("".join(lines))
    else:
        header = f"P4\n{img.width} {img.height}\n".encode("ascii")
        packed = np.packbits(img.data, axis=1)
        path.write_bytes(header + packed.tobytes())


# --------------------------------------------------------------------------
# CSV matrices


def write_matrix_csv(img: GrayImage, path: str | Path) -> None:
    """Write one CSV row per raster row, 9 decimal places per value."""
    with open(path, "w") as fh:
        for row in img.data:
            fh.write(",".join(f"{v:.9f}" for v in row) + "\n")


def read_matrix_csv(path: str | Path) -> GrayImage:
    """Read a CSV float matrix written by write_matrix_csv."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: empty CSV matrix")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged CSV matrix (row lengths {sorted(widths)})")
    return GrayImage(np.array(rows, dtype=np.float64))
