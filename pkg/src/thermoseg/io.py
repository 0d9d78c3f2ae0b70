"""Raster and mask file I/O.

Raster formats:
  csv    one row per line, ',' separator, '.' decimal point, full precision;
         'nan' cells mark nodata pixels.
  f32    raw little-endian float32 payload behind a 16-byte header
         (8-byte magic, uint32 width, uint32 height); NaN marks nodata.
  pgm16  binary PGM (P5, maxval 65535) with the affine mapping stored in a
         header comment '# offset=<o> scale=<s>'; values decode as
         offset + word * scale. Precision is bounded by the 16-bit grid
         (range/65535), which stays below 1e-4 deg C for spans up to
         ~6.5 deg C; csv and f32 should be preferred for archival data.

Mask formats:
  pgm    binary PGM (P5, maxval 255), 0 = background, 255 = foreground.
  csv    rows of comma-separated 0/1.

All writers are atomic: content goes to a temp file in the target
directory which is then renamed over the destination.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParameterError, RasterParseError
from .raster import BinaryMask, ThermalRaster

F32_MAGIC = b"F32RASTR"

_RASTER_FORMATS = {
    "csv": "csv",
    "f32": "f32",
    "f32-binary": "f32",
    "bin": "f32",
    "pgm16": "pgm16",
    "pgm16+scale": "pgm16",
}
_MASK_FORMATS = {"pgm": "pgm", "csv": "csv"}
_EXTENSION_FORMATS = {
    ".csv": "csv",
    ".f32": "f32",
    ".bin": "f32",
    ".pgm": "pgm16",
}


def _canonical_format(fmt: str | None, path: Path, table, kind: str) -> str:
    if fmt is not None:
        key = fmt.strip().lower()
        if key not in table:
            raise ParameterError(
                f"unknown {kind} format {fmt!r}; expected one of {sorted(set(table.values()))}"
            )
        return table[key]
    ext = path.suffix.lower()
    guess = _EXTENSION_FORMATS.get(ext)
    if kind == "mask" and ext == ".pgm":
        guess = "pgm"
    if guess is None or guess not in table.values():
        raise ParameterError(
            f"cannot infer {kind} format from extension {ext!r}; pass format explicitly"
        )
    return guess


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write bytes to path via a temp file + rename in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent or Path("."))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# -- raster csv --------------------------------------------------------------

def _format_cell(value: float) -> str:
    return repr(float(value))


def _raster_to_csv(raster: ThermalRaster) -> str:
    nodata = raster.nodata_mask
    lines = []
    for r in range(raster.height):
        cells = []
        for c in range(raster.width):
            if nodata is not None and nodata[r, c]:
                cells.append("nan")
            else:
                cells.append(_format_cell(raster.values[r, c]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _raster_from_csv(text: str) -> ThermalRaster:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise RasterParseError("csv raster is empty")
    rows = []
    width = None
    nodata_rows = []
    for i, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise RasterParseError(
                f"row {i} has {len(cells)} column{'s' if len(cells) != 1 else ''}, expected {width}"
            )
        row = np.empty(len(cells), dtype=np.float64)
        nodata_row = np.zeros(len(cells), dtype=bool)
        for j, cell in enumerate(cells, start=1):
            token = cell.strip()
            if token.lower() == "nan":
                row[j - 1] = np.nan
                nodata_row[j - 1] = True
                continue
            try:
                value = float(token)
            except ValueError:
                raise RasterParseError(
                    f"row {i}, column {j}: invalid value {cell.strip()!r}"
                ) from None
            if not np.isfinite(value):
                raise RasterParseError(
                    f"row {i}, column {j}: non-finite value {cell.strip()!r}"
                )
            row[j - 1] = value
        rows.append(row)
        nodata_rows.append(nodata_row)
    values = np.vstack(rows)
    nodata = np.vstack(nodata_rows)
    if nodata.any():
        values = values.copy()
        values[nodata] = 0.0
        return ThermalRaster(values, nodata)
    return ThermalRaster(values)


# -- raster f32 --------------------------------------------------------------

def _raster_to_f32(raster: ThermalRaster) -> bytes:
    header = F32_MAGIC + struct.pack("<II", raster.width, raster.height)
    payload = raster.values.astype("<f4")
    if raster.nodata_mask is not None:
        payload = payload.copy()
        payload[raster.nodata_mask] = np.nan
    return header + payload.tobytes()


def _raster_from_f32(data: bytes) -> ThermalRaster:
    if len(data) < 16:
        raise RasterParseError("f32 raster shorter than its 16-byte header")
    if data[:8] != F32_MAGIC:
        raise RasterParseError(f"bad f32 magic {data[:8]!r}")
    width, height = struct.unpack("<II", data[8:16])
    if width < 1 or height < 1:
        raise RasterParseError(f"bad f32 dimensions {width}x{height}")
    expected = 16 + 4 * width * height
    if len(data) != expected:
        raise RasterParseError(
            f"f32 payload is {len(data) - 16} bytes, expected {expected - 16}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=16).reshape(height, width)
    values = values.astype(np.float64)
    nodata = np.isnan(values)
    if nodata.any():
        values = values.copy()
        values[nodata] = 0.0
        return ThermalRaster(values, nodata)
    if not np.isfinite(values).all():
        raise RasterParseError("f32 raster contains non-finite values")
    return ThermalRaster(values)


# -- pgm helpers -------------------------------------------------------------

def _parse_pgm(data: bytes, kind: str):
    """Return (values uint array, maxval, comments) from a binary PGM."""
    if data[:2] != b"P5":
        raise RasterParseError(f"{kind}: not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    comments = []
    while len(fields) < 3:
        if pos >= len(data):
            raise RasterParseError(f"{kind}: truncated PGM header")
        ch = data[pos: pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            if end == -1:
                raise RasterParseError(f"{kind}: unterminated PGM comment")
            comments.append(data[pos + 1: end].decode("ascii", "replace").strip())
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end: end + 1].isspace():
                end += 1
            token = data[pos:end]
            try:
                fields.append(int(token))
            except ValueError:
                raise RasterParseError(
                    f"{kind}: bad PGM header token {token!r}"
                ) from None
            pos = end
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise RasterParseError(f"{kind}: bad PGM dimensions {width}x{height}")
    if maxval == 255:
        dtype = np.dtype(np.uint8)
    elif maxval == 65535:
        dtype = np.dtype(">u2")
    else:
        raise RasterParseError(f"{kind}: unsupported PGM maxval {maxval}")
    count = width * height
    raw = data[pos:]
    itemsize = dtype.itemsize
    if len(raw) != count * itemsize:
        raise RasterParseError(
            f"{kind}: PGM payload is {len(raw)} bytes, expected {count * itemsize}"
        )
    values = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return values, maxval, comments


def _raster_to_pgm16(raster: ThermalRaster) -> bytes:
    if raster.nodata_mask is not None:
        raise ParameterError("pgm16 cannot carry a nodata mask; use csv or f32")
    lo = float(raster.values.min())
    hi = float(raster.values.max())
    scale = (hi - lo) / 65535.0 if hi > lo else 1.0
    words = np.round((raster.values - lo) / scale).astype(np.uint16)
    header = (
        f"P5\n# offset={_format_cell(lo)} scale={_format_cell(scale)}\n"
        f"{raster.width} {raster.height}\n65535\n"
    )
    return header.encode("ascii") + words.astype(">u2").tobytes()


def _raster_from_pgm16(data: bytes) -> ThermalRaster:
    values, maxval, comments = _parse_pgm(data, "pgm16 raster")
    if maxval != 65535:
        raise RasterParseError(f"pgm16 raster: expected maxval 65535, got {maxval}")
    offset, scale = 0.0, 1.0
    for comment in comments:
        parts = dict(
            item.split("=", 1) for item in comment.split() if "=" in item
        )
        if "offset" in parts or "scale" in parts:
            try:
                offset = float(parts.get("offset", offset))
                scale = float(parts.get("scale", scale))
            except ValueError:
                raise RasterParseError(
                    f"pgm16 raster: bad offset/scale comment {comment!r}"
                ) from None
    return ThermalRaster(offset + values.astype(np.float64) * scale)


# -- public raster api -------------------------------------------------------

def save_raster(raster: ThermalRaster, path: str | Path, format: str | None = None) -> None:
    """Write a raster; format from the argument or the file extension."""
    path = Path(path)
    fmt = _canonical_format(format, path, _RASTER_FORMATS, "raster")
    if fmt == "csv":
        atomic_write_text(path, _raster_to_csv(raster))
    elif fmt == "f32":
        atomic_write_bytes(path, _raster_to_f32(raster))
    else:
        atomic_write_bytes(path, _raster_to_pgm16(raster))


def load_raster(path: str | Path, format: str | None = None) -> ThermalRaster:
    """Read a raster; format from the argument or the file extension."""
    path = Path(path)
    fmt = _canonical_format(format, path, _RASTER_FORMATS, "raster")
    data = path.read_bytes()
    if fmt == "csv":
        return _raster_from_csv(data.decode("utf-8"))
    if fmt == "f32":
        return _raster_from_f32(data)
    return _raster_from_pgm16(data)


# -- masks -------------------------------------------------------------------

def save_mask(mask: BinaryMask, path: str | Path, format: str | None = None) -> None:
    """Write a mask as 0/255 PGM or 0/1 csv."""
    path = Path(path)
    fmt = _canonical_format(format, path, _MASK_FORMATS, "mask")
    if fmt == "pgm":
        header = f"P5\n{mask.width} {mask.height}\n255\n"
        payload = np.where(mask.values, 255, 0).astype(np.uint8)
        atomic_write_bytes(path, header.encode("ascii") + payload.tobytes())
    else:
        lines = [
            ",".join("1" if v else "0" for v in row) for row in mask.values
        ]
        atomic_write_text(path, "\n".join(lines) + "\n")


def load_mask(path: str | Path, format: str | None = None) -> BinaryMask:
    path = Path(path)
    fmt = _canonical_format(format, path, _MASK_FORMATS, "mask")
    data = path.read_bytes()
    if fmt == "pgm":
        values, maxval, _ = _parse_pgm(data, "mask")
        if maxval != 255:
            raise RasterParseError(f"mask: expected maxval 255, got {maxval}")
        return BinaryMask(values > 127)
    text = data.decode("utf-8")
    raster = _raster_from_csv(text)
    vals = raster.values
    if not np.isin(vals, (0.0, 1.0)).all():
        raise RasterParseError("mask csv must contain only 0 and 1")
    return BinaryMask(vals > 0.5)
