"""Volume files, CT windowing and CSV reports.

Volumes use the MetaImage text header (``.mhd`` with a ``.raw`` payload
next to it, or a single ``.mha`` file with the payload appended). Only
3D little-endian uncompressed data of type MET_UCHAR, MET_SHORT,
MET_FLOAT or MET_DOUBLE is accepted. The payload is x-fastest.

Axis convention expected by the seeding stage: x increases toward the
patient's left, z toward the patient's head.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInput, EmptyScores, IoError, ParseError, TruncatedData, TypeMismatch
from .seeding import LobeId
from .volume import ByteVolume, GridMeta, HUVolume, LabelVolume, MaskVolume, ScalarVolume

__all__ = [
    "VolumeHeader",
    "WindowSpec",
    "DEFAULT_WINDOWS",
    "read_header",
    "read_volume",
    "write_volume",
    "hu_window",
    "parse_windows",
    "write_metrics_csv",
    "read_scores",
]

ELEMENT_TYPES = {
    "MET_UCHAR": np.dtype("<u1"),
    "MET_SHORT": np.dtype("<i2"),
    "MET_FLOAT": np.dtype("<f4"),
    "MET_DOUBLE": np.dtype("<f8"),
}
_TYPE_NAMES = {"uint8": "MET_UCHAR", "int16": "MET_SHORT", "float32": "MET_FLOAT", "float64": "MET_DOUBLE"}

# volume kind -> (class, allowed element types, default element type)
_KINDS = {
    "mask": (MaskVolume, {"MET_UCHAR"}, "MET_UCHAR"),
    "label": (LabelVolume, {"MET_UCHAR"}, "MET_UCHAR"),
    "byte": (ByteVolume, {"MET_UCHAR"}, "MET_UCHAR"),
    "hu": (HUVolume, {"MET_SHORT"}, "MET_SHORT"),
    "scalar": (ScalarVolume, {"MET_FLOAT", "MET_DOUBLE"}, "MET_DOUBLE"),
}


def _kind_of(volume):
    for kind in ("mask", "label", "byte", "hu", "scalar"):
        if type(volume) is _KINDS[kind][0]:
            return kind
    raise TypeError(f"cannot serialise {type(volume).__name__}")


@dataclass(frozen=True)
class VolumeHeader:
    dims: tuple
    spacing: tuple
    element_type: str
    data_file: str
    header_bytes: int = 0

    @property
    def meta(self):
        return GridMeta(self.dims, self.spacing)


def _fmt(values):
    return " ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def write_volume(volume, path, element_type=None):
    """Write ``volume`` to ``path`` (``.mha`` embeds the payload).

    ``element_type`` may be a MetaImage name or ``"uint8"``, ``"int16"``,
    ``"float32"``, ``"float64"``; by default masks and labels are written as
    MET_UCHAR, HU volumes as MET_SHORT and scalar volumes as MET_DOUBLE.
    """
    path = Path(path)
    kind = _kind_of(volume)
    _, allowed, default = _KINDS[kind]
    etype = _TYPE_NAMES.get(element_type, element_type) or default
    if etype not in allowed:
        raise TypeMismatch(f"{kind} volume cannot be stored as {etype}")
    payload = volume.data.astype(ELEMENT_TYPES[etype]).tobytes(order="C")

    local = path.suffix.lower() == ".mha"
    raw_path = path.with_suffix(".raw")
    lines = [
        "ObjectType = Image",
        "NDims = 3",
        "BinaryData = True",
        "BinaryDataByteOrderMSB = False",
        "CompressedData = False",
        f"ElementSpacing = {_fmt(volume.meta.spacing)}",
        f"DimSize = {_fmt(volume.meta.dims)}",
        "ElementByteOrderMSB = False",
        f"ElementType = {etype}",
        f"ElementDataFile = {'LOCAL' if local else raw_path.name}",
    ]
    header = ("\n".join(lines) + "\n").encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            if local:
                fh.write(payload)
        if not local:
            with open(raw_path, "wb") as fh:
                fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse_numbers(value, count, cast, key, lineno):
    parts = value.split()
    if len(parts) != count:
        raise ParseError(f"{key} needs {count} values, got {len(parts)}", lineno)
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise ParseError(f"{key} has a non-numeric value: {value!r}", lineno) from None


def _parse_bool(value, key, lineno):
    v = value.strip().lower()
    if v not in ("true", "false"):
        raise ParseError(f"{key} must be True or False, got {value!r}", lineno)
    return v == "true"


def read_header(path):
    """Parse a MetaImage header and return a :class:`VolumeHeader`."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc

    fields = {}
    offset = 0
    lineno = 0
    while True:
        end = blob.find(b"\n", offset)
        if end < 0:
            end = len(blob)
        raw = blob[offset:end]
        lineno += 1
        offset = end + 1
        try:
            line = raw.decode("ascii").strip()
        except UnicodeDecodeError:
            raise ParseError("header line is not ASCII", lineno) from None
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"expected 'Key = Value', got {line!r}", lineno)
            key, value = key.strip(), value.strip()
            fields[key] = (value, lineno)
            if key == "ElementDataFile":
                break
        if offset > len(blob):
            raise ParseError("header has no ElementDataFile entry", lineno)

    def need(key):
        if key not in fields:
            raise ParseError(f"header is missing {key}", lineno)
        return fields[key]

    value, ln = need("NDims")
    if value != "3":
        raise ParseError(f"only 3D volumes are supported, NDims = {value}", ln)
    value, ln = need("DimSize")
    dims = _parse_numbers(value, 3, int, "DimSize", ln)
    if any(d < 1 for d in dims):
        raise ParseError(f"DimSize must be positive, got {dims}", ln)
    if "ElementSpacing" in fields:
        value, ln = fields["ElementSpacing"]
        spacing = _parse_numbers(value, 3, float, "ElementSpacing", ln)
    else:
        spacing = (1.0, 1.0, 1.0)
    if not all(math.isfinite(s) and s > 0 for s in spacing):
        raise ParseError(f"ElementSpacing must be finite and positive, got {spacing}", ln)
    for key in ("ElementByteOrderMSB", "BinaryDataByteOrderMSB"):
        if key in fields and _parse_bool(fields[key][0], key, fields[key][1]):
            raise ParseError("big-endian payloads are not supported", fields[key][1])
    if "CompressedData" in fields:
        value, ln = fields["CompressedData"]
        if _parse_bool(value, "CompressedData", ln):
            raise ParseError("compressed payloads are not supported", ln)
    value, ln = need("ElementType")
    if value not in ELEMENT_TYPES:
        raise ParseError(f"unsupported ElementType {value}", ln)
    etype = value
    data_file, _ = need("ElementDataFile")
    return VolumeHeader(dims, spacing, etype, data_file, header_bytes=offset if data_file == "LOCAL" else 0)


def read_volume(path, kind=None):
    """Read a volume written by :func:`write_volume` or any tool using the same subset.

    ``kind`` is one of ``"mask"``, ``"label"``, ``"byte"``, ``"hu"``,
    ``"scalar"``; ``None`` picks label/hu/scalar from the element type.

    Raises
    ------
    ParseError, TypeMismatch, TruncatedData, IoError
    """
    path = Path(path)
    hdr = read_header(path)
    if kind is None:
        kind = {"MET_UCHAR": "label", "MET_SHORT": "hu"}.get(hdr.element_type, "scalar")
    if kind not in _KINDS:
        raise ValueError(f"unknown volume kind {kind!r}")
    cls, allowed, _ = _KINDS[kind]
    if hdr.element_type not in allowed:
        raise TypeMismatch(f"{path.name} stores {hdr.element_type}, a {kind} volume needs {'/'.join(sorted(allowed))}")

    dtype = ELEMENT_TYPES[hdr.element_type]
    try:
        if hdr.data_file == "LOCAL":
            with open(path, "rb") as fh:
                fh.seek(hdr.header_bytes)
                payload = fh.read()
        else:
            with open(path.parent / hdr.data_file, "rb") as fh:
                payload = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read payload of {path}: {exc.strerror or exc}") from exc
    expected = math.prod(hdr.dims) * dtype.itemsize
    if len(payload) != expected:
        raise TruncatedData(f"{path.name}: payload has {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype=dtype)
    if kind == "mask":
        data = data != 0
    return cls(hdr.meta, data)


@dataclass(frozen=True)
class WindowSpec:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")


# lung, mediastinum and low-attenuation display windows in HU
DEFAULT_WINDOWS = (WindowSpec(-1000, 200), WindowSpec(-160, 240), WindowSpec(-1000, -775))


def hu_window(hu, windows=DEFAULT_WINDOWS):
    """Map HU onto 0..255 per window, rounding halves up."""
    x = hu.data.astype(np.float64)
    out = []
    for w in windows:
        scaled = 255.0 * (x - w.lo) / (w.hi - w.lo)
        out.append(ByteVolume(hu.meta, np.clip(np.floor(scaled + 0.5), 0, 255)))
    return out


def parse_windows(text):
    """``"-1000:200,-160:240,-1000:-775"`` -> three :class:`WindowSpec`."""
    parts = [p for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three lo:hi windows, got {text!r}")
    specs = []
    for p in parts:
        lo, sep, hi = p.strip().partition(":")
        if not sep:
            raise ValueError(f"window {p!r} is not lo:hi")
        specs.append(WindowSpec(float(lo), float(hi)))
    return specs


def write_metrics_csv(reports, path):
    """Write ``[(case_id, LobeScores), ...]`` as one row per lobe plus ``overall``."""
    reports = list(reports)
    if not reports:
        raise EmptyInput("no metric reports to write")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["case", "lobe", "jaccard", "asd_mm", "gt_voxels"])
            for case, sc in reports:
                for lobe, j, a, n in zip(LobeId, sc.jaccard, sc.asd_mm, sc.gt_lobe_voxels):
                    w.writerow([case, lobe.name, repr(float(j)), repr(float(a)), n])
                w.writerow([case, "overall", repr(float(sc.overall_jaccard)), "", sum(sc.gt_lobe_voxels)])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_scores(path):
    """Read per-case scores from a CSV file.

    Accepts a bare column of numbers, a CSV with a ``score`` column, or the
    output of :func:`write_metrics_csv` (its ``overall`` rows are used).
    """
    if not os.path.exists(path):
        raise IoError(f"cannot read {path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyScores(f"{path} holds no scores")
    head = [c.strip().lower() for c in rows[0]]
    try:
        float(head[0])
        has_header = False
    except ValueError:
        has_header = True
    body = rows[1:] if has_header else rows
    if has_header and "score" in head:
        col = head.index("score")
        values = [r[col] for r in body]
    elif has_header and "jaccard" in head:
        col = head.index("jaccard")
        if "lobe" in head:
            lobe = head.index("lobe")
            body = [r for r in body if r[lobe].strip() == "overall"]
        values = [r[col] for r in body]
    else:
        values = [r[0] for r in body]
    if not values:
        raise EmptyScores(f"{path} holds no scores")
    try:
        return np.array([float(v) for v in values])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
