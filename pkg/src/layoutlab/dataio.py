"""Dataset ingestion and file formats.

Annotation files are JSON:

    {"samples": [{"id": "s1", "width": 100, "height": 200,
                  "image": "s1.pgm", "saliency": "s1_sal.pgm",
                  "attention": "s1_attn.pgm", "domain": "source",
                  "elements": [{"kind": "text", "box": [10, 20, 30, 40]}]}]}

Boxes are stored in pixels and normalized by the declared image size on
load. Feature files use the LFV1 layout: 4-byte magic "LFV1", two
little-endian uint32 fields (row count, dimension), then row-major
little-endian float32 values; a rows=2 dim=3 file is exactly 36 bytes.
Rasters load from binary PGM/PPM (maxval 255) or 8-bit gray/RGB PNG.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .features import FeatureSet
from .layout import MAX_ELEMENTS, BBox, Domain, Element, ElementKind, Layout
from .raster import Raster

FEATURE_MAGIC = b"LFV1"


class AnnotationError(ValueError):
    """An annotation file failed validation."""


class FeatureFileError(ValueError):
    """A feature file is malformed."""


class RasterFormatError(ValueError):
    """A raster file is malformed or uses an unsupported encoding."""


@dataclass(frozen=True)
class SampleRecord:
    """One dataset entry: paths, declared pixel size, layout, and domain."""

    id: str
    width: int
    height: int
    image_path: Path
    saliency_path: Path | None
    attention_path: Path | None
    layout: Layout
    domain: Domain


def _require(sample: dict, key: str, ctx: str):
    if key not in sample:
        raise AnnotationError(f"{ctx}: missing required field {key!r}")
    return sample[key]


def _positive_int(value, key: str, ctx: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise AnnotationError(f"{ctx}: field {key!r} must be a positive integer")
    return value


def _resolve(root: Path, rel, key: str, ctx: str) -> Path:
    if not isinstance(rel, str) or not rel:
        raise AnnotationError(f"{ctx}: field {key!r} must be a non-empty path string")
    path = root / rel
    if not path.is_file():
        raise AnnotationError(f"{ctx}: {key} file not found: {path}")
    return path


def load_annotations(path: str | Path, images_root: str | Path | None = None) -> list[SampleRecord]:
    """Parse and validate an annotation file.

    Pixel boxes are divided by the declared width/height. Referenced files
    must exist (resolved against `images_root`, default the annotation
    file's directory). Validation errors name the offending sample.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    root = Path(images_root) if images_root is not None else path.parent

    if not isinstance(doc, dict) or "samples" not in doc:
        raise AnnotationError(f"{path}: top level must be an object with a 'samples' list")
    samples = doc["samples"]
    if not isinstance(samples, list):
        raise AnnotationError(f"{path}: 'samples' must be a list")

    records: list[SampleRecord] = []
    for idx, sample in enumerate(samples):
        ctx = f"{path.name} sample #{idx}"
        if not isinstance(sample, dict):
            raise AnnotationError(f"{ctx}: each sample must be an object")
        sid = _require(sample, "id", ctx)
        if not isinstance(sid, str) or not sid:
            raise AnnotationError(f"{ctx}: 'id' must be a non-empty string")
        ctx = f"{path.name} sample {sid!r}"
        width = _positive_int(_require(sample, "width", ctx), "width", ctx)
        height = _positive_int(_require(sample, "height", ctx), "height", ctx)
        domain_str = _require(sample, "domain", ctx)
        try:
            domain = Domain(domain_str)
        except ValueError:
            raise AnnotationError(
                f"{ctx}: unknown domain {domain_str!r} (expected 'source' or 'target')"
            ) from None

        image_path = _resolve(root, _require(sample, "image", ctx), "image", ctx)
        saliency_path = (
            _resolve(root, sample["saliency"], "saliency", ctx)
            if sample.get("saliency") is not None
            else None
        )
        attention_path = (
            _resolve(root, sample["attention"], "attention", ctx)
            if sample.get("attention") is not None
            else None
        )

        raw_elements = _require(sample, "elements", ctx)
        if not isinstance(raw_elements, list):
            raise AnnotationError(f"{ctx}: 'elements' must be a list")
        if len(raw_elements) > MAX_ELEMENTS:
            raise AnnotationError(
                f"{ctx}: {len(raw_elements)} elements exceeds the maximum of {MAX_ELEMENTS}"
            )
        elements: list[Element] = []
        for eidx, entry in enumerate(raw_elements):
            ectx = f"{ctx} element #{eidx}"
            if not isinstance(entry, dict):
                raise AnnotationError(f"{ectx}: each element must be an object")
            try:
                kind = ElementKind.from_string(_require(entry, "kind", ectx))
            except ValueError as exc:
                raise AnnotationError(f"{ectx}: {exc}") from None
            box = _require(entry, "box", ectx)
            if (
                not isinstance(box, list)
                or len(box) != 4
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in box)
            ):
                raise AnnotationError(f"{ectx}: 'box' must be [x, y, w, h] in pixels")
            try:
                bbox = BBox(box[0] / width, box[1] / height, box[2] / width, box[3] / height)
            except ValueError as exc:
                raise AnnotationError(f"{ectx}: box out of range: {exc}") from None
            elements.append(Element(kind, bbox))
        records.append(
            SampleRecord(
                id=sid,
                width=width,
                height=height,
                image_path=image_path,
                saliency_path=saliency_path,
                attention_path=attention_path,
                layout=Layout(tuple(elements)),
                domain=domain,
            )
        )
    return records


def write_feature_file(fs: FeatureSet, path: str | Path) -> None:
    """Serialize a feature set to the LFV1 binary format."""
    path = Path(path)
    payload = np.ascontiguousarray(fs.rows, dtype="<f4").tobytes()
    header = FEATURE_MAGIC + struct.pack("<II", fs.count, fs.dim)
    path.write_bytes(header + payload)


def read_feature_file(path: str | Path) -> FeatureSet:
    """Read an LFV1 feature file; errors carry the failing byte offset."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 4 or data[:4] != FEATURE_MAGIC:
        raise FeatureFileError(f"{path}: bad magic at byte 0")
    if len(data) < 12:
        raise FeatureFileError(f"{path}: truncated header, file ends at byte {len(data)}")
    rows, dim = struct.unpack("<II", data[4:12])
    if dim < 1:
        raise FeatureFileError(f"{path}: dimension must be >= 1, got {dim} at byte 8")
    expected = 12 + 4 * rows * dim
    if len(data) < expected:
        raise FeatureFileError(
            f"{path}: truncated payload, expected {expected} bytes but file ends at byte {len(data)}"
        )
    if len(data) > expected:
        raise FeatureFileError(f"{path}: trailing bytes after offset {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(rows, dim)
    return FeatureSet(values.copy())


def _read_netpbm(data: bytes, path: Path) -> Raster:
    # binary PGM (P5) / PPM (P6), maxval 255, '#' comments allowed in the header
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise RasterFormatError(f"{path}: malformed header token {token!r}")
        fields.append(int(token))
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise RasterFormatError(f"{path}: unsupported bit depth (maxval {maxval})")
    channels = 3 if data[:2] == b"P6" else 1
    need = width * height * channels
    payload = data[pos : pos + need]
    if len(payload) != need:
        raise RasterFormatError(
            f"{path}: payload has {len(payload)} bytes, expected {need}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    if channels == 1:
        return Raster(arr.reshape(height, width))
    return Raster(arr.reshape(height, width, 3))


def read_raster(path: str | Path) -> Raster:
    """Load a PGM, PPM, or PNG image as a [0, 1] float raster."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P5", b"P6"):
        return _read_netpbm(data, path)
    if data[:4] == b"\x89PNG":
        with Image.open(path) as img:
            if img.mode == "L":
                arr = np.asarray(img, dtype=np.float64) / 255.0
                return Raster(arr)
            if img.mode == "RGB":
                arr = np.asarray(img, dtype=np.float64) / 255.0
                return Raster(arr)
            raise RasterFormatError(
                f"{path}: unsupported PNG mode {img.mode!r} (need 8-bit gray or RGB)"
            )
    raise RasterFormatError(f"{path}: unsupported raster format")


def write_pgm(arr: np.ndarray, path: str | Path) -> None:
    """Write a single-channel array as binary PGM.

    Float input is treated as [0, 1] and scaled to [0, 255]; integer input
    is written as-is and must fit in a byte.
    """
    path = Path(path)
    a = np.asarray(arr)
    if a.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got shape {a.shape}")
    if np.issubdtype(a.dtype, np.floating):
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("float PGM data must lie in [0, 1]")
        data = np.round(a * 255.0).astype(np.uint8)
    else:
        if a.min() < 0 or a.max() > 255:
            raise ValueError("integer PGM data must lie in [0, 255]")
        data = a.astype(np.uint8)
    h, w = data.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + data.tobytes())
