"""Point-cloud matrices and run manifests on disk.

The native matrix container is GATM: a fixed 25-byte little-endian header
(magic ``GATM``, u32 version, u8 dtype code, u64 rows, u64 cols) followed by
the row-major payload. Dtype code 0 is float32, code 1 is float64. The file
length must match the header exactly; nothing is inferred. For convenience
the loader also accepts ``.npy`` files holding 2-D C-order float arrays.

Whatever the storage precision, matrices live in memory as float64 and all
downstream computation runs in float64.

A run manifest is a JSON object describing one trained model run and the
per-layer matrix files exported from it.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"GATM"
VERSION = 1

_HEADER = struct.Struct("<4sIBQQ")
_DTYPE_BY_CODE = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODE_BY_NAME = {"f32": 0, "f64": 1}
_NPY_MAGIC = b"\x93NUMPY"


class FormatError(ValueError):
    """A file does not conform to its declared format."""


@dataclass(eq=False)
class PointCloud:
    """A set of N points in R^D, one point per row, float64."""

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        self.validate()

    def validate(self):
        if self.data.ndim != 2:
            raise ValueError("point cloud must be a 2-D array")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError("empty cloud")
        if not np.isfinite(self.data).all():
            raise ValueError("non-finite values in point cloud")

    @property
    def n_points(self):
        return self.data.shape[0]

    @property
    def extrinsic_dim(self):
        return self.data.shape[1]


def save_pointcloud(cloud: PointCloud, path, dtype: str = "f64") -> None:
    """Write a cloud as a GATM file with the given storage precision."""
    if dtype not in _CODE_BY_NAME:
        raise ValueError("dtype must be 'f32' or 'f64', got %r" % (dtype,))
    cloud.validate()
    code = _CODE_BY_NAME[dtype]
    n, d = cloud.data.shape
    header = _HEADER.pack(MAGIC, VERSION, code, n, d)
    payload = np.ascontiguousarray(cloud.data, dtype=_DTYPE_BY_CODE[code]).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def _load_gatm(buf: bytes, label: str) -> PointCloud:
    if len(buf) < _HEADER.size:
        raise FormatError("truncated header: %d bytes" % len(buf))
    magic, version, code, n, d = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError("bad magic %r" % (magic,))
    if version != VERSION:
        raise FormatError("unsupported version %d" % version)
    if code not in _DTYPE_BY_CODE:
        raise FormatError("unsupported dtype code %d" % code)
    if n < 1 or d < 1:
        raise FormatError("empty cloud")
    dt = _DTYPE_BY_CODE[code]
    expected = _HEADER.size + n * d * dt.itemsize
    if len(buf) < expected:
        raise FormatError("truncated payload: %d bytes, expected %d" % (len(buf), expected))
    if len(buf) > expected:
        raise FormatError("trailing bytes: %d bytes, expected %d" % (len(buf), expected))
    flat = np.frombuffer(buf, dtype=dt, count=n * d, offset=_HEADER.size)
    data = flat.reshape(n, d).astype(np.float64)
    if not np.isfinite(data).all():
        raise FormatError("non-finite values in payload")
    return PointCloud(data, label=label)


def _load_npy(path: Path, label: str) -> PointCloud:
    try:
        arr = np.load(path, allow_pickle=False)
    except ValueError as exc:
        raise FormatError("unreadable npy file: %s" % exc)
    if arr.ndim != 2:
        raise FormatError("npy import needs a 2-D array, got %d-D" % arr.ndim)
    if arr.dtype.kind != "f" or arr.dtype.itemsize not in (4, 8):
        raise FormatError("npy import needs float32 or float64 data, got %s" % arr.dtype)
    if not arr.flags["C_CONTIGUOUS"]:
        raise FormatError("npy import needs C-order data")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FormatError("empty cloud")
    data = arr.astype(np.float64)
    if not np.isfinite(data).all():
        raise FormatError("non-finite values in payload")
    return PointCloud(data, label=label)


def load_pointcloud(path) -> PointCloud:
    """Read a GATM or .npy matrix file into a PointCloud."""
    path = Path(path)
    label = path.stem
    with open(path, "rb") as fh:
        head = fh.read(len(_NPY_MAGIC))
        rest = fh.read()
    buf = head + rest
    if head == _NPY_MAGIC:
        return _load_npy(path, label)
    return _load_gatm(buf, label)


@dataclass
class LayerRef:
    """One exported layer: 1-based position, human name, matrix file path."""

    index: int
    name: str
    file: str


@dataclass
class RunManifest:
    """Description of one model run and its exported layer matrices."""

    model: str
    dataset: str
    lookback: int
    horizon: int
    seed: int
    layers: list = field(default_factory=list)
    epoch: int | None = None
    test_mse: float | None = None

    def validate(self):
        for name in ("model", "dataset"):
            if not isinstance(getattr(self, name), str) or not getattr(self, name):
                raise FormatError("manifest field %r must be a non-empty string" % name)
        for name in ("lookback", "horizon", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise FormatError("manifest field %r must be an integer" % name)
        if self.lookback < 0 or self.horizon < 0:
            raise FormatError("lookback and horizon must be >= 0")
        if self.epoch is not None:
            if isinstance(self.epoch, bool) or not isinstance(self.epoch, int) or self.epoch < 0:
                raise FormatError("manifest field 'epoch' must be a non-negative integer")
        if self.test_mse is not None:
            if isinstance(self.test_mse, bool) or not isinstance(self.test_mse, (int, float)):
                raise FormatError("manifest field 'test_mse' must be a number")
            if not np.isfinite(self.test_mse) or self.test_mse < 0:
                raise FormatError("manifest field 'test_mse' must be finite and >= 0")
        if not self.layers:
            raise FormatError("manifest has no layers")
        previous = 0
        for layer in self.layers:
            if isinstance(layer.index, bool) or not isinstance(layer.index, int):
                raise FormatError("layer index must be an integer")
            if previous == 0 and layer.index != 1:
                raise FormatError("layer indices must start at 1, got %d" % layer.index)
            if layer.index == previous:
                raise FormatError("duplicate layer index %d" % layer.index)
            if layer.index < previous:
                raise FormatError("layer indices must be strictly increasing")
            if not isinstance(layer.name, str) or not layer.name:
                raise FormatError("layer name must be a non-empty string")
            if not isinstance(layer.file, str) or not layer.file:
                raise FormatError("layer file must be a non-empty string")
            previous = layer.index


def load_manifest(path) -> RunManifest:
    """Read and validate a run-manifest JSON file.

    Layer file paths are resolved relative to the manifest's directory and
    must exist.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError("invalid JSON: %s" % exc)
    if not isinstance(raw, dict):
        raise FormatError("manifest must be a JSON object")
    for key in ("model", "dataset", "lookback", "horizon", "seed", "layers"):
        if key not in raw:
            raise FormatError("manifest missing required key %r" % key)
    if not isinstance(raw["layers"], list):
        raise FormatError("manifest field 'layers' must be a list")
    layers = []
    for entry in raw["layers"]:
        if not isinstance(entry, dict):
            raise FormatError("layer entries must be JSON objects")
        for key in ("index", "name", "file"):
            if key not in entry:
                raise FormatError("layer entry missing required key %r" % key)
        layers.append(LayerRef(index=entry["index"], name=entry["name"], file=entry["file"]))
    manifest = RunManifest(
        model=raw["model"],
        dataset=raw["dataset"],
        lookback=raw["lookback"],
        horizon=raw["horizon"],
        seed=raw["seed"],
        layers=layers,
        epoch=raw.get("epoch"),
        test_mse=raw.get("test_mse"),
    )
    manifest.validate()
    base = path.parent
    for layer in manifest.layers:
        resolved = Path(layer.file)
        if not resolved.is_absolute():
            resolved = base / resolved
        if not resolved.is_file():
            raise FormatError("missing layer file: %s" % layer.file)
        layer.file = str(resolved)
    return manifest


def save_manifest(manifest: RunManifest, path) -> None:
    """Write a validated run manifest as pretty-printed JSON."""
    manifest.validate()
    doc = {
        "model": manifest.model,
        "dataset": manifest.dataset,
        "lookback": manifest.lookback,
        "horizon": manifest.horizon,
        "seed": manifest.seed,
        "layers": [
            {"index": layer.index, "name": layer.name, "file": layer.file}
            for layer in manifest.layers
        ],
    }
    if manifest.epoch is not None:
        doc["epoch"] = manifest.epoch
    if manifest.test_mse is not None:
        doc["test_mse"] = float(manifest.test_mse)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
