"""Writers for the geometry toolkit's on-disk contract.

The exporter talks to the analysis side only through files: GATM matrix
dumps plus a run-manifest JSON. Both writers are self-contained so this
package imports nothing from the consumer. A GATM file is a 25-byte
little-endian header (magic "GATM", u32 version, u8 dtype code with
0 = f32 / 1 = f64, u64 rows, u64 columns) followed by the row-major
payload. All writes are atomic: temp file in the same directory, then
rename.
"""

import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"GATM"
VERSION = 1

_HEADER = struct.Struct("<4sIBQQ")
_DTYPE_CODES = {"f32": 0, "f64": 1}
_DTYPE_NUMPY = {"f32": "<f4", "f64": "<f8"}


def _atomic_write(path, blob):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    if isinstance(blob, bytes):
        tmp.write_bytes(blob)
    else:
        tmp.write_text(blob)
    os.replace(tmp, path)


def write_matrix(path, values, dtype: str = "f32") -> None:
    """Dump one non-empty 2-D float array in the GATM layout."""
    if dtype not in _DTYPE_CODES:
        raise ValueError("dtype must be f32 or f64, got %r" % dtype)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("matrix must be 2-D and non-empty, got shape %s" % (arr.shape,))
    if not np.isfinite(arr).all():
        raise ValueError("matrix has non-finite entries")
    n, d = arr.shape
    header = _HEADER.pack(MAGIC, VERSION, _DTYPE_CODES[dtype], n, d)
    payload = np.ascontiguousarray(arr.astype(_DTYPE_NUMPY[dtype])).tobytes()
    _atomic_write(path, header + payload)


def write_manifest(path, meta: dict, layer_entries) -> None:
    """Write the run manifest JSON referencing already-written layer files.

    layer_entries is an ordered list of (name, filename); indices are
    assigned 1..K in that order. meta must carry model and dataset strings;
    lookback, horizon and seed default to 0; epoch, test_mse and split are
    recorded when present.
    """
    for key in ("model", "dataset"):
        if not isinstance(meta.get(key), str) or not meta[key]:
            raise ValueError("meta needs a non-empty string %r" % key)
    entries = list(layer_entries)
    if not entries:
        raise ValueError("manifest needs at least one layer")
    doc = {
        "model": meta["model"],
        "dataset": meta["dataset"],
        "lookback": int(meta.get("lookback", 0)),
        "horizon": int(meta.get("horizon", 0)),
        "seed": int(meta.get("seed", 0)),
        "layers": [
            {"index": i, "name": str(name), "file": str(fname)}
            for i, (name, fname) in enumerate(entries, start=1)
        ],
    }
    if meta.get("epoch") is not None:
        doc["epoch"] = int(meta["epoch"])
    if meta.get("test_mse") is not None:
        doc["test_mse"] = float(meta["test_mse"])
    if meta.get("split"):
        doc["split"] = str(meta["split"])
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
