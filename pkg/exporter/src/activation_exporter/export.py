"""Layer capture through forward hooks.

Hooks attach to modules by name, so any torch model works without the
exporter knowing its architecture. Captured batches are flattened into
point clouds and written as GATM files, the manifest last, all atomically;
a crashed export never leaves a readable but incomplete run behind.
"""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .gatm import write_manifest, write_matrix

FLATTEN_PER_TIMESTEP = "per_timestep"
FLATTEN_PER_SEQUENCE = "per_sequence"
FLATTEN_RULES = (FLATTEN_PER_TIMESTEP, FLATTEN_PER_SEQUENCE)


@dataclass
class ExportSpec:
    """What to capture and where to put it.

    layers: module names to hook, in the layer order the manifest should
    use. flatten picks the point convention: per_timestep emits every time
    step of every sequence as one D-dimensional point, per_sequence emits
    one flattened point per sequence. split records which data split the
    activations came from, without the exporter imposing a choice.
    """

    layers: list
    out_dir: str
    model: str = "unknown"
    dataset: str = "unknown"
    lookback: int = 0
    horizon: int = 0
    seed: int = 0
    epoch: int = None
    test_mse: float = None
    split: str = "test"
    flatten: str = FLATTEN_PER_TIMESTEP
    dtype: str = "f32"

    def __post_init__(self):
        self.layers = [str(name) for name in self.layers]
        if not self.layers:
            raise ValueError("layer list must be nonempty")
        if len(set(self.layers)) != len(self.layers):
            raise ValueError("layer names must be unique")
        if self.flatten not in FLATTEN_RULES:
            raise ValueError(
                "flatten must be one of %s, got %r" % (", ".join(FLATTEN_RULES), self.flatten)
            )
        if self.dtype not in ("f32", "f64"):
            raise ValueError("dtype must be f32 or f64")


def _first_tensor(output):
    if isinstance(output, torch.Tensor):
        return output
    if isinstance(output, (tuple, list)):
        for item in output:
            if isinstance(item, torch.Tensor):
                return item
    raise ValueError("layer output holds no tensor, got %s" % type(output).__name__)


def _flatten(arr, rule):
    if arr.ndim < 2:
        raise ValueError("cannot coerce output of shape %s to (points, features)" % (arr.shape,))
    if rule == FLATTEN_PER_TIMESTEP:
        return arr.reshape(-1, arr.shape[-1])
    return arr.reshape(arr.shape[0], -1)


def _slug(name):
    text = re.sub(r"[^0-9A-Za-z]+", "_", name).strip("_")
    return text or "layer"


def export_activations(model, data_iterator, spec: ExportSpec):
    """Run the model over data_iterator, dump hooked layers, return the manifest path.

    Each batch from the iterator is fed to model(...) under no_grad. Layer
    outputs that are tuples contribute their first tensor. Raises on layer
    names the model does not have, listing what it does have.
    """
    available = dict(model.named_modules())
    missing = [name for name in spec.layers if name not in available]
    if missing:
        known = ", ".join(sorted(n for n in available if n))
        raise ValueError("unknown layer name(s) %s; model has: %s" % (", ".join(missing), known))

    captured = {name: [] for name in spec.layers}

    def make_hook(name):
        def hook(module, inputs, output):
            arr = _first_tensor(output).detach().cpu().numpy()
            captured[name].append(_flatten(arr, spec.flatten))

        return hook

    handles = [available[name].register_forward_hook(make_hook(name)) for name in spec.layers]
    try:
        with torch.no_grad():
            for batch in data_iterator:
                if not isinstance(batch, torch.Tensor):
                    batch = torch.as_tensor(np.asarray(batch))
                model(batch)
    finally:
        for handle in handles:
            handle.remove()

    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for pos, name in enumerate(spec.layers, start=1):
        blocks = captured[name]
        if not blocks:
            raise ValueError("layer %r produced no activations" % name)
        cloud = np.vstack(blocks)
        fname = "layer_%02d_%s.gatm" % (pos, _slug(name))
        write_matrix(out_dir / fname, cloud, dtype=spec.dtype)
        entries.append((name, fname))
    meta = {
        "model": spec.model,
        "dataset": spec.dataset,
        "lookback": spec.lookback,
        "horizon": spec.horizon,
        "seed": spec.seed,
        "epoch": spec.epoch,
        "test_mse": spec.test_mse,
        "split": spec.split,
    }
    manifest_path = out_dir / "manifest.json"
    write_manifest(manifest_path, meta, entries)
    return manifest_path
