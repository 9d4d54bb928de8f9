"""Command-line entry point.

    activation-export --model model.pt --data data.npy --layers a,b,c \
        --out dump_dir --meta meta.json

The model file must hold a torch.save'd eager module whose class is
importable in this process (for example from an installed package).
TorchScript archives are rejected: compiled submodules do not accept the
forward hooks the capture relies on. Exit codes: 0 success, 1 usage error,
2 data or model error.
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import torch

from .export import FLATTEN_RULES, ExportSpec, export_activations


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_model(path):
    try:
        model = torch.load(path, map_location="cpu", weights_only=False)
    except (AttributeError, ModuleNotFoundError, pickle.UnpicklingError) as exc:
        raise ValueError(
            "could not unpickle %s (%s); the model class must be importable here, "
            "e.g. from an installed package" % (path, exc)
        )
    if isinstance(model, torch.jit.ScriptModule):
        raise ValueError(
            "%s is a TorchScript archive; compiled submodules cannot take forward "
            "hooks, save the eager module with torch.save instead" % path
        )
    if not isinstance(model, torch.nn.Module):
        raise ValueError("%s does not hold a torch module" % path)
    return model


def _batches(data, batch_size):
    tensor = torch.as_tensor(data, dtype=torch.float32)
    for start in range(0, tensor.shape[0], batch_size):
        yield tensor[start : start + batch_size]


def build_parser():
    parser = _Parser(prog="activation-export", description=__doc__)
    parser.add_argument("--model", required=True, help="TorchScript or pickled module file")
    parser.add_argument("--data", required=True, help=".npy array of model inputs")
    parser.add_argument("--layers", required=True, help="comma-separated module names")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--meta", required=True, help="JSON file with run metadata")
    parser.add_argument("--flatten", choices=FLATTEN_RULES, default=FLATTEN_RULES[0])
    parser.add_argument("--dtype", choices=("f32", "f64"), default="f32")
    parser.add_argument("--split", default="test")
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write("usage error: %s\n" % exc)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.batch_size < 1:
        sys.stderr.write("usage error: --batch-size must be >= 1\n")
        return 1
    layers = [name for name in args.layers.split(",") if name]
    try:
        meta = json.loads(Path(args.meta).read_text())
        if not isinstance(meta, dict):
            raise ValueError("meta file must hold a JSON object")
        spec = ExportSpec(
            layers=layers,
            out_dir=args.out,
            model=str(meta.get("model", "unknown")),
            dataset=str(meta.get("dataset", "unknown")),
            lookback=int(meta.get("lookback", 0)),
            horizon=int(meta.get("horizon", 0)),
            seed=int(meta.get("seed", 0)),
            epoch=meta.get("epoch"),
            test_mse=meta.get("test_mse"),
            split=args.split,
            flatten=args.flatten,
            dtype=args.dtype,
        )
        model = _load_model(args.model)
        data = np.load(args.data)
        manifest_path = export_activations(model, _batches(data, args.batch_size), spec)
    except (ValueError, OSError, KeyError, RuntimeError, json.JSONDecodeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    sys.stdout.write(str(manifest_path) + "\n")
    return 0


def main():
    sys.exit(run_cli())
