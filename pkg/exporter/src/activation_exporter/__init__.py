"""Dump per-layer neural network activations as GATM point clouds."""

from .export import (
    FLATTEN_PER_SEQUENCE,
    FLATTEN_PER_TIMESTEP,
    FLATTEN_RULES,
    ExportSpec,
    export_activations,
)
from .gatm import MAGIC, VERSION, write_manifest, write_matrix

__all__ = [
    "ExportSpec",
    "export_activations",
    "write_matrix",
    "write_manifest",
    "FLATTEN_PER_TIMESTEP",
    "FLATTEN_PER_SEQUENCE",
    "FLATTEN_RULES",
    "MAGIC",
    "VERSION",
]

__version__ = "0.1.0"
