"""Checkpoint files: magic, JSON header, then serialized parameter blobs.

Layout::

    b"ESACCKPT"  uint32 header length  JSON header (utf-8)  blob_0 blob_1 ...

The header lists every blob by name together with its network spec, so a
checkpoint can be read back without the run configuration.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .nnet import NetSpec, params_from_bytes, params_to_bytes, serialized_size

MAGIC = b"ESACCKPT"
_LEN = struct.Struct("<I")


class CheckpointError(ValueError):
    pass


def _spec_dict(spec: NetSpec) -> dict:
    return {"input_dim": spec.input_dim, "hidden_dims": list(spec.hidden_dims), "output_dim": spec.output_dim,
            "hidden_activation": spec.hidden_activation, "output_activation": spec.output_activation}


def _spec_from(d: dict) -> NetSpec:
    return NetSpec(d["input_dim"], tuple(d["hidden_dims"]), d["output_dim"], d["hidden_activation"],
                   d["output_activation"])


def save_checkpoint(path, meta: dict, arrays: dict[str, tuple[np.ndarray, NetSpec]]) -> None:
    """Write atomically: the file appears complete or not at all."""
    path = Path(path)
    blobs = [params_to_bytes(params, spec) for params, spec in arrays.values()]
    header = {"meta": meta, "blobs": [{"name": name, "spec": _spec_dict(spec)} for name, (_, spec) in arrays.items()]}
    head = json.dumps(header, sort_keys=True).encode()
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC + _LEN.pack(len(head)) + head)
        for blob in blobs:
            fh.write(blob)
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[dict, dict[str, tuple[np.ndarray, NetSpec]]]:
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    offset = len(MAGIC)
    (length,) = _LEN.unpack_from(data, offset)
    offset += _LEN.size
    try:
        header = json.loads(data[offset : offset + length])
    except ValueError as exc:
        raise CheckpointError(f"{path}: corrupt header ({exc})") from None
    offset += length
    arrays = {}
    for entry in header["blobs"]:
        spec = _spec_from(entry["spec"])
        size = serialized_size(spec)
        arrays[entry["name"]] = (params_from_bytes(data[offset : offset + size], spec), spec)
        offset += size
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return header["meta"], arrays
