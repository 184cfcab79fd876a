"""Versioned binary checkpoints.

Layout (all integers little-endian):

    bytes 0..7    magic b"CROSSVAE"
    bytes 8..11   u32 format version (currently 1)
    bytes 12..19  u64 header length in bytes
    header        canonical JSON (sorted keys, compact separators), UTF-8
    payload       raw float32 tensor data, in header directory order

The header holds the model config, optimizer hyperparameters, epoch counter,
rng bit-generator states, and a tensor directory (name, shape, group). The
canonical header serialization is what makes save(load(path)) byte-identical.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CheckpointError
from .model import ModelConfig

MAGIC = b"CROSSVAE"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    model_config: ModelConfig
    epoch: int
    params: dict          # name -> float32 ndarray, insertion-ordered
    opt_v: dict           # name -> float32 ndarray
    opt_hyper: dict       # {"lr", "rho", "eps"}
    rng_shuffle: dict     # numpy bit-generator state
    rng_noise: dict
    version: int = FORMAT_VERSION


def _encode(ckpt: Checkpoint) -> bytes:
    directory = []
    tensors = []
    for group, table in (("param", ckpt.params), ("opt_v", ckpt.opt_v)):
        for name, arr in table.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            directory.append({"name": name, "shape": list(arr.shape), "group": group})
            tensors.append(arr)
    header = {
        "epoch": int(ckpt.epoch),
        "model_config": ckpt.model_config.to_dict(),
        "optimizer": {k: float(v) for k, v in ckpt.opt_hyper.items()},
        "rng": {"shuffle": ckpt.rng_shuffle, "noise": ckpt.rng_noise},
        "tensors": directory,
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", ckpt.version)
    out += struct.pack("<Q", len(hbytes))
    out += hbytes
    for arr in tensors:
        out += arr.tobytes()
    return bytes(out)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    data = _encode(ckpt)
    with open(path, "wb") as f:
        f.write(data)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 20:
        raise CheckpointError("truncated checkpoint: missing fixed header", offset=len(data))
    if data[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)", offset=0)
    version = struct.unpack("<I", data[8:12])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version}")
    hlen = struct.unpack("<Q", data[12:20])[0]
    if len(data) < 20 + hlen:
        raise CheckpointError("truncated checkpoint: incomplete header", offset=len(data))
    try:
        header = json.loads(data[20:20 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint header: {e}", offset=20) from e
    params: dict = {}
    opt_v: dict = {}
    offset = 20 + hlen
    for ent in header["tensors"]:
        shape = tuple(ent["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = 4 * count
        if len(data) < offset + nbytes:
            raise CheckpointError(
                f"truncated checkpoint: tensor {ent['name']!r} incomplete", offset=len(data)
            )
        arr = np.frombuffer(data[offset:offset + nbytes], dtype="<f4").reshape(shape).copy()
        offset += nbytes
        (params if ent["group"] == "param" else opt_v)[ent["name"]] = arr
    return Checkpoint(
        model_config=ModelConfig.from_dict(header["model_config"]),
        epoch=header["epoch"],
        params=params,
        opt_v=opt_v,
        opt_hyper=header["optimizer"],
        rng_shuffle=header["rng"]["shuffle"],
        rng_noise=header["rng"]["noise"],
        version=version,
    )
