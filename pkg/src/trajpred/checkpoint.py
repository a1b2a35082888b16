"""Binary checkpoint format.

Layout: magic `ARTC`, format version (u32 LE), manifest length (u32 LE),
manifest (UTF-8 JSON: config echo plus per-parameter name/shape/byte
offset), then the payload of little-endian float64 buffers. Round trips
are bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .autodiff import Parameter

__all__ = ["CheckpointError", "IncompatibleCheckpointError",
           "save_checkpoint", "load_checkpoint", "check_compatible"]

MAGIC = b"ARTC"
VERSION = 1


class CheckpointError(ValueError):
    """Corrupt or unreadable checkpoint file."""


class IncompatibleCheckpointError(ValueError):
    """Checkpoint does not match the requested configuration."""


def save_checkpoint(path, params: list[Parameter], config: dict) -> None:
    entries = []
    offset = 0
    payload = bytearray()
    for p in params:
        buf = np.ascontiguousarray(p.data, dtype="<f8").tobytes()
        entries.append({"name": p.name, "shape": list(p.data.shape), "offset": offset})
        payload.extend(buf)
        offset += len(buf)
    manifest = json.dumps({"config": config, "parameters": entries}).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(manifest)))
        fh.write(manifest)
        fh.write(bytes(payload))


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic bytes {blob[:4]!r}")
    version, = struct.unpack("<I", blob[4:8])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    mlen, = struct.unpack("<I", blob[8:12])
    manifest = json.loads(blob[12:12 + mlen].decode())
    payload = blob[12 + mlen:]
    params: dict[str, np.ndarray] = {}
    for entry in manifest["parameters"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=start)
        params[entry["name"]] = arr.reshape(shape).astype(np.float64)
    return params, manifest["config"]


def check_compatible(config: dict, saved_config: dict,
                     fields=("model.d", "model.heads", "model.layers", "model.k")) -> None:
    mismatched = [
        f for f in fields
        if f in saved_config and saved_config[f] != config.get(f)
    ]
    if mismatched:
        detail = ", ".join(
            f"{f}: config={config.get(f)!r} checkpoint={saved_config.get(f)!r}"
            for f in mismatched
        )
        raise IncompatibleCheckpointError(f"checkpoint incompatible: {detail}")


def restore_parameters(params: list[Parameter], saved: dict[str, np.ndarray]) -> None:
    for p in params:
        if p.name not in saved:
            raise IncompatibleCheckpointError(f"checkpoint missing parameter {p.name!r}")
        if saved[p.name].shape != p.data.shape:
            raise IncompatibleCheckpointError(
                f"parameter {p.name!r}: shape {saved[p.name].shape} != {p.data.shape}"
            )
        p.data = saved[p.name].copy()
