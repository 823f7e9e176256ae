"""Generator checkpoints.

Binary layout::

    CFGEN-CHECKPOINT 1\\n
    <one-line JSON header>\\n
    <little-endian float64 blob: theta, adam_m, adam_v>

The header carries the architecture, seed, epoch, Adam scalars and the
blob layout.  ``fmt="json"`` writes the same header with the vectors
inlined as JSON lists instead of a blob.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .net import AdamState, MlpParams, NetArch

MAGIC = b"CFGEN-CHECKPOINT 1\n"
_SEGMENTS = ("theta", "adam_m", "adam_v")


@dataclass
class Checkpoint:
    params: MlpParams
    adam: AdamState
    epoch: int
    seed: int
    meta: dict


def _header(ck: Checkpoint) -> dict:
    p = ck.params.arch.n_params
    return {
        "format": "cfgen-checkpoint",
        "version": 1,
        "arch": ck.params.arch.to_dict(),
        "seed": ck.seed,
        "epoch": ck.epoch,
        "adam": {"t": ck.adam.t, "beta1": ck.adam.beta1, "beta2": ck.adam.beta2, "eps": ck.adam.eps},
        "segments": [[name, p] for name in _SEGMENTS],
        "dtype": "<f8",
        "meta": ck.meta,
    }


def save_checkpoint(path, ck: Checkpoint, fmt: str = "binary") -> Path:
    path = Path(path)
    header = _header(ck)
    vectors = (ck.params.theta, ck.adam.m, ck.adam.v)
    tmp = path.with_name(path.name + ".tmp")
    if fmt == "binary":
        blob = b"".join(np.asarray(v, dtype="<f8").tobytes() for v in vectors)
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            fh.write(blob)
    elif fmt == "json":
        header["data"] = {name: v.tolist() for name, v in zip(_SEGMENTS, vectors)}
        tmp.write_text(json.dumps(header, sort_keys=True))
    else:
        raise ValueError(f"checkpoint format must be 'binary' or 'json', got {fmt!r}")
    tmp.replace(path)
    return path


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw.startswith(MAGIC):
        head_end = raw.index(b"\n", len(MAGIC))
        header = json.loads(raw[len(MAGIC) : head_end].decode("utf-8"))
        blob = np.frombuffer(raw[head_end + 1 :], dtype=header.get("dtype", "<f8"))
        data, pos = {}, 0
        for name, size in header["segments"]:
            data[name] = blob[pos : pos + size].astype(np.float64)
            pos += size
        if pos != blob.shape[0]:
            raise ValueError(f"checkpoint blob has {blob.shape[0]} values, header describes {pos}")
    else:
        try:
            header = json.loads(raw.decode("utf-8"))
            data = {k: np.array(v, dtype=np.float64) for k, v in header["data"].items()}
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, AttributeError):
            raise ValueError(f"{path} is not a cfgen checkpoint") from None
    if header.get("format") != "cfgen-checkpoint":
        raise ValueError(f"{path} is not a cfgen checkpoint")
    arch = NetArch.from_dict(header["arch"])
    a = header["adam"]
    adam = AdamState(data["adam_m"], data["adam_v"], int(a["t"]), a["beta1"], a["beta2"], a["eps"])
    return Checkpoint(MlpParams(arch, data["theta"]), adam, int(header["epoch"]), int(header["seed"]), header.get("meta", {}))
