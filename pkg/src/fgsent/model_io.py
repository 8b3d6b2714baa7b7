"""Versioned binary model files.

Layout (little-endian): magic "FGSM", u32 version=1, u32 kind (1 tagger,
2 classifier), u32 header length + UTF-8 JSON header (label map and every
non-array field), u32 array count, then per array: u32 name length + name,
u32 ndim, ndim u32 dims, float64 data row-major. A human-readable JSON
sidecar is written next to the file as <name>.meta.json.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .classifier import ClassifierModel
from .config import TrainConfig
from .tagger import TaggerModel
from .tagscheme import TagScheme

MAGIC = b"FGSM"
VERSION = 1
_KIND_TAGGER = 1
_KIND_CLASSIFIER = 2


class ModelIOError(ValueError):
    pass


def _pack_arrays(arrays: dict[str, np.ndarray]) -> list[bytes]:
    chunks = [struct.pack("<I", len(arrays))]
    for name, arr in arrays.items():
        data = np.ascontiguousarray(arr, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", data.ndim))
        chunks.append(struct.pack(f"<{data.ndim}I", *data.shape))
        chunks.append(data.tobytes())
    return chunks


def _model_header(model) -> tuple[int, dict]:
    if isinstance(model, TaggerModel):
        return _KIND_TAGGER, {
            "scheme": {"strategy": model.scheme.strategy, "task_mode": model.scheme.task_mode},
            "mode": model.mode,
            "labels": list(model.labels),
            "provider_kind": model.provider_kind,
            "provider_params": dict(model.provider_params),
            "dimension": model.dimension,
            "config": model.config.to_dict(),
        }
    if isinstance(model, ClassifierModel):
        return _KIND_CLASSIFIER, {
            "strategy": model.strategy,
            "mode": model.mode,
            "classes": list(model.classes),
            "provider_kind": model.provider_kind,
            "provider_params": dict(model.provider_params),
            "dimension": model.dimension,
            "input_dim": model.input_dim,
            "config": model.config.to_dict(),
        }
    raise ModelIOError(f"cannot serialize {type(model).__name__}")


def save_model(model, path: str | Path) -> Path:
    path = Path(path)
    kind, header = _model_header(model)
    if kind == _KIND_TAGGER:
        arrays = {"emission": model.emission, "transition": model.transition}
    else:
        arrays = {"weights": model.weights, "bias": model.bias}

    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<II", VERSION, kind),
              struct.pack("<I", len(header_bytes)), header_bytes]
    chunks += _pack_arrays(arrays)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(b"".join(chunks))
    os.replace(tmp, path)

    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps({"kind": "tagger" if kind == _KIND_TAGGER else "classifier",
                                   "version": VERSION, **header},
                                  indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path):
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise ModelIOError(f"{path}: bad magic {data[:4]!r}")
    offset = 4

    def take(nbytes: int) -> bytes:
        nonlocal offset
        if offset + nbytes > len(data):
            raise ModelIOError(f"{path}: truncated at byte {offset}")
        out = data[offset : offset + nbytes]
        offset += nbytes
        return out

    version, kind = struct.unpack("<II", take(8))
    if version != VERSION:
        raise ModelIOError(f"{path}: unsupported version {version}")
    (header_len,) = struct.unpack("<I", take(4))
    header = json.loads(take(header_len).decode("utf-8"))

    (n_arrays,) = struct.unpack("<I", take(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_arrays):
        (name_len,) = struct.unpack("<I", take(4))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        count = int(np.prod(shape)) if shape else 1
        arrays[name] = np.frombuffer(take(8 * count), dtype="<f8").reshape(shape).copy()
    if offset != len(data):
        raise ModelIOError(f"{path}: {len(data) - offset} trailing bytes")

    config = TrainConfig.from_dict(header["config"])
    params = header.get("provider_params", {})
    if kind == _KIND_TAGGER:
        scheme = TagScheme(header["scheme"]["strategy"], header["scheme"]["task_mode"])
        return TaggerModel(scheme=scheme, mode=header["mode"],
                           labels=tuple(header["labels"]),
                           emission=arrays["emission"], transition=arrays["transition"],
                           provider_kind=header["provider_kind"], provider_params=params,
                           dimension=header["dimension"], config=config)
    if kind == _KIND_CLASSIFIER:
        return ClassifierModel(strategy=header["strategy"], mode=header["mode"],
                               classes=tuple(header["classes"]),
                               weights=arrays["weights"], bias=arrays["bias"],
                               provider_kind=header["provider_kind"], provider_params=params,
                               dimension=header["dimension"],
                               input_dim=header["input_dim"], config=config)
    raise ModelIOError(f"{path}: unknown model kind {kind}")
