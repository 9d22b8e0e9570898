"""Versioned binary model files.

Layout (all integers little-endian):

    magic  b"RGNNMODL"
    u32    format version
    u64    manifest length, then the UTF-8 JSON manifest
    u64    blob length, then the raw array bytes
    32B    SHA-256 over everything before it

The manifest stores the config snapshots, per-layer scalars, and an array
table (name, dtype, shape, offset into the blob). Arrays are serialized in
little-endian dtypes, so a load/save round trip reproduces every matrix
bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict

import numpy as np

from .errors import ModelFormatError, ModelVersionError
from .features import FrfWindow, SaeEncoder
from .graph import GraphSpec
from .network import ArchConfig, GraphLayer, NeuronParams, RgnnModel
from .solver import AdmmConfig

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

MAGIC = b"RGNNMODL"
FORMAT_VERSION = 1

_DTYPES = {"<f8": np.dtype("<f8"), "<i8": np.dtype("<i8")}


def _edge_array(edges) -> np.ndarray:
    if not edges:
        return np.zeros((0, 2), dtype="<i8")
    return np.array(sorted(edges), dtype="<i8")


def _collect_arrays(model: RgnnModel) -> list[tuple[str, np.ndarray]]:
    arrays = [
        ("sae/W_s", model.sae.W_s),
        ("sae/W_star", model.sae.W_star),
        ("out/W", model.output_weights),
    ]
    for li, layer in enumerate(model.layers):
        prefix = f"layer{li}"
        arrays.append((f"{prefix}/edges", _edge_array(layer.spec.edges)))
        arrays.append((f"{prefix}/repaired", _edge_array(layer.spec.repaired_edges)))
        arrays.append((f"{prefix}/perm", layer.permutation.astype("<i8")))
        arrays.append((f"{prefix}/W_bar", layer.W_bar))
        arrays.append((f"{prefix}/beta_bar", layer.beta_bar))
        for ni, neuron in enumerate(layer.neurons):
            nprefix = f"{prefix}/neuron{ni}"
            arrays.append((f"{nprefix}/omega", np.stack([w.omega for w in neuron.windows])))
            arrays.append((f"{nprefix}/b", np.stack([w.b for w in neuron.windows])))
            arrays.append((f"{nprefix}/W_n", neuron.W_n))
            arrays.append((f"{nprefix}/beta_n", neuron.beta_n))
    return arrays


def save_model(model: RgnnModel, path) -> None:
    chunks: list[bytes] = []
    table = []
    offset = 0
    for name, arr in _collect_arrays(model):
        dtype = "<i8" if np.issubdtype(arr.dtype, np.integer) else "<f8"
        raw = np.ascontiguousarray(arr, dtype=_DTYPES[dtype]).tobytes()
        table.append({"name": name, "dtype": dtype, "shape": list(arr.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)

    manifest = {
        "format_version": FORMAT_VERSION,
        "class_count": model.class_count,
        "arch": asdict(model.arch),
        "solver": asdict(model.solver),
        "sae_lambda": model.sae.lambda_sae,
        "layers": [
            {
                "node_count": layer.spec.node_count,
                "connection_probability": layer.spec.connection_probability,
                "seed": layer.spec.seed,
                "activation": layer.neurons[0].activation,
            }
            for layer in model.layers
        ],
        "arrays": table,
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    blob = b"".join(chunks)

    payload = (
        MAGIC
        + struct.pack("<I", FORMAT_VERSION)
        + struct.pack("<Q", len(manifest_bytes))
        + manifest_bytes
        + struct.pack("<Q", len(blob))
        + blob
    )
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as f:
        f.write(payload + digest)


def _read_arrays(manifest, blob) -> dict[str, np.ndarray]:
    out = {}
    for entry in manifest["arrays"]:
        dtype = _DTYPES.get(entry["dtype"])
        if dtype is None:
            raise ModelFormatError(f"unknown array dtype {entry['dtype']!r}")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * dtype.itemsize
        if end > len(blob):
            raise ModelFormatError(f"array {entry['name']!r} overruns the blob")
        out[entry["name"]] = np.frombuffer(blob[start:end], dtype=dtype).reshape(shape).copy()
    return out


def load_model(path) -> RgnnModel:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(MAGIC) + 4 + 8 + 8 + 32:
        raise ModelFormatError("file too short to be a model")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("bad magic; not a model file")
    version = struct.unpack_from("<I", data, len(MAGIC))[0]
    if version > FORMAT_VERSION:
        raise ModelVersionError(
            f"model format version {version} is newer than supported version {FORMAT_VERSION}"
        )

    payload, digest = data[:-32], data[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelFormatError("checksum mismatch; file is corrupt or truncated")

    pos = len(MAGIC) + 4
    (manifest_len,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    if pos + manifest_len > len(payload):
        raise ModelFormatError("manifest overruns the file")
    try:
        manifest = json.loads(data[pos : pos + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"manifest is not valid JSON: {exc}") from exc
    pos += manifest_len
    (blob_len,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    blob = data[pos : pos + blob_len]
    if len(blob) != blob_len:
        raise ModelFormatError("blob overruns the file")

    arrays = _read_arrays(manifest, blob)
    arch_raw = dict(manifest["arch"])
    arch_raw["neuron_counts"] = tuple(arch_raw["neuron_counts"])
    if isinstance(arch_raw["connection_probability"], list):
        arch_raw["connection_probability"] = tuple(arch_raw["connection_probability"])
    arch = ArchConfig(**arch_raw)
    solver = AdmmConfig(**manifest["solver"])

    sae = SaeEncoder(
        W_s=arrays["sae/W_s"],
        W_star=arrays["sae/W_star"],
        lambda_sae=manifest["sae_lambda"],
    )

    layers = []
    for li, meta in enumerate(manifest["layers"]):
        prefix = f"layer{li}"
        edges = frozenset(map(tuple, arrays[f"{prefix}/edges"].tolist()))
        repaired = frozenset(map(tuple, arrays[f"{prefix}/repaired"].tolist()))
        spec = GraphSpec(
            node_count=meta["node_count"],
            connection_probability=meta["connection_probability"],
            seed=meta["seed"],
            edges=edges,
            repaired_edges=repaired,
        )
        neurons = []
        for ni in range(meta["node_count"]):
            nprefix = f"{prefix}/neuron{ni}"
            omega = arrays[f"{nprefix}/omega"]
            b = arrays[f"{nprefix}/b"]
            windows = tuple(FrfWindow(omega=omega[m], b=b[m]) for m in range(omega.shape[0]))
            neurons.append(
                NeuronParams(
                    windows=windows,
                    W_n=arrays[f"{nprefix}/W_n"],
                    beta_n=arrays[f"{nprefix}/beta_n"],
                    activation=meta["activation"],
                )
            )
        layers.append(
            GraphLayer(
                spec=spec,
                neurons=tuple(neurons),
                permutation=arrays[f"{prefix}/perm"],
                W_bar=arrays[f"{prefix}/W_bar"],
                beta_bar=arrays[f"{prefix}/beta_bar"],
            )
        )

    try:
        return RgnnModel(
            sae=sae,
            layers=tuple(layers),
            output_weights=arrays["out/W"],
            class_count=manifest["class_count"],
            arch=arch,
            solver=solver,
        )
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"model file is internally inconsistent: {exc}") from exc
