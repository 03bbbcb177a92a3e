"""Checkpoint files.

Layout: the 8 byte magic ``HGATCKPT``, the manifest length as a
little-endian uint32, the manifest as UTF-8 JSON with sorted keys, then
every tensor's little-endian bytes back to back.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np
from hgat_common.logger import logger
from hgat_forecast.exceptions import CheckpointError, SchemaVersionError, TrainingConfigError
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.schemas.checkpoint import (
    CHECKPOINT_SCHEMA_VERSION,
    CheckpointManifest,
    TensorEntry,
    TensorKind,
)
from hgat_forecast.schemas.options import ModelOptions, Regime
from pydantic import ValidationError

MAGIC = b"HGATCKPT"
_LENGTH = struct.Struct("<I")
# options that may differ between a pretrained base and the run loading it
REFINEMENT_OPTIONS = {"refine_iterations", "refine_neighbors", "refine_heads", "refine_coord_scale_m"}

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    manifest: CheckpointManifest
    params: Dict[str, np.ndarray]
    buffers: Dict[str, np.ndarray]


def _little_endian(array: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<"))


def encode_checkpoint(
    store: ParameterStore,
    options: ModelOptions,
    regime: Regime,
    step: int,
    removed_relations: Iterable[str] = (),
) -> bytes:
    params, buffers = store.state()
    entries, chunks, offset = [], [], 0
    for kind, arrays in ((TensorKind.parameter, params), (TensorKind.buffer, buffers)):
        for name, array in arrays.items():
            data = _little_endian(array)
            entries.append(
                TensorEntry(
                    name=name,
                    kind=kind,
                    shape=list(data.shape),
                    dtype=data.dtype.str,
                    offset=offset,
                    nbytes=data.nbytes,
                )
            )
            chunks.append(data.tobytes())
            offset += data.nbytes
    manifest = CheckpointManifest(
        regime=regime,
        step=step,
        options=options,
        removed_relations=sorted(removed_relations),
        tensors=entries,
    )
    header = json.dumps(json.loads(manifest.json()), sort_keys=True).encode("utf-8")
    return MAGIC + _LENGTH.pack(len(header)) + header + b"".join(chunks)


def save_checkpoint(path: PathLike, store: ParameterStore, options: ModelOptions, regime: Regime, step: int, removed_relations: Iterable[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(store, options, regime, step, removed_relations))
    logger.info("checkpoint written to {path} (step {step})", path=path, step=step)
    return path


def decode_checkpoint(raw: bytes, source: str = "checkpoint") -> Checkpoint:
    start = len(MAGIC) + _LENGTH.size
    if len(raw) < start or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{source} is not a checkpoint file")
    (length,) = _LENGTH.unpack_from(raw, len(MAGIC))
    if len(raw) < start + length:
        raise CheckpointError(f"{source} is truncated inside its manifest")
    try:
        header = json.loads(raw[start : start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{source} has an unreadable manifest: {e}") from e
    version = header.get("schema_version") if isinstance(header, dict) else None
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise SchemaVersionError(version, CHECKPOINT_SCHEMA_VERSION, "checkpoint")
    try:
        manifest = CheckpointManifest.parse_obj(header)
    except ValidationError as e:
        raise CheckpointError(f"{source}: {e}") from e

    blob = memoryview(raw)[start + length :]
    params, buffers = {}, {}
    for entry in manifest.tensors:
        if entry.offset + entry.nbytes > len(blob):
            raise CheckpointError(f"{source} is truncated inside tensor '{entry.name}'")
        array = np.frombuffer(blob[entry.offset : entry.offset + entry.nbytes], dtype=np.dtype(entry.dtype))
        target = params if entry.kind == TensorKind.parameter else buffers
        target[entry.name] = array.reshape(entry.shape).astype(array.dtype.newbyteorder("="))
    return Checkpoint(manifest, params, buffers)


def load_checkpoint(path: PathLike) -> Checkpoint:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return decode_checkpoint(raw, str(path))


def restore_store(store: ParameterStore, checkpoint: Checkpoint, skip_prefixes: Tuple[str, ...] = ()) -> None:
    try:
        store.load_state(checkpoint.params, checkpoint.buffers, strict=True, skip_prefixes=skip_prefixes)
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"checkpoint does not match the network: {e}") from e


def load_model(path: PathLike):
    """(HgatForecaster, manifest) rebuilt from a checkpoint."""
    from hgat_forecast.model import HgatForecaster

    checkpoint = load_checkpoint(path)
    model = HgatForecaster(checkpoint.manifest.options)
    restore_store(model.store, checkpoint)
    return model, checkpoint.manifest


def load_base(model, path: PathLike) -> CheckpointManifest:
    """Copy the encoder and head weights of a pretrained checkpoint into
    ``model``; refinement weights keep their initialization."""
    from hgat_forecast.model import REFINEMENT_PREFIX

    checkpoint = load_checkpoint(path)
    ours = model.options.dict(exclude=REFINEMENT_OPTIONS)
    theirs = checkpoint.manifest.options.dict(exclude=REFINEMENT_OPTIONS)
    if ours != theirs:
        changed = sorted(k for k in ours if ours[k] != theirs.get(k))
        raise TrainingConfigError(f"base checkpoint {path} was trained with different {changed}")
    restore_store(model.store, checkpoint, skip_prefixes=(REFINEMENT_PREFIX,))
    logger.info(
        "loaded base network from {path} ({regime} regime, step {step})",
        path=path,
        regime=checkpoint.manifest.regime.value,
        step=checkpoint.manifest.step,
    )
    return checkpoint.manifest
