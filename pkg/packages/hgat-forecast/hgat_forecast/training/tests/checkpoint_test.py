import json
import struct

import numpy as np
import pytest
from hgat_forecast.exceptions import CheckpointError, SchemaVersionError, TrainingConfigError
from hgat_forecast.graph.builder import assemble_scene_graph
from hgat_forecast.model import HgatForecaster
from hgat_forecast.schemas.options import Regime
from hgat_forecast.training.checkpoint import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_base,
    load_checkpoint,
    load_model,
    save_checkpoint,
)


@pytest.fixture
def model(helpers):
    model = HgatForecaster(helpers.small_options(), seed=4)
    rng = np.random.default_rng(0)
    for name, param in model.store.items():
        param.data[...] = rng.standard_normal(param.shape) * 0.1
    return model


def manifest_of(raw: bytes) -> dict:
    (length,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    return json.loads(raw[start : start + length])


def test_layout_and_manifest(model):
    raw = encode_checkpoint(model.store, model.options, Regime.e2e, 7, ["step_to_step"])
    assert raw.startswith(MAGIC)
    manifest = manifest_of(raw)
    assert manifest["schema_version"] == "1.0"
    assert manifest["regime"] == "e2e"
    assert manifest["step"] == 7
    assert manifest["removed_relations"] == ["step_to_step"]

    names = [t["name"] for t in manifest["tensors"]]
    params, buffers = model.store.state()
    assert names == list(params) + list(buffers)
    offset = 0
    for entry in manifest["tensors"]:
        assert entry["offset"] == offset
        assert entry["dtype"] in ("<f8", "<f4")
        offset += entry["nbytes"]
    header = len(MAGIC) + 4 + struct.unpack_from("<I", raw, len(MAGIC))[0]
    assert len(raw) == header + offset


def test_encoding_is_deterministic(model):
    a = encode_checkpoint(model.store, model.options, Regime.none, 3)
    b = encode_checkpoint(model.store, model.options, Regime.none, 3)
    assert a == b


def test_round_trip_restores_the_network(helpers, model, tmp_path):
    path = save_checkpoint(tmp_path / "model.ckpt", model.store, model.options, Regime.e2e, 12)
    loaded, manifest = load_model(path)
    assert manifest.step == 12
    assert manifest.options == model.options
    for name, param in model.store.items():
        np.testing.assert_array_equal(loaded.store[name].data, param.data)
    for name in model.store.buffer_names():
        np.testing.assert_array_equal(loaded.store.buffer(name), model.store.buffer(name))

    graph = assemble_scene_graph(helpers.straight_scene(n_agents=2))
    expected = model.predict(graph).final
    actual = loaded.predict(graph).final
    np.testing.assert_array_equal(actual.trajectories.data, expected.trajectories.data)
    np.testing.assert_array_equal(actual.confidences.data, expected.confidences.data)


def test_rejects_other_files(model, tmp_path):
    path = tmp_path / "notes.txt"
    path.write_text("hello")
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        load_checkpoint(path)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.ckpt")

    raw = encode_checkpoint(model.store, model.options, Regime.none, 1)
    with pytest.raises(CheckpointError, match="truncated"):
        decode_checkpoint(raw[:-5])
    with pytest.raises(CheckpointError, match="truncated"):
        decode_checkpoint(raw[: len(MAGIC) + 10])


def test_rejects_unknown_schema_version(model):
    raw = encode_checkpoint(model.store, model.options, Regime.none, 1)
    manifest = manifest_of(raw)
    manifest["schema_version"] = "2.0"
    header = json.dumps(manifest, sort_keys=True).encode()
    with pytest.raises(SchemaVersionError):
        decode_checkpoint(MAGIC + struct.pack("<I", len(header)) + header)


def test_rejects_invalid_manifest(model):
    header = json.dumps({"schema_version": "1.0", "regime": "sometimes"}).encode()
    with pytest.raises(CheckpointError):
        decode_checkpoint(MAGIC + struct.pack("<I", len(header)) + header)


def test_load_base_keeps_refinement_initialization(helpers, model, tmp_path):
    path = save_checkpoint(tmp_path / "base.ckpt", model.store, model.options, Regime.none, 5)
    fresh = HgatForecaster(helpers.small_options(refine_iterations=3), seed=9)
    untouched = fresh.store["refinement.step_init.weight"].data.copy()

    manifest = load_base(fresh, path)
    assert manifest.regime == Regime.none
    np.testing.assert_array_equal(
        fresh.store["encoder.final.0.linear.weight"].data,
        model.store["encoder.final.0.linear.weight"].data,
    )
    np.testing.assert_array_equal(fresh.store["refinement.step_init.weight"].data, untouched)


def test_load_base_rejects_a_different_network(helpers, model, tmp_path):
    path = save_checkpoint(tmp_path / "base.ckpt", model.store, model.options, Regime.none, 5)
    other = HgatForecaster(helpers.small_options(dim=4), seed=0)
    with pytest.raises(TrainingConfigError, match="dim"):
        load_base(other, path)
