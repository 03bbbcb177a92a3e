import numpy as np
import pytest
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.blocks import BatchNorm
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tape, Tensor


def test_xavier_init_is_seeded_and_bounded():
    a, b = ParameterStore(), ParameterStore()
    a.create("w", (8, 4), np.random.default_rng(1))
    b.create("w", (8, 4), np.random.default_rng(1))
    np.testing.assert_array_equal(a["w"].data, b["w"].data)
    assert np.abs(a["w"].data).max() <= np.sqrt(6.0 / 12)


def test_duplicate_names_are_rejected():
    store = ParameterStore()
    store.create("w", (2,), init="zeros")
    with pytest.raises(KeyError):
        store.create("w", (2,), init="zeros")


def test_snapshot_shares_data_but_not_grads_or_buffers():
    store = ParameterStore()
    store.create("w", (2,), init="ones")
    norm = BatchNorm(store, "bn", 2)
    snap = store.snapshot()
    assert snap["w"].data is store["w"].data
    with Tape() as tape:
        y = norm(snap, ops.mul(Tensor([[1.0, 2.0], [3.0, 5.0]]), snap["w"]))
        tape.backward(ops.sum(ops.mul(y, Tensor([[1.0, 0.0], [0.0, 1.0]]))))
    assert store["w"]._grad is None
    assert snap.grads()["w"].shape == (2,)
    np.testing.assert_array_equal(store.buffer("bn.running_mean"), [0.0, 0.0])
    assert not np.array_equal(snap.buffer("bn.running_mean"), [0.0, 0.0])


def test_freeze_switches_parameters_to_eval_mode():
    store = ParameterStore()
    BatchNorm(store, "base.bn", 2)
    BatchNorm(store, "refinement.bn", 2)
    store.freeze(["base."])
    assert not store.is_training("base.bn.gamma")
    assert store.is_training("refinement.bn.gamma")
    assert store.trainable() == ["refinement.bn.gamma", "refinement.bn.beta"]
    assert not store.snapshot()["base.bn.gamma"].requires_grad


def test_load_state_copies_in_place_and_checks_shapes():
    store = ParameterStore()
    store.create("w", (2, 2), init="zeros")
    data = store["w"].data
    store.load_state({"w": np.ones((2, 2))})
    assert store["w"].data is data
    np.testing.assert_array_equal(data, np.ones((2, 2)))
    with pytest.raises(ValueError):
        store.load_state({"w": np.ones(3)})
    with pytest.raises(KeyError):
        store.load_state({})
