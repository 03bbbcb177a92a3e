import numpy as np
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.tensor import Tape, Tensor, current_tape, default_dtype, get_default_dtype


def test_backward_visits_entries_in_reverse_recording_order():
    visited = []
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        a = ops.scale(x, 2.0)
        b = ops.scale(a, 3.0)
        loss = ops.sum(b)
        for entry in tape.entries:
            original = entry.backward

            def spy(g, _op=entry.op, _original=original):
                visited.append(_op)
                return _original(g)

            entry.backward = spy
        tape.backward(loss)
    assert visited == ["sum", "scale", "scale"]
    np.testing.assert_array_equal(x.grad, [6.0, 6.0])


def test_inputs_are_recorded_before_their_consumers():
    x = Tensor(np.ones(3), requires_grad=True)
    with Tape() as tape:
        h = ops.relu(x)
        ops.sum(ops.mul(h, h))
    produced = set()
    for entry in tape.entries:
        for t in entry.inputs:
            assert t is x or id(t) in produced
        produced.add(id(entry.output))


def test_shared_input_accumulates_gradient():
    x = Tensor([3.0], requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(ops.mul(x, x))
        tape.backward(loss)
    np.testing.assert_allclose(x.grad, [6.0])


def test_grad_present_iff_requires_grad():
    assert Tensor([1.0]).grad is None
    t = Tensor([[1.0, 2.0]], requires_grad=True)
    assert t.grad.shape == t.shape


def test_tape_is_restored_after_context():
    assert current_tape() is None
    with Tape() as outer:
        with Tape() as inner:
            assert current_tape() is inner
        assert current_tape() is outer
    assert current_tape() is None


def test_default_dtype_context():
    with default_dtype("float32"):
        assert Tensor([1.0]).dtype == np.float32
    assert get_default_dtype() == np.float64
