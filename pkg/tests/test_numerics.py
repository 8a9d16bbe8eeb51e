import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sysask import numerics as nm
from sysask.numerics import Tensor


def t(values):
    return Tensor(np.asarray(values, dtype=float))


class TestShapes:
    def test_matmul_shapes(self):
        out = nm.matmul(t(np.ones((2, 3))), t(np.ones((3, 1))))
        assert out.shape == (2, 1)

    def test_matmul_identity(self):
        a = np.arange(6.0).reshape(2, 3)
        out = nm.matmul(t(a), t(np.eye(3)))
        np.testing.assert_array_equal(out.values, a)

    def test_matmul_mismatch(self):
        with pytest.raises(nm.ShapeMismatch):
            nm.matmul(t(np.ones((2, 3))), t(np.ones((2, 3))))

    def test_nonfinite_rejected(self):
        with pytest.raises(nm.NonFiniteInput):
            Tensor([1.0, float("nan")])


class TestSoftmax:
    def test_symmetric(self):
        out = nm.softmax_rows(t([0.0, 0.0]))
        np.testing.assert_allclose(out.values, [0.5, 0.5])

    def test_closed_form(self):
        out = nm.softmax_rows(t([math.log(1), math.log(2), math.log(3)]))
        np.testing.assert_allclose(out.values, [1 / 6, 2 / 6, 3 / 6])

    def test_shift_invariance(self):
        x = np.array([0.3, -1.2, 2.0])
        a = nm.softmax_rows(t(x)).values
        b = nm.softmax_rows(t(x + 100.0)).values
        np.testing.assert_allclose(a, b, atol=1e-12)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=20))
    @settings(max_examples=200, deadline=None)
    def test_rows_sum_to_one(self, xs):
        p = nm.softmax_rows(t(xs)).values
        assert abs(p.sum() - 1.0) < 1e-9
        assert (p >= 0).all() and (p <= 1).all()


class TestCrossEntropy:
    def test_uniform(self):
        p = t(np.full(50, 1 / 50))
        assert nm.cross_entropy(p, 7).item() == pytest.approx(math.log(50))

    def test_certain(self):
        p = np.zeros(4)
        p[2] = 1.0
        assert nm.cross_entropy(t(p), 2).item() == 0.0

    def test_floor(self):
        p = np.zeros(4)
        p[0] = 1.0
        loss = nm.cross_entropy(t(p), 3)
        assert loss.item() == pytest.approx(-math.log(1e-12))

    def test_target_out_of_range(self):
        with pytest.raises(nm.TargetOutOfRange):
            nm.cross_entropy(t([0.5, 0.5]), 2)


class TestBackward:
    def test_square_gradient(self):
        w = t(3.0)
        loss = nm.mul(w, w)
        nm.backward(loss)
        assert w.grad == pytest.approx(6.0)

    def test_accumulation_without_zeroing(self):
        w = t(3.0)
        for _ in range(2):
            nm.backward(nm.mul(w, w))
        assert w.grad == pytest.approx(12.0)

    def test_nonscalar_loss_rejected(self):
        with pytest.raises(nm.NonScalarLoss):
            nm.backward(t([1.0, 2.0]))


class TestAdam:
    def test_first_step_magnitude(self):
        # bias-corrected first step moves each parameter by ~lr downhill
        w = Tensor(np.array([1.0, -2.0]), name="w")
        w.grad = np.array([0.5, -0.25])
        state = nm.AdamState(learning_rate=1e-2)
        nm.adam_step({"w": w}, state)
        np.testing.assert_allclose(w.values, [1.0 - 1e-2, -2.0 + 1e-2], rtol=1e-6)

    def test_gradients_zeroed_after_step(self):
        w = Tensor(np.ones(3), name="w")
        w.grad = np.ones(3)
        nm.adam_step({"w": w}, nm.AdamState())
        assert w.grad is None

    def test_deterministic(self):
        results = []
        for _ in range(2):
            w = Tensor(np.array([0.3]), name="w")
            w.grad = np.array([0.7])
            state = nm.AdamState(learning_rate=1e-3)
            nm.adam_step({"w": w}, state)
            results.append(w.values.copy())
        np.testing.assert_array_equal(results[0], results[1])


class TestGradCheck:
    def test_quadratic_form(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4))
        a = a + a.T
        w = Tensor(rng.normal(size=4), name="w")

        def f():
            return nm.scale(nm.matmul(w, nm.matmul(Tensor(a), w)), 0.5)

        assert nm.grad_check(f, {"w": w}) <= 1e-6

    def test_softmax_cross_entropy(self):
        rng = np.random.default_rng(1)
        w = Tensor(rng.normal(size=6), name="w")

        def f():
            return nm.cross_entropy(nm.softmax_rows(w), 2)

        assert nm.grad_check(f, {"w": w}) <= 1e-4

    def test_layer_norm(self):
        rng = np.random.default_rng(2)
        params = {
            "x": Tensor(rng.normal(size=(3, 5)), name="x"),
            "g": Tensor(rng.normal(size=5), name="g"),
            "b": Tensor(rng.normal(size=5), name="b"),
        }

        def f():
            return nm.mean(nm.layer_norm_rows(params["x"], params["g"], params["b"]))

        assert nm.grad_check(f, params) <= 1e-4

    def test_embed_and_concat(self):
        rng = np.random.default_rng(3)
        params = {"table": Tensor(rng.normal(size=(7, 4)), name="table")}

        def f():
            e = nm.embed_lookup(params["table"], [1, 3, 3, 0])
            v = nm.concat([nm.row(e, 0), nm.mean_rows(e)], axis=0)
            return nm.sum_all(nm.tanh(v))

        assert nm.grad_check(f, params) <= 1e-4


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        params = {"a": Tensor(np.arange(6.0).reshape(2, 3), name="a"),
                  "b": Tensor(np.zeros(4), name="b")}
        path = tmp_path / "ckpt.json"
        nm.save_params(params, path)
        loaded = nm.load_params(path)
        assert set(loaded) == {"a", "b"}
        np.testing.assert_array_equal(loaded["a"], params["a"].values)

    def test_format_tag_checked(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "other", "params": {}}')
        with pytest.raises(nm.CheckpointFormatError):
            nm.load_params(path)
