"""Model assembly, Adam, training loop, determinism, checkpoints."""

import numpy as np
import pytest

from oscnet.activations import ActivationId
from oscnet.errors import ConfigError, DivergenceError
from oscnet.network import (
    CHECKPOINT_MAGIC,
    AdamState,
    Conv2dSpec,
    DenseSpec,
    FlattenSpec,
    LogitsSpec,
    Model,
    NetworkConfig,
    adam_init,
    adam_step,
    build_model,
    evaluate_loss,
    evaluate_top1,
    load_checkpoint,
    save_checkpoint,
    train_epoch,
)

A = ActivationId


def tiny_dense_model(activation=A.RELU, in_shape=(3, 8, 8), units=16, classes=10,
                     seed=0, dtype=np.float64):
    """Small dropout-free stack for fast, noise-free training oracles."""
    specs = [FlattenSpec(), DenseSpec(units, activation), LogitsSpec(classes)]
    rng = np.random.default_rng(seed)
    flat = int(np.prod(in_shape))
    params = {
        "layer1_w": rng.uniform(-1, 1, (flat, units)).astype(dtype) * np.sqrt(6.0 / flat),
        "layer1_b": np.zeros(units, dtype=dtype),
        "layer2_w": rng.uniform(-1, 1, (units, classes)).astype(dtype) * np.sqrt(6.0 / units),
        "layer2_b": np.zeros(classes, dtype=dtype),
    }
    return Model(specs, params, in_shape)


class TestBuildModel:
    def test_single_block_flatten_dim(self):
        m = build_model(NetworkConfig(1, A.RELU, seed=0))
        dense = next(i for i, s in enumerate(m.specs) if isinstance(s, DenseSpec))
        assert m.params[f"layer{dense}_w"].shape == (32 * 16 * 16, 64)

    def test_four_blocks_reach_2x2(self):
        m = build_model(NetworkConfig(4, A.SQU, seed=0))
        dense = next(i for i, s in enumerate(m.specs) if isinstance(s, DenseSpec))
        assert m.params[f"layer{dense}_w"].shape == (128 * 2 * 2, 64)

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_penultimate_always_64_units(self, depth):
        m = build_model(NetworkConfig(depth, A.GCU, seed=0))
        dense = [s for s in m.specs if isinstance(s, DenseSpec)]
        assert len(dense) == 1 and dense[0].units == 64

    def test_channel_progression(self):
        m = build_model(NetworkConfig(3, A.TANH, seed=0))
        convs = [s.out_channels for s in m.specs if isinstance(s, Conv2dSpec)]
        assert convs == [32, 64, 128]

    @pytest.mark.parametrize("depth", [0, 5])
    def test_depth_out_of_range(self, depth):
        with pytest.raises(ConfigError):
            NetworkConfig(depth, A.RELU)

    def test_same_seed_same_init(self):
        a = build_model(NetworkConfig(2, A.RELU, seed=11))
        b = build_model(NetworkConfig(2, A.RELU, seed=11))
        for k in a.params:
            np.testing.assert_array_equal(a.params[k], b.params[k])

    def test_forward_is_pure_in_eval_mode(self):
        m = build_model(NetworkConfig(1, A.MISH, seed=2))
        x = np.random.default_rng(0).random((2, 3, 32, 32), dtype=np.float32)
        np.testing.assert_array_equal(m.forward(x), m.forward(x))


class TestAdam:
    def test_zero_gradient_is_a_noop(self):
        p = {"w": np.array([1.0, -2.0, 3.0])}
        s = adam_init(p)
        adam_step(p, {"w": np.zeros(3)}, s, lr=0.5)
        np.testing.assert_array_equal(p["w"], [1.0, -2.0, 3.0])

    def test_first_unit_gradient_step_is_minus_lr(self):
        """m-hat = v-hat = 1 after one step with g=1, so the update is
        -lr/(1+eps) up to eps."""
        p = {"w": np.array([0.0])}
        s = adam_init(p)
        adam_step(p, {"w": np.array([1.0])}, s, lr=0.1)
        assert p["w"][0] == pytest.approx(-0.1, rel=1e-7)

    def test_step_counter_increments_once_per_call(self):
        p = {"w": np.zeros(2)}
        s = adam_init(p)
        for t in range(1, 6):
            adam_step(p, {"w": np.ones(2)}, s, 0.01)
            assert s.t == t

    def test_state_shapes_track_parameters(self):
        p = {"a": np.zeros((2, 3)), "b": np.zeros(5)}
        s = adam_init(p)
        assert s.m["a"].shape == (2, 3) and s.v["b"].shape == (5,)


class TestEndToEndGradient:
    def test_tiny_conv_model_matches_finite_differences(self):
        """Every parameter of a conv_layers=1 model on 4x4 inputs, 2 classes."""
        m = build_model(NetworkConfig(1, A.SQU, seed=5), input_shape=(2, 4, 4),
                        num_classes=2, dtype=np.float64)
        rng = np.random.default_rng(3)
        x = rng.standard_normal((3, 2, 4, 4))
        labels = np.array([0, 1, 1])
        _, grads = m.loss_and_grads(x, labels, train=False)

        h = 1e-6
        worst = 0.0
        for name, p in m.params.items():
            flat, gflat = p.ravel(), grads[name].ravel()
            idx = np.random.default_rng(0).permutation(flat.size)[:40]
            for i in idx:
                old = flat[i]
                flat[i] = old + h
                lp = m.loss_and_grads(x, labels, train=False)[0]
                flat[i] = old - h
                lm = m.loss_and_grads(x, labels, train=False)[0]
                flat[i] = old
                num = (lp - lm) / (2 * h)
                worst = max(worst, abs(num - gflat[i]) / max(1e-8, abs(num), abs(gflat[i])))
        assert worst < 1e-3


class TestTrainEpoch:
    def _data(self, n=20, seed=0):
        rng = np.random.default_rng(seed)
        return (rng.random((n, 3, 8, 8)).astype(np.float64),
                rng.integers(0, 10, n))

    def test_zero_lr_changes_nothing_and_matches_eval_loss(self):
        imgs, labs = self._data()
        m = tiny_dense_model()
        before = {k: v.copy() for k, v in m.params.items()}
        state = adam_init(m.params)
        loss = train_epoch(m, imgs, labs, state, lr=0.0, rng=np.random.default_rng(1), batch=8)
        for k in before:
            np.testing.assert_array_equal(m.params[k], before[k])
        assert loss == pytest.approx(evaluate_loss(m, imgs, labs), abs=1e-12)

    def test_single_sample_memorization(self):
        """200 epochs on one sample drive the loss below 0.01."""
        imgs, labs = self._data(n=1)
        m = tiny_dense_model()
        state = adam_init(m.params)
        rng = np.random.default_rng(2)
        loss = None
        for _ in range(200):
            loss = train_epoch(m, imgs, labs, state, lr=0.01, rng=rng, batch=1)
        assert loss < 0.01

    def test_fixed_seed_gives_bit_identical_trace(self):
        imgs, labs = self._data()
        traces = []
        for _ in range(2):
            m = tiny_dense_model(seed=4)
            state = adam_init(m.params)
            rng = np.random.default_rng(9)
            traces.append([train_epoch(m, imgs, labs, state, 1e-3, rng, batch=8)
                           for _ in range(3)])
        assert traces[0] == traces[1]

    def test_divergence_error_names_the_batch(self):
        # float32 conv stack overflows fast at an absurd learning rate
        rng0 = np.random.default_rng(0)
        imgs = rng0.random((8, 3, 32, 32), dtype=np.float32)
        labs = np.zeros(8, dtype=np.int64)
        m = build_model(NetworkConfig(1, A.RELU, seed=0))
        state = adam_init(m.params)
        rng = np.random.default_rng(0)
        with pytest.raises(DivergenceError) as err:
            for _ in range(50):
                train_epoch(m, imgs, labs, state, lr=1e12, rng=rng, batch=4)
        assert err.value.batch_index >= 0
        assert str(err.value.batch_index) in str(err.value)

    def test_empty_dataset_rejected(self):
        m = tiny_dense_model()
        with pytest.raises(ConfigError):
            train_epoch(m, np.zeros((0, 3, 8, 8)), np.zeros(0, dtype=int),
                        adam_init(m.params), 1e-3, np.random.default_rng(0))

    def test_loss_nonincreasing_on_fixed_subset(self):
        """Five epochs on 64 fixed samples: mean loss trends down for both a
        rectifier and an oscillatory unit at lr 1e-4."""
        rng = np.random.default_rng(12)
        imgs = rng.random((64, 3, 32, 32), dtype=np.float32)
        labs = rng.integers(0, 10, 64)
        for act in (A.RELU, A.SQU):
            m = build_model(NetworkConfig(1, act, seed=0))
            state = adam_init(m.params)
            tr = np.random.default_rng(5)
            losses = [train_epoch(m, imgs, labs, state, 1e-4, tr) for _ in range(5)]
            assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:])), (act, losses)


class TestLearnsStructuredData:
    def test_conv_model_separates_stripe_positions(self):
        """Class = column of a bright stripe over noise: a depth-1 model at
        lr 1e-3 should leave the 0.1 chance level far behind within 2 epochs."""
        rng = np.random.default_rng(0)
        labels = np.tile(np.arange(10), 30)
        images = rng.random((300, 3, 32, 32), dtype=np.float32) * 0.3
        for i, c in enumerate(labels):
            images[i, :, :, 3 * c:3 * c + 3] += 0.7
        m = build_model(NetworkConfig(1, A.RELU, seed=1))
        state = adam_init(m.params)
        tr = np.random.default_rng(2)
        for _ in range(2):
            train_epoch(m, images, labels, state, 1e-3, tr)
        assert evaluate_top1(m, images, labels) > 0.9


class TestSignumGradientFlow:
    def test_only_downstream_of_last_activation_learns(self):
        """signum'(z) = 0 a.e., so everything feeding the last activation gets
        exactly zero gradient; only the logits layer moves."""
        m = build_model(NetworkConfig(1, A.SIGNUM, seed=8))
        rng = np.random.default_rng(0)
        x = rng.random((4, 3, 32, 32), dtype=np.float32)
        labels = rng.integers(0, 10, 4)
        _, grads = m.loss_and_grads(x, labels, rng=np.random.default_rng(1))
        logits_idx = next(i for i, s in enumerate(m.specs) if isinstance(s, LogitsSpec))
        for name, g in grads.items():
            if name.startswith(f"layer{logits_idx}_"):
                assert np.abs(g).max() > 0
            else:
                assert np.abs(g).max() == 0.0, name


class TestEvaluateTop1:
    def test_untrained_model_is_at_chance(self):
        rng = np.random.default_rng(0)
        imgs = rng.random((500, 3, 8, 8))
        labs = np.tile(np.arange(10), 50)
        acc = evaluate_top1(tiny_dense_model(seed=1), imgs, labs)
        assert abs(acc - 0.1) < 0.03

    def test_perfect_single_sample(self):
        m = tiny_dense_model(seed=1)
        img = np.random.default_rng(2).random((1, 3, 8, 8))
        pred = int(m.forward(img).argmax())
        assert evaluate_top1(m, img, np.array([pred])) == 1.0

    def test_invariant_under_logit_rescaling(self):
        m = tiny_dense_model(seed=1)
        imgs = np.random.default_rng(3).random((20, 3, 8, 8))
        labs = np.random.default_rng(4).integers(0, 10, 20)
        base = evaluate_top1(m, imgs, labs)
        for key in ("layer2_w", "layer2_b"):
            m.params[key] *= 3.0
        assert evaluate_top1(m, imgs, labs) == base


class TestCheckpoints:
    def test_roundtrip_preserves_names_shapes_values(self, tmp_path):
        m = build_model(NetworkConfig(2, A.GCU, seed=9))
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, m.params)
        loaded = load_checkpoint(path)
        assert list(loaded) == list(m.params)
        for k in loaded:
            np.testing.assert_array_equal(loaded[k], m.params[k].astype("<f4"))

    def test_magic_bytes(self, tmp_path):
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, {"w": np.ones((2, 2), dtype=np.float32)})
        assert path.read_bytes()[:4] == CHECKPOINT_MAGIC == b"OSC1"

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            load_checkpoint(path)

    def test_restored_model_reproduces_logits(self, tmp_path):
        m = build_model(NetworkConfig(1, A.DSU, seed=3))
        x = np.random.default_rng(0).random((2, 3, 32, 32), dtype=np.float32)
        want = m.forward(x)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, m.params)
        m2 = build_model(NetworkConfig(1, A.DSU, seed=999))
        m2.params = load_checkpoint(path)
        np.testing.assert_allclose(m2.forward(x), want, atol=1e-6)
