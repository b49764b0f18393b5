"""Tests for the MLP: initialisation, forward/backward, and training."""

import math

import numpy as np
import pytest

from labelprior.annotations import AgreementGroup
from labelprior.dirichlet import CategoricalDist
from labelprior.losses import LossConfig, LossKind, example_loss
from labelprior.model import (
    LabelledExample,
    ModelParams,
    TrainConfig,
    backward,
    forward,
    init,
    train,
)


def one_hot(index, k):
    label = np.zeros(k)
    label[index] = 1.0
    return label


def make_example(rng, k, x, classes, uid=0):
    labels = tuple(one_hot(c, k) for c in classes)
    soft = CategoricalDist(np.mean(labels, axis=0))
    counts = np.bincount(classes, minlength=k)
    top = counts.max()
    leaders = np.flatnonzero(counts == top)
    if len(leaders) == 1 and top == len(classes):
        group, majority = AgreementGroup.FULL, int(leaders[0])
    elif len(leaders) == 1 and top >= 2:
        group, majority = AgreementGroup.MAJORITY, int(leaders[0])
    else:
        group, majority = AgreementGroup.NONE, None
    return LabelledExample(np.asarray(x, dtype=np.float64), labels, soft, group, majority, uid)


class TestInit:
    def test_same_seed_identical(self):
        a = init(8, [16], 5, seed=123)
        b = init(8, [16], 5, seed=123)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)
        for ba, bb in zip(a.biases, b.biases):
            np.testing.assert_array_equal(ba, bb)

    def test_different_seeds_differ(self):
        a = init(8, [16], 5, seed=1)
        b = init(8, [16], 5, seed=2)
        assert any(not np.array_equal(wa, wb) for wa, wb in zip(a.weights, b.weights))

    def test_layer_shapes(self):
        params = init(8, [16], 5, seed=0)
        assert [w.shape for w in params.weights] == [(8, 16), (16, 5)]
        assert [b.shape for b in params.biases] == [(16,), (5,)]
        assert params.dims == (8, 16, 5)

    def test_biases_start_at_zero(self):
        params = init(4, [6, 3], 2, seed=9)
        for b in params.biases:
            np.testing.assert_array_equal(b, np.zeros_like(b))


class TestForward:
    def test_zero_params_give_zero_logits(self):
        params = ModelParams(
            [np.zeros((4, 6)), np.zeros((6, 3))], [np.zeros(6), np.zeros(3)]
        )
        np.testing.assert_array_equal(forward(params, np.ones(4)), np.zeros(3))

    def test_identity_single_layer(self):
        params = ModelParams([np.eye(3)], [np.zeros(3)])
        x = np.array([0.3, -1.2, 2.0])
        np.testing.assert_array_equal(forward(params, x), x)

    def test_pure_function(self):
        params = init(5, [7], 3, seed=4)
        x = np.linspace(-1, 1, 5)
        np.testing.assert_array_equal(forward(params, x), forward(params, x))

    def test_dimension_mismatch_rejected(self):
        params = init(5, [7], 3, seed=4)
        with pytest.raises(ValueError):
            forward(params, np.zeros(4))


class TestBackward:
    def test_finite_difference_over_all_parameters(self):
        rng = np.random.default_rng(42)
        params = init(4, [6], 3, seed=11)
        x = rng.normal(size=4)
        grad_z = rng.normal(size=3)

        def scalar_loss(p):
            return float(np.dot(forward(p, x), grad_z))

        grads = backward(params, x, grad_z)
        step = 1e-6
        for layer, (gw, gb) in enumerate(grads):
            for arr, g in ((params.weights[layer], gw), (params.biases[layer], gb)):
                it = np.nditer(arr, flags=["multi_index"])
                while not it.finished:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + step
                    up = scalar_loss(params)
                    arr[idx] = orig - step
                    down = scalar_loss(params)
                    arr[idx] = orig
                    numeric = (up - down) / (2 * step)
                    denom = max(abs(numeric), 1e-8)
                    assert abs(g[idx] - numeric) / denom <= 1e-4
                    it.iternext()

    def test_zero_upstream_gradient(self):
        params = init(4, [6], 3, seed=2)
        grads = backward(params, np.ones(4), np.zeros(3))
        for gw, gb in grads:
            np.testing.assert_array_equal(gw, np.zeros_like(gw))
            np.testing.assert_array_equal(gb, np.zeros_like(gb))

    def test_linearity_in_upstream_gradient(self):
        rng = np.random.default_rng(8)
        params = init(4, [6], 3, seed=2)
        x = rng.normal(size=4)
        g = rng.normal(size=3)
        single = backward(params, x, g)
        double = backward(params, x, 2.0 * g)
        for (gw1, gb1), (gw2, gb2) in zip(single, double):
            np.testing.assert_allclose(gw2, 2.0 * gw1, atol=1e-12)
            np.testing.assert_allclose(gb2, 2.0 * gb1, atol=1e-12)


def separable_dataset(rng, n=80):
    examples = []
    for i in range(n):
        cls = i % 2
        center = np.array([2.0, 2.0]) if cls == 0 else np.array([-2.0, -2.0])
        x = center + 0.3 * rng.normal(size=2)
        examples.append(make_example(rng, 2, x, [cls, cls, cls], uid=i))
    return examples


class TestTrain:
    def test_zero_learning_rate_keeps_parameters(self):
        rng = np.random.default_rng(0)
        examples = separable_dataset(rng, n=16)
        config = TrainConfig(
            loss=LossConfig(LossKind.HARD), learning_rate=0.0, epochs=1, seed=3, hidden=(4,)
        )
        params, losses = train(examples, config)
        reference = init(2, (4,), 2, seed=3)
        for w, w0 in zip(params.weights, reference.weights):
            np.testing.assert_array_equal(w, w0)
        assert len(losses) == 1

    def test_learns_separable_problem(self):
        rng = np.random.default_rng(1)
        examples = separable_dataset(rng)
        config = TrainConfig(
            loss=LossConfig(LossKind.HARD), learning_rate=1e-2, epochs=50, seed=5, hidden=(8,)
        )
        params, losses = train(examples, config)
        correct = 0
        for ex in examples:
            z = forward(params, ex.features)
            correct += int(np.argmax(z) == ex.majority)
        assert correct / len(examples) >= 0.95
        assert losses[-1] < losses[0]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        examples = separable_dataset(rng, n=32)
        config = TrainConfig(
            loss=LossConfig.default_for(LossKind.DPN_KL),
            learning_rate=1e-2,
            epochs=3,
            seed=17,
            hidden=(6,),
        )
        params_a, losses_a = train(examples, config)
        params_b, losses_b = train(examples, config)
        assert losses_a == losses_b
        for wa, wb in zip(params_a.weights, params_b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_hard_filters_no_majority_utterances(self):
        rng = np.random.default_rng(3)
        examples = separable_dataset(rng, n=8)
        examples.append(make_example(rng, 2, [0.0, 0.0], [0, 1], uid=99))
        config = TrainConfig(
            loss=LossConfig(LossKind.HARD), learning_rate=1e-3, epochs=1, seed=0, hidden=(4,)
        )
        train(examples, config)  # must not raise on the NONE-group example

    def test_hard_requires_some_majority(self):
        rng = np.random.default_rng(4)
        only_none = [make_example(rng, 2, [0.0, 1.0], [0, 1], uid=0)]
        config = TrainConfig(
            loss=LossConfig(LossKind.HARD), learning_rate=1e-3, epochs=1, seed=0
        )
        with pytest.raises(ValueError):
            train(only_none, config)

    def test_empty_dataset_rejected(self):
        config = TrainConfig(loss=LossConfig(LossKind.SOFT_KL))
        with pytest.raises(ValueError):
            train([], config)

    @pytest.mark.parametrize("kind", list(LossKind))
    def test_epoch_losses_finite_for_every_objective(self, kind):
        rng = np.random.default_rng(5)
        examples = []
        for i in range(40):
            cls = int(rng.integers(0, 3))
            x = np.zeros(4)
            x[cls] = 1.0
            x += 0.1 * rng.normal(size=4)
            classes = [cls, cls, int(rng.integers(0, 3))]
            examples.append(make_example(rng, 3, x, classes, uid=i))
        config = TrainConfig(
            loss=LossConfig.default_for(kind),
            learning_rate=1e-2,
            epochs=5,
            seed=21,
            hidden=(8,),
        )
        _, losses = train(examples, config)
        assert len(losses) == 5
        assert all(math.isfinite(v) for v in losses)


def test_epoch_losses_finite_on_default_corpus():
    # Every objective keeps a finite mean loss on the stock synthetic
    # corpus, including the Dirichlet ones whose terms involve log-gamma
    # of exponentiated logits.
    from labelprior.dataio import DatasetRecord, record_to_example
    from labelprior.synth import SynthConfig, generate

    utts, space = generate(SynthConfig(n=2000, k=5, d=16, seed=42))
    examples = [
        record_to_example(
            DatasetRecord(u.uid, "train", u.features, u.evaluations), space
        )
        for u in utts[:1600]
    ]
    for kind in LossKind:
        config = TrainConfig(
            loss=LossConfig.default_for(kind), learning_rate=1e-2, epochs=2, seed=0
        )
        _, losses = train(examples, config)
        assert all(math.isfinite(v) for v in losses), kind


def test_end_to_end_gradient_through_network():
    # Loss gradient w.r.t. every weight and bias matches finite differences
    # for each objective.
    rng = np.random.default_rng(42)
    k = 3
    params = init(4, [6], k, seed=33)
    x = rng.normal(size=4)
    labels = [one_hot(0, k), one_hot(0, k), one_hot(1, k)]
    soft = CategoricalDist(np.mean(labels, axis=0))

    for kind in LossKind:
        config = LossConfig.default_for(kind)

        def scalar_loss(p):
            z = forward(p, x)
            return example_loss(config, z, labels, soft, majority=0).value

        z = forward(params, x)
        loss = example_loss(config, z, labels, soft, majority=0)
        grads = backward(params, x, loss.grad_z)
        step = 1e-5
        for layer, (gw, gb) in enumerate(grads):
            for arr, g in ((params.weights[layer], gw), (params.biases[layer], gb)):
                it = np.nditer(arr, flags=["multi_index"])
                while not it.finished:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + step
                    up = scalar_loss(params)
                    arr[idx] = orig - step
                    down = scalar_loss(params)
                    arr[idx] = orig
                    numeric = (up - down) / (2 * step)
                    denom = max(abs(numeric), 1e-8)
                    assert abs(g[idx] - numeric) / denom <= 1e-4, (kind, layer, idx)
                    it.iternext()
