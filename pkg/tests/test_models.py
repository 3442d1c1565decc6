"""Bundle loading/validation and native forward passes against the
training-framework reference fixtures and hand-computed toys."""

import copy
import gzip
import json
import threading

import numpy as np
import pytest

from gqlshield.models import (
    BatchNormLayer,
    BundleError,
    ConvLayer,
    DenseLayer,
    GlobalMaxPoolLayer,
    InputShapeError,
    MaxPoolLayer,
    ModelBundle,
    Scaler,
    WeightShapeError,
    assemble_input,
    bundle_from_dict,
    cnn_forward,
    forest_forward,
    load_bundle,
    mlp_forward,
    run_layers,
    scale_features,
)
from oracles import oracle_forest


def zero_cnn_bundle(input_dim=43):
    layers = []
    in_ch = 1
    for filters in (128, 256, 512):
        layers.append(ConvLayer(weights=np.zeros((filters, in_ch, 3)),
                                bias=np.zeros(filters)))
        layers.append(BatchNormLayer(gamma=np.zeros(filters),
                                     beta=np.zeros(filters),
                                     mean=np.zeros(filters),
                                     var=np.ones(filters)))
        layers.append(MaxPoolLayer())
        in_ch = filters
    layers.append(GlobalMaxPoolLayer())
    layers.append(DenseLayer(weights=np.zeros((256, 512)), bias=np.zeros(256),
                             activation="relu"))
    layers.append(DenseLayer(weights=np.zeros((1, 256)), bias=np.zeros(1),
                             activation="sigmoid"))
    return ModelBundle(kind="cnn1d", input_dim=input_dim, layers=layers)


class TestZeroWeightModels:
    def test_cnn_zero_weights_gives_half(self):
        bundle = zero_cnn_bundle()
        prob = cnn_forward(bundle, np.linspace(-1, 1, bundle.input_dim))
        assert prob == 0.5

    def test_mlp_zero_weights_gives_half(self):
        bundle = ModelBundle(kind="mlp", input_dim=4, layers=[
            DenseLayer(weights=np.zeros((3, 4)), bias=np.zeros(3),
                       activation="relu"),
            DenseLayer(weights=np.zeros((1, 3)), bias=np.zeros(1),
                       activation="sigmoid")])
        assert mlp_forward(bundle, [1, 2, 3, 4]) == 0.5


@pytest.fixture(scope="module")
def toys(models_dir):
    with open(models_dir / "toy" / "toy_fixtures.json") as fh:
        return json.load(fh)


class TestToyFixtures:
    def test_cnn_hand_computed(self, toys):
        toy = toys["cnn"]
        layers = [
            ConvLayer(weights=np.array(toy["conv_weights"], dtype=float),
                      bias=np.array(toy["conv_bias"], dtype=float)),
            BatchNormLayer(gamma=np.array(toy["bn"]["gamma"]),
                           beta=np.array(toy["bn"]["beta"]),
                           mean=np.array(toy["bn"]["mean"]),
                           var=np.array(toy["bn"]["var"])),
            MaxPoolLayer(),
            GlobalMaxPoolLayer(),
            DenseLayer(weights=np.array(toy["dense_w"]),
                       bias=np.array(toy["dense_b"]), activation="sigmoid"),
        ]
        prob = run_layers(layers, np.array(toy["input"], dtype=float))
        assert prob == pytest.approx(toy["probability"], abs=1e-12)

    def test_mlp_hand_computed(self, toys):
        toy = toys["mlp"]
        bundle = ModelBundle(kind="mlp", input_dim=2, layers=[
            DenseLayer(weights=np.array(toy["hidden_w"]),
                       bias=np.array(toy["hidden_b"]), activation="relu"),
            DenseLayer(weights=np.array(toy["out_w"]),
                       bias=np.array(toy["out_b"]), activation="sigmoid")])
        prob = mlp_forward(bundle, np.array(toy["input"]))
        assert prob == pytest.approx(toy["probability"], abs=1e-12)

    def test_single_leaf_tree(self):
        bundle = bundle_from_dict({
            "format_version": 1, "kind": "forest", "input_dim": 2,
            "trees": [{"nodes": [{"feature": -1, "threshold": 0,
                                  "left": -1, "right": -1, "value": 1.0}]}]})
        assert forest_forward(bundle, [0.0, 0.0]) == 1.0

    def test_two_tree_averaging(self):
        leaf = lambda v: {"nodes": [{"feature": -1, "threshold": 0,
                                     "left": -1, "right": -1, "value": v}]}
        bundle = bundle_from_dict({
            "format_version": 1, "kind": "forest", "input_dim": 2,
            "trees": [leaf(0.2), leaf(0.8)]})
        assert forest_forward(bundle, [0.0, 0.0]) == pytest.approx(0.5)


class TestReferenceVectors:
    def check(self, models_dir, vectors_file, forward, atol):
        ref_dir = models_dir / "reference"
        with open(ref_dir / vectors_file) as fh:
            fixture = json.load(fh)
        bundle = load_bundle(str(ref_dir / fixture["bundle"]))
        assert len(fixture["vectors"]) == 50
        for entry in fixture["vectors"]:
            prob = forward(bundle, np.array(entry["input"]))
            assert prob == pytest.approx(entry["probability"], abs=atol)
            assert 0.0 <= prob <= 1.0

    def test_cnn_reference(self, models_dir):
        self.check(models_dir, "cnn_random_vectors.json", cnn_forward, 1e-4)

    def test_mlp_reference(self, models_dir):
        self.check(models_dir, "mlp_random_vectors.json", mlp_forward, 1e-4)

    def test_forest_reference(self, models_dir):
        self.check(models_dir, "forest_small_vectors.json", forest_forward, 1e-6)


class TestForestOracle:
    def test_matches_naive_recursive_eval(self, models_dir):
        bundle = load_bundle(str(models_dir / "reference" / "forest_small.json"))
        rng = np.random.RandomState(123)
        for _ in range(100):
            x = rng.uniform(-3, 3, bundle.input_dim)
            assert forest_forward(bundle, x) == oracle_forest(bundle, x)


class TestValidation:
    def good_dict(self, models_dir):
        with gzip.open(models_dir / "reference" / "cnn_random.json.gz", "rt") as fh:
            return json.load(fh)

    def test_loads_good_bundle(self, models_dir):
        bundle = bundle_from_dict(self.good_dict(models_dir))
        assert bundle.kind == "cnn1d"
        assert len(bundle.layers) == 12

    def test_wrong_filter_count_rejected(self, models_dir):
        data = self.good_dict(models_dir)
        data["layers"][0]["weights"] = [[[0.0] * 3]] * 64
        data["layers"][0]["filters"] = 64
        data["layers"][0]["bias"] = [0.0] * 64
        with pytest.raises(WeightShapeError):
            bundle_from_dict(data)

    def test_truncated_stack_rejected(self, models_dir):
        data = self.good_dict(models_dir)
        data["layers"] = data["layers"][:-1]
        with pytest.raises(WeightShapeError):
            bundle_from_dict(data)

    def test_input_too_small_for_stack(self, models_dir):
        data = self.good_dict(models_dir)
        data["input_dim"] = 8
        with pytest.raises(WeightShapeError):
            bundle_from_dict(data)

    def test_unknown_kind(self):
        with pytest.raises(BundleError):
            bundle_from_dict({"format_version": 1, "kind": "rnn", "input_dim": 4})

    def test_bad_format_version(self):
        with pytest.raises(BundleError):
            bundle_from_dict({"format_version": 9, "kind": "mlp", "input_dim": 4})

    def test_forest_child_out_of_range(self):
        with pytest.raises(WeightShapeError):
            bundle_from_dict({
                "format_version": 1, "kind": "forest", "input_dim": 2,
                "trees": [{"nodes": [
                    {"feature": 0, "threshold": 0.5, "left": 5, "right": 1,
                     "value": 0},
                    {"feature": -1, "threshold": 0, "left": -1, "right": -1,
                     "value": 0.5}]}]})

    def test_forest_leaf_value_out_of_bounds(self):
        with pytest.raises(WeightShapeError):
            bundle_from_dict({
                "format_version": 1, "kind": "forest", "input_dim": 2,
                "trees": [{"nodes": [{"feature": -1, "threshold": 0,
                                      "left": -1, "right": -1, "value": 1.5}]}]})

    def test_mlp_chain_mismatch(self):
        with pytest.raises(WeightShapeError):
            bundle_from_dict({
                "format_version": 1, "kind": "mlp", "input_dim": 4,
                "layers": [
                    {"type": "dense", "weights": [[0.0] * 4] * 3,
                     "bias": [0.0] * 3, "activation": "relu"},
                    {"type": "dense", "weights": [[0.0] * 7],
                     "bias": [0.0], "activation": "sigmoid"}]})

    def test_inference_input_shape_checked(self):
        bundle = zero_cnn_bundle(input_dim=43)
        with pytest.raises(InputShapeError):
            cnn_forward(bundle, np.zeros(42))


class TestDeterminismAndRange:
    def test_bit_identical_across_threads(self, models_dir):
        bundle = load_bundle(str(models_dir / "reference" / "cnn_random.json.gz"))
        x = np.linspace(-1, 1, bundle.input_dim)
        expected = cnn_forward(bundle, x)
        results = []

        def work():
            results.append(cnn_forward(bundle, x))

        threads = [threading.Thread(target=work) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == expected for r in results)

    def test_probability_range_on_random_inputs(self, models_dir):
        rng = np.random.RandomState(5)
        for name, forward in (("cnn_random.json.gz", cnn_forward),
                              ("mlp_random.json", mlp_forward),
                              ("forest_small.json", forest_forward)):
            bundle = load_bundle(str(models_dir / "reference" / name))
            for _ in range(20):
                prob = forward(bundle, rng.uniform(-5, 5, bundle.input_dim))
                assert 0.0 <= prob <= 1.0

    def test_cnn_monotone_logit_under_scaling(self):
        """With identity batch norm and nonnegative weights, doubling a
        nonnegative input cannot reduce the pre-sigmoid output."""
        rng = np.random.RandomState(11)
        bundle = zero_cnn_bundle(input_dim=30)
        for layer in bundle.layers:
            if isinstance(layer, ConvLayer):
                layer.weights = rng.uniform(0, 0.2, layer.weights.shape)
            elif isinstance(layer, BatchNormLayer):
                layer.gamma = np.ones_like(layer.gamma)
                layer.var = np.full_like(layer.var, 1 - 1e-3)
            elif isinstance(layer, DenseLayer):
                layer.weights = rng.uniform(0, 0.2, layer.weights.shape)
        x = rng.uniform(0, 1, 30)
        assert cnn_forward(bundle, 2 * x) >= cnn_forward(bundle, x)


class TestAssembleInput:
    def test_concatenation_order(self):
        out = assemble_input([0.1] * 4, [1, 2, 3], None, 7)
        assert list(out) == [0.1, 0.1, 0.1, 0.1, 1, 2, 3]

    def test_scaling_formula(self):
        out = scale_features([3.0], Scaler(means=np.array([1.0]),
                                           stds=np.array([2.0])))
        assert list(out) == [1.0]

    def test_zero_std_passthrough(self):
        out = scale_features([3.0, 4.0], Scaler(means=np.array([1.0, 9.0]),
                                                stds=np.array([2.0, 0.0])))
        assert list(out) == [1.0, 4.0]

    def test_length_mismatch_raises(self):
        with pytest.raises(InputShapeError):
            assemble_input([0.1] * 4, [1, 2, 3], None, 9)
