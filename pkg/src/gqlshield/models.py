"""Portable classifier bundles and their native forward passes.

Bundle files are JSON (optionally gzipped): the exact layer stack for the
1D CNN, dense layers for the MLP, and node arrays for the random forest.
All tensor shapes are validated at load time so inference can never hit a
shape error. Batch-norm inference uses epsilon 1e-3; convolutions are
valid-padding stride 1; max pooling is size 2 stride 2 with floor.
"""

from __future__ import annotations

import gzip
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .embedding import EmbeddingSpec
from .features import FEATURE_COUNTS

FORMAT_VERSION = 1
BN_EPSILON = 1e-3

KIND_CNN = "cnn1d"
KIND_MLP = "mlp"
KIND_FOREST = "forest"

# (filters, kernel) for the canonical conv blocks.
CNN_STACK = ((128, 3), (256, 3), (512, 3))
CNN_DENSE_HIDDEN = 256


class BundleError(Exception):
    """Malformed bundle file (structure, kinds, metadata)."""


class WeightShapeError(BundleError):
    """Tensor shapes do not match the declared architecture."""


class InputShapeError(Exception):
    """Runtime input does not match the bundle's input_dim."""


@dataclass
class ConvLayer:
    weights: np.ndarray  # [filters, in_channels, kernel]
    bias: np.ndarray     # [filters]


@dataclass
class BatchNormLayer:
    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray


@dataclass
class MaxPoolLayer:
    size: int = 2


@dataclass
class GlobalMaxPoolLayer:
    pass


@dataclass
class DenseLayer:
    weights: np.ndarray  # [out, in]
    bias: np.ndarray     # [out]
    activation: str      # relu | sigmoid


@dataclass
class TreeNode:
    feature: int  # -1 for leaves
    threshold: float
    left: int
    right: int
    value: float


@dataclass
class Tree:
    nodes: list[TreeNode]


@dataclass
class Scaler:
    means: np.ndarray
    stds: np.ndarray


@dataclass
class ModelBundle:
    kind: str
    input_dim: int
    feature_schema_version: int = 1
    scaler: Optional[Scaler] = None
    layers: list = field(default_factory=list)
    trees: list[Tree] = field(default_factory=list)
    decision_threshold: float = 0.5
    embedding: Optional[EmbeddingSpec] = None


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------

def load_bundle(path: str) -> ModelBundle:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        data = json.load(fh)
    return bundle_from_dict(data)


def bundle_from_dict(data: dict[str, Any]) -> ModelBundle:
    if not isinstance(data, dict):
        raise BundleError("bundle must be a JSON object")
    if data.get("format_version") != FORMAT_VERSION:
        raise BundleError(f"unsupported format_version {data.get('format_version')!r}")
    kind = data.get("kind")
    if kind not in (KIND_CNN, KIND_MLP, KIND_FOREST):
        raise BundleError(f"unknown kind {kind!r}")
    input_dim = data.get("input_dim")
    if not isinstance(input_dim, int) or input_dim <= 0:
        raise BundleError("input_dim must be a positive integer")
    threshold = data.get("decision_threshold", 0.5)
    if not isinstance(threshold, (int, float)) or not 0.0 <= threshold <= 1.0:
        raise BundleError("decision_threshold must be in [0, 1]")

    scaler = None
    if data.get("scaler") is not None:
        raw = data["scaler"]
        means = np.asarray(raw.get("means", []), dtype=np.float64)
        stds = np.asarray(raw.get("stds", []), dtype=np.float64)
        if means.ndim != 1 or means.shape != stds.shape:
            raise WeightShapeError("scaler means/stds must be equal-length vectors")
        scaler = Scaler(means=means, stds=stds)

    embedding = None
    if data.get("embedding") is not None:
        embedding = EmbeddingSpec.from_dict(data["embedding"])

    bundle = ModelBundle(
        kind=kind, input_dim=input_dim,
        feature_schema_version=int(data.get("feature_schema_version", 1)),
        scaler=scaler, decision_threshold=float(threshold), embedding=embedding)

    if kind == KIND_FOREST:
        bundle.trees = _load_trees(data.get("trees"))
    else:
        bundle.layers = _load_layers(data.get("layers"))
        if kind == KIND_CNN:
            _validate_cnn_stack(bundle)
        else:
            _validate_mlp_stack(bundle)
    return bundle


def _load_layers(raw: Any) -> list:
    if not isinstance(raw, list) or not raw:
        raise BundleError("layers must be a non-empty list")
    layers = []
    for entry in raw:
        ltype = entry.get("type")
        if ltype == "conv1d":
            weights = np.asarray(entry["weights"], dtype=np.float64)
            bias = np.asarray(entry["bias"], dtype=np.float64)
            if weights.ndim != 3:
                raise WeightShapeError("conv1d weights must be [filters][in][kernel]")
            if bias.shape != (weights.shape[0],):
                raise WeightShapeError("conv1d bias length must equal filters")
            if entry.get("filters") not in (None, weights.shape[0]) \
                    or entry.get("kernel") not in (None, weights.shape[2]):
                raise WeightShapeError("conv1d metadata disagrees with weights")
            layers.append(ConvLayer(weights=weights, bias=bias))
        elif ltype == "batch_norm":
            arrays = [np.asarray(entry[k], dtype=np.float64)
                      for k in ("gamma", "beta", "mean", "var")]
            if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
                raise WeightShapeError("batch_norm arrays must share one length")
            layers.append(BatchNormLayer(*arrays))
        elif ltype == "max_pool":
            size = entry.get("size", 2)
            if size != 2:
                raise WeightShapeError("max_pool size must be 2")
            layers.append(MaxPoolLayer(size=2))
        elif ltype == "global_max_pool":
            layers.append(GlobalMaxPoolLayer())
        elif ltype == "dense":
            weights = np.asarray(entry["weights"], dtype=np.float64)
            bias = np.asarray(entry["bias"], dtype=np.float64)
            if weights.ndim != 2 or bias.shape != (weights.shape[0],):
                raise WeightShapeError("dense weights must be [out][in] with matching bias")
            activation = entry.get("activation", "relu")
            if activation not in ("relu", "sigmoid"):
                raise BundleError(f"unknown activation {activation!r}")
            layers.append(DenseLayer(weights=weights, bias=bias, activation=activation))
        else:
            raise BundleError(f"unknown layer type {ltype!r}")
    return layers


def _validate_cnn_stack(bundle: ModelBundle) -> None:
    """The cnn1d stack is fixed: 3x(conv+bn+pool2), global max pool,
    dense 256 relu, dense 1 sigmoid. Shapes and the surviving sequence
    length are checked here so inference never fails."""
    layers = bundle.layers
    expected_len = 3 * 3 + 1 + 2
    if len(layers) != expected_len:
        raise WeightShapeError(
            f"cnn1d stack must have {expected_len} layers, got {len(layers)}")
    length = bundle.input_dim
    in_channels = 1
    for block, (filters, kernel) in enumerate(CNN_STACK):
        conv, bn, pool = layers[block * 3:block * 3 + 3]
        if not isinstance(conv, ConvLayer) or not isinstance(bn, BatchNormLayer) \
                or not isinstance(pool, MaxPoolLayer):
            raise WeightShapeError(f"block {block} must be conv+batch_norm+max_pool")
        if conv.weights.shape != (filters, in_channels, kernel):
            raise WeightShapeError(
                f"conv block {block} weights must be "
                f"[{filters}][{in_channels}][{kernel}], got {conv.weights.shape}")
        if bn.gamma.shape != (filters,):
            raise WeightShapeError(f"batch_norm block {block} must have {filters} channels")
        length = length - (kernel - 1)
        if length < 1:
            raise WeightShapeError("input_dim too small for the conv stack")
        length = length // 2
        if length < 1:
            raise WeightShapeError("input_dim too small for the pooling stack")
        in_channels = filters
    if not isinstance(layers[9], GlobalMaxPoolLayer):
        raise WeightShapeError("layer 10 must be global_max_pool")
    hidden, out = layers[10], layers[11]
    if not isinstance(hidden, DenseLayer) or hidden.activation != "relu" \
            or hidden.weights.shape != (CNN_DENSE_HIDDEN, CNN_STACK[-1][0]):
        raise WeightShapeError(
            f"dense hidden layer must be [{CNN_DENSE_HIDDEN}][{CNN_STACK[-1][0]}] relu")
    if not isinstance(out, DenseLayer) or out.activation != "sigmoid" \
            or out.weights.shape != (1, CNN_DENSE_HIDDEN):
        raise WeightShapeError(f"output layer must be [1][{CNN_DENSE_HIDDEN}] sigmoid")


def _validate_mlp_stack(bundle: ModelBundle) -> None:
    layers = bundle.layers
    if not all(isinstance(l, DenseLayer) for l in layers):
        raise WeightShapeError("mlp bundles may contain only dense layers")
    expected_in = bundle.input_dim
    for layer in layers[:-1]:
        if layer.activation != "relu":
            raise WeightShapeError("hidden mlp layers must use relu")
        if layer.weights.shape[1] != expected_in:
            raise WeightShapeError(
                f"dense layer expects input {layer.weights.shape[1]}, "
                f"chain provides {expected_in}")
        expected_in = layer.weights.shape[0]
    last = layers[-1]
    if last.activation != "sigmoid" or last.weights.shape != (1, expected_in):
        raise WeightShapeError("final mlp layer must be [1][hidden] sigmoid")


def _load_trees(raw: Any) -> list[Tree]:
    if not isinstance(raw, list) or not raw:
        raise BundleError("trees must be a non-empty list")
    trees = []
    for t_index, entry in enumerate(raw):
        nodes_raw = entry.get("nodes")
        if not isinstance(nodes_raw, list) or not nodes_raw:
            raise BundleError(f"tree {t_index} has no nodes")
        nodes = []
        for n_index, n in enumerate(nodes_raw):
            node = TreeNode(feature=int(n["feature"]),
                            threshold=float(n.get("threshold", 0.0)),
                            left=int(n.get("left", -1)),
                            right=int(n.get("right", -1)),
                            value=float(n.get("value", 0.0)))
            if node.feature < 0:
                if not 0.0 <= node.value <= 1.0:
                    raise WeightShapeError(
                        f"tree {t_index} leaf {n_index} value {node.value} not in [0, 1]")
            else:
                for child in (node.left, node.right):
                    if not (n_index < child < len(nodes_raw)):
                        raise WeightShapeError(
                            f"tree {t_index} node {n_index} child {child} invalid")
            nodes.append(node)
        trees.append(Tree(nodes=nodes))
    return trees


# ---------------------------------------------------------------------------
# Forward passes
# ---------------------------------------------------------------------------

def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _conv1d(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    # x: [channels, length] -> [filters, length - kernel + 1]
    kernel = layer.weights.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(x, kernel, axis=1)
    return np.einsum("clk,fck->fl", windows, layer.weights) + layer.bias[:, None]


def _batch_norm(x: np.ndarray, layer: BatchNormLayer) -> np.ndarray:
    scale = layer.gamma / np.sqrt(layer.var + BN_EPSILON)
    return scale[:, None] * (x - layer.mean[:, None]) + layer.beta[:, None]


def _max_pool(x: np.ndarray, size: int) -> np.ndarray:
    length = (x.shape[1] // size) * size
    return x[:, :length].reshape(x.shape[0], -1, size).max(axis=2)


def run_layers(layers: list, x: np.ndarray) -> float:
    """Execute a conv/dense layer sequence over a 1-channel sequence input.

    ReLU applies after every batch_norm (the stack is conv+bn+relu+pool)
    and after hidden dense layers; the final sigmoid dense layer returns
    the scalar probability.
    """
    current: np.ndarray = x.reshape(1, -1)
    vec: np.ndarray | None = None
    for layer in layers:
        if isinstance(layer, ConvLayer):
            current = _conv1d(current, layer)
        elif isinstance(layer, BatchNormLayer):
            current = np.maximum(_batch_norm(current, layer), 0.0)
        elif isinstance(layer, MaxPoolLayer):
            current = _max_pool(current, layer.size)
        elif isinstance(layer, GlobalMaxPoolLayer):
            vec = current.max(axis=1)
        elif isinstance(layer, DenseLayer):
            v = vec if vec is not None else current.reshape(-1)
            out = layer.weights @ v + layer.bias
            if layer.activation == "sigmoid":
                return _sigmoid(float(out[0]))
            vec = np.maximum(out, 0.0)
    raise WeightShapeError("layer stack produced no sigmoid output")


def cnn_forward(bundle: ModelBundle, x) -> float:
    if bundle.kind != KIND_CNN:
        raise InputShapeError(f"cnn_forward on {bundle.kind!r} bundle")
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (bundle.input_dim,):
        raise InputShapeError(
            f"expected input of length {bundle.input_dim}, got {vec.shape}")
    return run_layers(bundle.layers, vec)


def mlp_forward(bundle: ModelBundle, x) -> float:
    if bundle.kind != KIND_MLP:
        raise InputShapeError(f"mlp_forward on {bundle.kind!r} bundle")
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (bundle.input_dim,):
        raise InputShapeError(
            f"expected input of length {bundle.input_dim}, got {vec.shape}")
    for layer in bundle.layers:
        out = layer.weights @ vec + layer.bias
        if layer.activation == "relu":
            vec = np.maximum(out, 0.0)
        else:
            return _sigmoid(float(out[0]))
    raise WeightShapeError("mlp stack produced no sigmoid output")


def forest_forward(bundle: ModelBundle, x) -> float:
    if bundle.kind != KIND_FOREST:
        raise InputShapeError(f"forest_forward on {bundle.kind!r} bundle")
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (bundle.input_dim,):
        raise InputShapeError(
            f"expected input of length {bundle.input_dim}, got {vec.shape}")
    total = 0.0
    for tree in bundle.trees:
        node = tree.nodes[0]
        while node.feature >= 0:
            node = tree.nodes[node.left] if vec[node.feature] <= node.threshold \
                else tree.nodes[node.right]
        total += node.value
    return total / len(bundle.trees)


FORWARD_FUNCS = {KIND_CNN: cnn_forward, KIND_MLP: mlp_forward,
                 KIND_FOREST: forest_forward}


def forward(bundle: ModelBundle, x) -> float:
    return FORWARD_FUNCS[bundle.kind](bundle, x)


# ---------------------------------------------------------------------------
# Input assembly
# ---------------------------------------------------------------------------

def scale_features(values, scaler: Optional[Scaler]) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if scaler is None:
        return vec
    if vec.shape != scaler.means.shape:
        raise InputShapeError(
            f"scaler expects {scaler.means.shape[0]} features, got {vec.shape[0]}")
    scaled = vec.copy()
    nonzero = scaler.stds != 0
    scaled[nonzero] = (vec[nonzero] - scaler.means[nonzero]) / scaler.stds[nonzero]
    return scaled


def assemble_input(embedding_vec, feature_values, scaler: Optional[Scaler],
                   input_dim: int) -> np.ndarray:
    """[embedding || scaled handcrafted features]; std 0 passes the raw
    value through."""
    emb = np.asarray(embedding_vec, dtype=np.float64)
    feats = scale_features(feature_values, scaler)
    combined = np.concatenate([emb, feats])
    if combined.shape != (input_dim,):
        raise InputShapeError(
            f"assembled input has length {combined.shape[0]}, bundle wants {input_dim}")
    return combined


def expected_embedding_dim(bundle: ModelBundle, kind: str) -> int:
    return bundle.input_dim - FEATURE_COUNTS[kind]
