/** Export trained models to the engine's portable bundle JSON and verify
 * the export before writing: a standalone executor re-reads the bundle
 * structure and its forward pass must match the training-side model within
 * 1e-6 on every export. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { RandomForest, TreeNode } from "./forest.js";
import {
  BatchNorm,
  BN_EPSILON,
  CnnModel,
  Conv1d,
  Dense,
  MlpModel,
  Relu,
  sigmoid,
  TrainableModel,
} from "./nn.js";
import type { EmbeddingConfig } from "./types.js";

export interface ScalerStats {
  means: number[];
  stds: number[];
}

export interface BundleJson {
  format_version: 1;
  kind: "cnn1d" | "mlp" | "forest";
  input_dim: number;
  feature_schema_version: number;
  decision_threshold: number;
  embedding?: { provider: string; dim: number; seed: number };
  scaler?: { means: number[]; stds: number[] };
  layers?: Array<Record<string, unknown>>;
  trees?: Array<{ nodes: TreeNode[] }>;
}

function nested3(flat: Float64Array, d1: number, d2: number, d3: number): number[][][] {
  const out: number[][][] = [];
  for (let i = 0; i < d1; i++) {
    const mid: number[][] = [];
    for (let j = 0; j < d2; j++) {
      const row: number[] = [];
      for (let k = 0; k < d3; k++) {
        row.push(flat[(i * d2 + j) * d3 + k]);
      }
      mid.push(row);
    }
    out.push(mid);
  }
  return out;
}

function nested2(flat: Float64Array, d1: number, d2: number): number[][] {
  const out: number[][] = [];
  for (let i = 0; i < d1; i++) {
    out.push(Array.from(flat.subarray(i * d2, (i + 1) * d2)));
  }
  return out;
}

export function cnnToBundle(model: CnnModel, inputDim: number,
                            embedding: EmbeddingConfig,
                            scaler: ScalerStats | null): BundleJson {
  const layersOut: Array<Record<string, unknown>> = [];
  const layers = model.getLayers();
  for (let i = 0; i < layers.length; i++) {
    const layer = layers[i];
    if (layer instanceof Conv1d) {
      layersOut.push({
        type: "conv1d",
        filters: layer.filters,
        kernel: layer.kernel,
        weights: nested3(layer.W, layer.filters, layer.inChannels, layer.kernel),
        bias: Array.from(layer.b),
      });
    } else if (layer instanceof BatchNorm) {
      layersOut.push({
        type: "batch_norm",
        gamma: Array.from(layer.gamma),
        beta: Array.from(layer.beta),
        mean: Array.from(layer.movingMean),
        var: Array.from(layer.movingVar),
      });
    } else if (layer instanceof Relu) {
      // implicit after batch_norm / hidden dense in the bundle format
    } else if (layer.constructor.name === "MaxPool2") {
      layersOut.push({ type: "max_pool", size: 2 });
    } else if (layer.constructor.name === "GlobalMaxPool") {
      layersOut.push({ type: "global_max_pool" });
    } else if (layer instanceof Dense) {
      const isFinal = i === layers.length - 1;
      layersOut.push({
        type: "dense",
        weights: nested2(layer.W, layer.outDim, layer.inDim),
        bias: Array.from(layer.b),
        activation: isFinal ? "sigmoid" : "relu",
      });
    }
  }
  const bundle: BundleJson = {
    format_version: 1,
    kind: "cnn1d",
    input_dim: inputDim,
    feature_schema_version: 1,
    decision_threshold: 0.5,
    embedding: { provider: "hash_ngram", dim: embedding.dim, seed: embedding.seed },
    layers: layersOut,
  };
  if (scaler) bundle.scaler = { means: scaler.means, stds: scaler.stds };
  return bundle;
}

export function mlpToBundle(model: MlpModel, inputDim: number,
                            embedding: EmbeddingConfig,
                            scaler: ScalerStats | null): BundleJson {
  const layersOut: Array<Record<string, unknown>> = [];
  const layers = model.getLayers();
  const denses = layers.filter((l): l is Dense => l instanceof Dense);
  denses.forEach((dense, index) => {
    layersOut.push({
      type: "dense",
      weights: nested2(dense.W, dense.outDim, dense.inDim),
      bias: Array.from(dense.b),
      activation: index === denses.length - 1 ? "sigmoid" : "relu",
    });
  });
  const bundle: BundleJson = {
    format_version: 1,
    kind: "mlp",
    input_dim: inputDim,
    feature_schema_version: 1,
    decision_threshold: 0.5,
    embedding: { provider: "hash_ngram", dim: embedding.dim, seed: embedding.seed },
    layers: layersOut,
  };
  if (scaler) bundle.scaler = { means: scaler.means, stds: scaler.stds };
  return bundle;
}

export function forestToBundle(forest: RandomForest, inputDim: number,
                               embedding: EmbeddingConfig,
                               scaler: ScalerStats | null): BundleJson {
  const bundle: BundleJson = {
    format_version: 1,
    kind: "forest",
    input_dim: inputDim,
    feature_schema_version: 1,
    decision_threshold: 0.5,
    embedding: { provider: "hash_ngram", dim: embedding.dim, seed: embedding.seed },
    trees: forest.trees.map((nodes) => ({
      nodes: nodes.map((n) => ({ ...n })),
    })),
  };
  if (scaler) bundle.scaler = { means: scaler.means, stds: scaler.stds };
  return bundle;
}

// ---------------------------------------------------------------------------
// Standalone bundle executor (the format's semantics, independent of the
// training classes; used for the pre-write round-trip check)
// ---------------------------------------------------------------------------

export function executeBundle(bundle: BundleJson, input: ArrayLike<number>): number {
  if (bundle.kind === "forest") {
    let total = 0;
    for (const tree of bundle.trees!) {
      let node = tree.nodes[0];
      while (node.feature >= 0) {
        node = input[node.feature] <= node.threshold
          ? tree.nodes[node.left] : tree.nodes[node.right];
      }
      total += node.value;
    }
    return total / bundle.trees!.length;
  }

  let channels: number[][] = [Array.from(input as ArrayLike<number>)];
  let vector: number[] | null = null;
  for (const layer of bundle.layers!) {
    const type = layer.type as string;
    if (type === "conv1d") {
      const weights = layer.weights as number[][][];
      const bias = layer.bias as number[];
      const kernel = weights[0][0].length;
      const tout = channels[0].length - kernel + 1;
      const next: number[][] = [];
      for (let f = 0; f < weights.length; f++) {
        const row = new Array(tout).fill(bias[f]);
        for (let c = 0; c < channels.length; c++) {
          for (let k = 0; k < kernel; k++) {
            const w = weights[f][c][k];
            for (let t = 0; t < tout; t++) row[t] += w * channels[c][t + k];
          }
        }
        next.push(row);
      }
      channels = next;
    } else if (type === "batch_norm") {
      const gamma = layer.gamma as number[];
      const beta = layer.beta as number[];
      const mean = layer.mean as number[];
      const variance = layer.var as number[];
      for (let c = 0; c < channels.length; c++) {
        const scale = gamma[c] / Math.sqrt(variance[c] + BN_EPSILON);
        channels[c] = channels[c].map(
          (v) => Math.max(0, scale * (v - mean[c]) + beta[c]));
      }
    } else if (type === "max_pool") {
      for (let c = 0; c < channels.length; c++) {
        const row = channels[c];
        const out: number[] = [];
        for (let t = 0; t + 1 < row.length; t += 2) {
          out.push(Math.max(row[t], row[t + 1]));
        }
        channels[c] = out;
      }
    } else if (type === "global_max_pool") {
      vector = channels.map((row) => Math.max(...row));
    } else if (type === "dense") {
      const weights = layer.weights as number[][];
      const bias = layer.bias as number[];
      const source = vector ?? channels.flat();
      const out: number[] = [];
      for (let o = 0; o < weights.length; o++) {
        let sum = bias[o];
        for (let i = 0; i < source.length; i++) sum += weights[o][i] * source[i];
        out.push(sum);
      }
      if ((layer.activation as string) === "sigmoid") {
        return sigmoid(out[0]);
      }
      vector = out.map((v) => Math.max(0, v));
    } else {
      throw new Error(`unknown layer type ${type}`);
    }
  }
  throw new Error("bundle produced no sigmoid output");
}

// ---------------------------------------------------------------------------
// Verified export
// ---------------------------------------------------------------------------

export const ROUND_TRIP_TOLERANCE = 1e-6;

export function roundTripError(bundle: BundleJson,
                               modelPredict: (x: Float64Array) => number,
                               checkInputs: Float64Array[]): number {
  let worst = 0;
  for (const x of checkInputs) {
    const fromModel = modelPredict(x);
    const fromBundle = executeBundle(bundle, x);
    worst = Math.max(worst, Math.abs(fromModel - fromBundle));
  }
  return worst;
}

export function exportBundle(bundle: BundleJson,
                             modelPredict: (x: Float64Array) => number,
                             checkInputs: Float64Array[],
                             outPath: string): number {
  const worst = roundTripError(bundle, modelPredict, checkInputs);
  if (worst > ROUND_TRIP_TOLERANCE) {
    throw new Error(
      `export round-trip check failed: max diff ${worst} > ${ROUND_TRIP_TOLERANCE}`);
  }
  mkdirSync(dirname(outPath), { recursive: true });
  writeFileSync(outPath, JSON.stringify(bundle));
  return worst;
}

export function predictorFor(model: TrainableModel): (x: Float64Array) => number {
  return (x) => model.predict([x])[0];
}

export interface ReferenceVectors {
  bundle: string;
  vectors: Array<{ input: number[]; probability: number }>;
}

export function exportReferenceVectors(bundle: BundleJson, bundleFile: string,
                                       modelPredict: (x: Float64Array) => number,
                                       inputs: Float64Array[],
                                       outPath: string): ReferenceVectors {
  const vectors = inputs.map((input) => {
    const fromModel = modelPredict(input);
    const fromBundle = executeBundle(bundle, input);
    if (Math.abs(fromModel - fromBundle) > ROUND_TRIP_TOLERANCE) {
      throw new Error("reference vector self-consistency check failed");
    }
    if (fromModel < 0 || fromModel > 1) {
      throw new Error("probability out of range");
    }
    return { input: Array.from(input), probability: fromModel };
  });
  const fixture: ReferenceVectors = { bundle: bundleFile, vectors };
  mkdirSync(dirname(outPath), { recursive: true });
  writeFileSync(outPath, JSON.stringify(fixture));
  return fixture;
}
