/** Training orchestration: assemble inputs (hash embedding + scaled
 * handcrafted features), fit with Adam + early stopping + best-weight
 * restoration, and score on the held-out split. */

import { FeatureExtractor } from "./features.js";
import { RandomForest, DEFAULT_FOREST, ForestConfig } from "./forest.js";
import { hashEmbed } from "./hashEmbed.js";
import { computeMetrics } from "./metrics.js";
import { CnnModel, MlpModel, TrainableModel } from "./nn.js";
import { Rng } from "./rng.js";
import type { ScalerStats } from "./bundle.js";
import type {
  DetectorKind,
  LabeledPayload,
  Metrics,
  Splits,
  TrainConfig,
} from "./types.js";

export interface AssembledData {
  X: Float64Array[];
  y: number[];
}

export function computeScaler(featureRows: number[][]): ScalerStats {
  const n = featureRows.length;
  const width = featureRows[0].length;
  const means = new Array(width).fill(0);
  const stds = new Array(width).fill(0);
  for (const row of featureRows) {
    for (let i = 0; i < width; i++) means[i] += row[i];
  }
  for (let i = 0; i < width; i++) means[i] /= n;
  for (const row of featureRows) {
    for (let i = 0; i < width; i++) {
      const d = row[i] - means[i];
      stds[i] += d * d;
    }
  }
  for (let i = 0; i < width; i++) stds[i] = Math.sqrt(stds[i] / n);
  return { means, stds };
}

export function scaleFeatures(row: number[], scaler: ScalerStats | null): number[] {
  if (!scaler) return row;
  return row.map((v, i) =>
    scaler.stds[i] !== 0 ? (v - scaler.means[i]) / scaler.stds[i] : v);
}

export function assembleInput(payload: string, kind: DetectorKind,
                              cfg: TrainConfig, extractor: FeatureExtractor,
                              scaler: ScalerStats | null): Float64Array {
  const embedding = hashEmbed(payload, cfg.embedding.dim, cfg.embedding.seed);
  const features = scaleFeatures(extractor.featuresFor(kind, payload), scaler);
  const out = new Float64Array(embedding.length + features.length);
  out.set(embedding, 0);
  for (let i = 0; i < features.length; i++) out[embedding.length + i] = features[i];
  return out;
}

export function assembleRows(rows: LabeledPayload[], kind: DetectorKind,
                             cfg: TrainConfig, extractor: FeatureExtractor,
                             scaler: ScalerStats | null): AssembledData {
  return {
    X: rows.map((r) => assembleInput(r.payload, kind, cfg, extractor, scaler)),
    y: rows.map((r) => r.label),
  };
}

function bceLoss(probs: ArrayLike<number>, y: number[]): number {
  let loss = 0;
  const eps = 1e-12;
  for (let i = 0; i < y.length; i++) {
    const p = probs[i];
    loss -= y[i] * Math.log(p + eps) + (1 - y[i]) * Math.log(1 - p + eps);
  }
  return loss / y.length;
}

function assertBothClasses(y: number[], where: string): void {
  const positives = y.reduce((a, b) => a + b, 0);
  if (positives === 0 || positives === y.length) {
    throw new Error(`class imbalance: ${where} split has a single label`);
  }
}

export interface FitHistory {
  epochs: number;
  trainLoss: number[];
  valLoss: number[];
  bestEpoch: number;
}

export function fitModel(model: TrainableModel, train: AssembledData,
                         val: AssembledData, cfg: TrainConfig,
                         log: (line: string) => void = () => {}): FitHistory {
  assertBothClasses(train.y, "train");
  const rng = new Rng(cfg.seed ^ 0xf17);
  const history: FitHistory = { epochs: 0, trainLoss: [], valLoss: [],
                                bestEpoch: 0 };
  let best = Infinity;
  let bestWeights = model.snapshot();
  let sinceBest = 0;
  let step = 0;
  const indices = train.X.map((_, i) => i);
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    rng.shuffle(indices);
    let epochLoss = 0;
    let batches = 0;
    for (let start = 0; start < indices.length; start += cfg.batchSize) {
      const batchIdx = indices.slice(start, start + cfg.batchSize);
      const X = batchIdx.map((i) => train.X[i]);
      const y = batchIdx.map((i) => train.y[i]);
      epochLoss += model.trainBatch(X, y, cfg.learningRate, ++step);
      batches++;
    }
    const valProbs = model.predict(val.X);
    const valLoss = bceLoss(valProbs, val.y);
    history.epochs = epoch;
    history.trainLoss.push(epochLoss / batches);
    history.valLoss.push(valLoss);
    log(`epoch ${epoch}: train_loss=${(epochLoss / batches).toFixed(4)} `
      + `val_loss=${valLoss.toFixed(4)}`);
    if (valLoss < best - 1e-9) {
      best = valLoss;
      bestWeights = model.snapshot();
      history.bestEpoch = epoch;
      sinceBest = 0;
    } else {
      sinceBest++;
      if (sinceBest >= cfg.earlyStopPatience) {
        log(`early stop at epoch ${epoch} (best ${history.bestEpoch})`);
        break;
      }
    }
  }
  model.restore(bestWeights);
  return history;
}

export interface TrainedDetector {
  kind: DetectorKind;
  model: TrainableModel | RandomForest;
  scaler: ScalerStats;
  inputDim: number;
  metrics: Metrics;
  history?: FitHistory;
}

export function trainNeural(kind: DetectorKind, splits: Splits,
                            cfg: TrainConfig, extractor: FeatureExtractor,
                            log: (line: string) => void = () => {}):
    TrainedDetector {
  const featureRows = splits.train.map(
    (r) => extractor.featuresFor(kind, r.payload));
  const scaler = computeScaler(featureRows);
  const train = assembleRows(splits.train, kind, cfg, extractor, scaler);
  const val = assembleRows(splits.val, kind, cfg, extractor, scaler);
  const test = assembleRows(splits.test, kind, cfg, extractor, scaler);
  const inputDim = train.X[0].length;
  const rng = new Rng(cfg.seed);
  const model: TrainableModel = cfg.model === "cnn1d"
    ? new CnnModel(inputDim, rng)
    : new MlpModel(inputDim, 64, rng);
  const history = fitModel(model, train, val, cfg, log);
  const metrics = computeMetrics(test.y, model.predict(test.X));
  return { kind, model, scaler, inputDim, metrics, history };
}

export function trainForest(kind: DetectorKind, splits: Splits,
                            cfg: TrainConfig, extractor: FeatureExtractor,
                            forestConfig: ForestConfig = DEFAULT_FOREST):
    TrainedDetector {
  const featureRows = splits.train.map(
    (r) => extractor.featuresFor(kind, r.payload));
  const scaler = computeScaler(featureRows);
  const train = assembleRows(splits.train, kind, cfg, extractor, scaler);
  const test = assembleRows(splits.test, kind, cfg, extractor, scaler);
  assertBothClasses(train.y, "train");
  const forest = new RandomForest({ ...forestConfig, seed: cfg.seed });
  forest.fit(train.X, train.y);
  const metrics = computeMetrics(test.y, forest.predict(test.X));
  return { kind, model: forest, scaler, inputDim: train.X[0].length, metrics };
}
