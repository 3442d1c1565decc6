export type DetectorKind = "sqli" | "osi" | "xss";
export type ModelKind = "cnn1d" | "mlp" | "forest";
export type Category = DetectorKind | "benign";

export interface LabeledPayload {
  payload: string;
  /** 1 malicious, 0 benign */
  label: 0 | 1;
  source: string;
  category: Category;
}

export interface Splits {
  train: LabeledPayload[];
  val: LabeledPayload[];
  test: LabeledPayload[];
}

export interface EmbeddingConfig {
  provider: "hash_ngram";
  dim: number;
  seed: number;
}

export interface TrainConfig {
  detector: DetectorKind;
  model: ModelKind;
  embedding: EmbeddingConfig;
  /** hard cap per the reference architecture: <= 20 */
  epochs: number;
  batchSize: number;
  learningRate: number;
  earlyStopPatience: number;
  splitRatios: [number, number, number];
  negativeSampleRatio: number;
  seed: number;
}

export function deskConfig(detector: DetectorKind,
                           model: ModelKind,
                           overrides: Partial<TrainConfig> = {}): TrainConfig {
  const embedDefaults: Record<DetectorKind, EmbeddingConfig> = {
    sqli: { provider: "hash_ngram", dim: 32, seed: 101 },
    osi: { provider: "hash_ngram", dim: 32, seed: 102 },
    xss: { provider: "hash_ngram", dim: 20, seed: 103 },
  };
  const config: TrainConfig = {
    detector,
    model,
    embedding: embedDefaults[detector],
    epochs: model === "cnn1d" ? 6 : 20,
    batchSize: 32,
    learningRate: 0.001,
    earlyStopPatience: 5,
    splitRatios: [0.7, 0.15, 0.15],
    negativeSampleRatio: 0.1,
    seed: 17,
    ...overrides,
  };
  if (config.epochs > 20) {
    throw new Error(`epochs ${config.epochs} exceeds the cap of 20`);
  }
  return config;
}

export interface Metrics {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  confusion: { tp: number; fp: number; fn: number; tn: number };
}
