/** End-to-end pipeline: load corpora, clean/split (with negative
 * sampling), train, verify, and export bundles + reference vectors +
 * metrics.
 *
 * Usage:
 *   node dist/cli.js train --kind all \
 *     --corpora-dir ../data/corpora \
 *     --dictionaries ../src/gqlshield/dictionaries \
 *     --out-dir out [--epochs 6] [--seed 17]
 */

import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { join, resolve } from "node:path";

import {
  cnnToBundle,
  exportBundle,
  exportReferenceVectors,
  forestToBundle,
  mlpToBundle,
  predictorFor,
} from "./bundle.js";
import {
  augmentOsi,
  loadCorpusCsv,
  loadExclusionRules,
  prepareDataset,
  splitDigest,
} from "./dataset.js";
import { FeatureExtractor } from "./features.js";
import { computeMetrics } from "./metrics.js";
import { Rng } from "./rng.js";
import {
  assembleRows,
  trainForest,
  trainNeural,
} from "./train.js";
import { deskConfig, DetectorKind, LabeledPayload, Splits } from "./types.js";

interface Args {
  kind: string;
  corporaDir: string;
  dictionaries: string;
  outDir: string;
  epochs?: number;
  seed: number;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "train") {
    console.error("usage: cli.js train --kind all|sqli|osi|xss "
      + "--corpora-dir DIR --dictionaries DIR --out-dir DIR "
      + "[--epochs N] [--seed N]");
    process.exit(2);
  }
  const get = (flag: string, fallback?: string): string => {
    const index = argv.indexOf(flag);
    if (index >= 0 && index + 1 < argv.length) return argv[index + 1];
    if (fallback !== undefined) return fallback;
    console.error(`missing required flag ${flag}`);
    process.exit(2);
  };
  return {
    kind: get("--kind", "all"),
    corporaDir: resolve(get("--corpora-dir", "../data/corpora")),
    dictionaries: resolve(get("--dictionaries", "../src/gqlshield/dictionaries")),
    outDir: resolve(get("--out-dir", "out")),
    epochs: argv.includes("--epochs") ? Number(get("--epochs")) : undefined,
    seed: Number(get("--seed", "17")),
  };
}

export function loadAllCorpora(corporaDir: string):
    Record<DetectorKind, LabeledPayload[]> {
  const out = {} as Record<DetectorKind, LabeledPayload[]>;
  for (const kind of ["sqli", "osi", "xss"] as DetectorKind[]) {
    const path = join(corporaDir, `${kind}.csv`);
    if (!existsSync(path)) throw new Error(`missing corpus ${path}`);
    const rows = loadCorpusCsv(path, kind);
    out[kind] = rows.map((row) =>
      row.label === 0 ? { ...row, category: "benign" as const } : row);
  }
  return out;
}

export async function preparedSplitsFor(
    kind: DetectorKind,
    corpora: Record<DetectorKind, LabeledPayload[]>,
    seed: number,
    exclusionsPath: string | null): Promise<Splits> {
  let rows = corpora[kind];
  if (kind === "osi") {
    rows = await augmentOsi(rows);
  }
  const others = (["sqli", "osi", "xss"] as DetectorKind[])
    .filter((k) => k !== kind)
    .flatMap((k) => corpora[k].filter((r) => r.label === 1));
  return prepareDataset(rows, kind, {
    seed,
    otherCategoryAttacks: others,
    exclusionRules: loadExclusionRules(exclusionsPath),
  });
}

function referenceInputs(rows: { X: Float64Array[] }, inputDim: number,
                         seed: number, count = 50): Float64Array[] {
  const rng = new Rng(seed);
  const inputs: Float64Array[] = [];
  for (let i = 0; i < Math.floor(count / 2); i++) {
    inputs.push(rows.X[rng.int(rows.X.length)]);
  }
  while (inputs.length < count) {
    const x = new Float64Array(inputDim);
    for (let i = 0; i < inputDim; i++) x[i] = rng.next() * 4 - 2;
    inputs.push(x);
  }
  return inputs;
}

async function runKind(kind: DetectorKind, args: Args,
                       corpora: Record<DetectorKind, LabeledPayload[]>,
                       extractor: FeatureExtractor): Promise<Record<string, unknown>> {
  const exclusions = join(resolve("rules"), "exclusions.txt");
  const splits = await preparedSplitsFor(
    kind, corpora, args.seed, existsSync(exclusions) ? exclusions : null);
  console.log(`[${kind}] splits: train=${splits.train.length} `
    + `val=${splits.val.length} test=${splits.test.length} `
    + `digest=${splitDigest(splits).slice(0, 12)}`);

  const summary: Record<string, unknown> = { kind };
  if (kind === "xss") {
    const cfgForest = deskConfig("xss", "forest", { seed: args.seed });
    const forestOut = trainForest("xss", splits, cfgForest, extractor);
    const cfgMlp = deskConfig("xss", "mlp",
                              { seed: args.seed,
                                epochs: args.epochs ?? 20 });
    const mlpOut = trainNeural("xss", splits, cfgMlp, extractor,
                               (line) => console.log(`[xss mlp] ${line}`));

    const test = assembleRows(splits.test, "xss", cfgMlp, extractor,
                              mlpOut.scaler);
    const forestTest = assembleRows(splits.test, "xss", cfgForest, extractor,
                                    forestOut.scaler);
    const forestModel = forestOut.model as import("./forest.js").RandomForest;
    const mlpProbs = (mlpOut.model as import("./nn.js").MlpModel).predict(test.X);
    const forestProbs = forestModel.predict(forestTest.X);
    const ensemble = test.y.map((_, i) => (mlpProbs[i] + forestProbs[i]) / 2);
    const ensembleMetrics = computeMetrics(test.y, ensemble);
    console.log(`[xss] forest f1=${forestOut.metrics.f1.toFixed(4)} `
      + `mlp f1=${mlpOut.metrics.f1.toFixed(4)} `
      + `ensemble f1=${ensembleMetrics.f1.toFixed(4)}`);

    const forestBundle = forestToBundle(forestModel, forestOut.inputDim,
                                        cfgForest.embedding, forestOut.scaler);
    const forestPath = join(args.outDir, "xss_forest.json");
    exportBundle(forestBundle, (x) => forestModel.predictOne(x),
                 forestTest.X.slice(0, 50), forestPath);
    const mlpBundle = mlpToBundle(mlpOut.model as import("./nn.js").MlpModel,
                                  mlpOut.inputDim, cfgMlp.embedding,
                                  mlpOut.scaler);
    const mlpPath = join(args.outDir, "xss_mlp.json");
    exportBundle(mlpBundle, predictorFor(mlpOut.model as never),
                 test.X.slice(0, 50), mlpPath);
    exportReferenceVectors(forestBundle, "xss_forest.json",
                           (x) => forestModel.predictOne(x),
                           referenceInputs(forestTest, forestOut.inputDim,
                                           args.seed ^ 0xf0),
                           join(args.outDir, "xss_forest_vectors.json"));
    exportReferenceVectors(mlpBundle, "xss_mlp.json",
                           predictorFor(mlpOut.model as never),
                           referenceInputs(test, mlpOut.inputDim,
                                           args.seed ^ 0xf1),
                           join(args.outDir, "xss_mlp_vectors.json"));
    summary.forest = forestOut.metrics;
    summary.mlp = mlpOut.metrics;
    summary.ensemble = ensembleMetrics;
    return summary;
  }

  const cfg = deskConfig(kind, "cnn1d",
                         { seed: args.seed,
                           ...(args.epochs ? { epochs: args.epochs } : {}) });
  const out = trainNeural(kind, splits, cfg, extractor,
                          (line) => console.log(`[${kind} cnn] ${line}`));
  console.log(`[${kind}] cnn f1=${out.metrics.f1.toFixed(4)} `
    + `accuracy=${out.metrics.accuracy.toFixed(4)}`);
  const bundle = cnnToBundle(out.model as import("./nn.js").CnnModel,
                             out.inputDim, cfg.embedding, out.scaler);
  const test = assembleRows(splits.test, kind, cfg, extractor, out.scaler);
  const bundlePath = join(args.outDir, `${kind}_cnn.json`);
  const worst = exportBundle(bundle, predictorFor(out.model as never),
                             test.X.slice(0, 50), bundlePath);
  console.log(`[${kind}] exported ${bundlePath} (round-trip max diff ${worst.toExponential(2)})`);
  exportReferenceVectors(bundle, `${kind}_cnn.json`,
                         predictorFor(out.model as never),
                         referenceInputs(test, out.inputDim, args.seed ^ 0xf2),
                         join(args.outDir, `${kind}_cnn_vectors.json`));
  summary.cnn = out.metrics;
  return summary;
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const kinds: DetectorKind[] = args.kind === "all"
    ? ["sqli", "osi", "xss"]
    : [args.kind as DetectorKind];
  const corpora = loadAllCorpora(args.corporaDir);
  const extractor = new FeatureExtractor(args.dictionaries);
  mkdirSync(args.outDir, { recursive: true });
  const results: Record<string, unknown>[] = [];
  for (const kind of kinds) {
    results.push(await runKind(kind, args, corpora, extractor));
  }
  const metricsPath = join(args.outDir, "metrics.json");
  writeFileSync(metricsPath, JSON.stringify(results, null, 1));
  console.log(`wrote ${metricsPath}`);
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  main().catch((error) => {
    console.error(error);
    process.exit(1);
  });
}
