/** Desk-scale training sanity: on the committed synthetic corpora
 * (~2k rows/detector), trained models reach F1 >= 0.95 on their held-out
 * split and every export round-trips within 1e-6.
 *
 * The CNNs converge on these corpora within the first epoch; three epochs
 * keep the run short while staying under the 20-epoch cap. */

import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  cnnToBundle,
  exportBundle,
  exportReferenceVectors,
  forestToBundle,
  mlpToBundle,
  predictorFor,
} from "../src/bundle.js";
import { loadAllCorpora, preparedSplitsFor } from "../src/cli.js";
import { FeatureExtractor } from "../src/features.js";
import { computeMetrics } from "../src/metrics.js";
import type { CnnModel, MlpModel } from "../src/nn.js";
import type { RandomForest } from "../src/forest.js";
import {
  assembleRows,
  trainForest,
  trainNeural,
} from "../src/train.js";
import { deskConfig } from "../src/types.js";

const CORPORA_DIR = join(__dirname, "..", "..", "data", "corpora");
const DICTS = join(__dirname, "..", "..", "src", "gqlshield", "dictionaries");

const corpora = loadAllCorpora(CORPORA_DIR);
const extractor = new FeatureExtractor(DICTS);
const outDir = mkdtempSync(join(tmpdir(), "trainkit-acceptance-"));

describe("desk-scale training sanity", () => {
  it("corpora are committed at ~2k rows per detector", () => {
    for (const kind of ["sqli", "osi", "xss"] as const) {
      expect(corpora[kind].length).toBeGreaterThanOrEqual(1800);
      expect(corpora[kind].length).toBeLessThanOrEqual(2600);
    }
  });

  it("sqli cnn reaches F1 >= 0.95 and exports within 1e-6", async () => {
    const splits = await preparedSplitsFor("sqli", corpora, 17, null);
    const cfg = deskConfig("sqli", "cnn1d", { epochs: 3, seed: 17 });
    const out = trainNeural("sqli", splits, cfg, extractor);
    console.log(`sqli cnn test metrics: ${JSON.stringify(out.metrics)}`);
    expect(out.metrics.f1).toBeGreaterThanOrEqual(0.95);

    const bundle = cnnToBundle(out.model as CnnModel, out.inputDim,
                               cfg.embedding, out.scaler);
    const test = assembleRows(splits.test, "sqli", cfg, extractor, out.scaler);
    const worst = exportBundle(bundle, predictorFor(out.model as CnnModel),
                               test.X.slice(0, 50),
                               join(outDir, "sqli_cnn.json"));
    expect(worst).toBeLessThanOrEqual(1e-6);
    const fixture = exportReferenceVectors(
      bundle, "sqli_cnn.json", predictorFor(out.model as CnnModel),
      test.X.slice(0, 50), join(outDir, "sqli_cnn_vectors.json"));
    expect(fixture.vectors).toHaveLength(50);
  }, 600_000);

  it("osi cnn (with augmentation) reaches F1 >= 0.95 and exports within 1e-6",
     async () => {
    const splits = await preparedSplitsFor("osi", corpora, 17, null);
    const augmented = [...splits.train, ...splits.val, ...splits.test]
      .filter((r) => r.source === "augmented");
    expect(augmented.length).toBeGreaterThan(0);
    const cfg = deskConfig("osi", "cnn1d", { epochs: 3, seed: 17 });
    const out = trainNeural("osi", splits, cfg, extractor);
    console.log(`osi cnn test metrics: ${JSON.stringify(out.metrics)}`);
    expect(out.metrics.f1).toBeGreaterThanOrEqual(0.95);

    const bundle = cnnToBundle(out.model as CnnModel, out.inputDim,
                               cfg.embedding, out.scaler);
    const test = assembleRows(splits.test, "osi", cfg, extractor, out.scaler);
    const worst = exportBundle(bundle, predictorFor(out.model as CnnModel),
                               test.X.slice(0, 50),
                               join(outDir, "osi_cnn.json"));
    expect(worst).toBeLessThanOrEqual(1e-6);
  }, 600_000);

  it("xss forest + mlp each reach F1 >= 0.95; ensemble too; exports within 1e-6",
     async () => {
    const splits = await preparedSplitsFor("xss", corpora, 17, null);
    const cfgForest = deskConfig("xss", "forest", { seed: 17 });
    const forestOut = trainForest("xss", splits, cfgForest, extractor);
    console.log(`xss forest test metrics: ${JSON.stringify(forestOut.metrics)}`);
    expect(forestOut.metrics.f1).toBeGreaterThanOrEqual(0.95);

    const cfgMlp = deskConfig("xss", "mlp", { epochs: 12, seed: 17 });
    const mlpOut = trainNeural("xss", splits, cfgMlp, extractor);
    console.log(`xss mlp test metrics: ${JSON.stringify(mlpOut.metrics)}`);
    expect(mlpOut.metrics.f1).toBeGreaterThanOrEqual(0.95);

    const forest = forestOut.model as RandomForest;
    const mlp = mlpOut.model as MlpModel;
    const forestTest = assembleRows(splits.test, "xss", cfgForest, extractor,
                                    forestOut.scaler);
    const mlpTest = assembleRows(splits.test, "xss", cfgMlp, extractor,
                                 mlpOut.scaler);
    const forestProbs = forest.predict(forestTest.X);
    const mlpProbs = mlp.predict(mlpTest.X);
    const ensemble = mlpTest.y.map((_, i) => (forestProbs[i] + mlpProbs[i]) / 2);
    const ensembleMetrics = computeMetrics(mlpTest.y, ensemble);
    console.log(`xss ensemble test metrics: ${JSON.stringify(ensembleMetrics)}`);
    expect(ensembleMetrics.f1).toBeGreaterThanOrEqual(0.95);

    const forestBundle = forestToBundle(forest, forestOut.inputDim,
                                        cfgForest.embedding, forestOut.scaler);
    expect(exportBundle(forestBundle, (x) => forest.predictOne(x),
                        forestTest.X.slice(0, 50),
                        join(outDir, "xss_forest.json")))
      .toBeLessThanOrEqual(1e-6);
    const mlpBundle = mlpToBundle(mlp, mlpOut.inputDim, cfgMlp.embedding,
                                  mlpOut.scaler);
    expect(exportBundle(mlpBundle, predictorFor(mlp),
                        mlpTest.X.slice(0, 50),
                        join(outDir, "xss_mlp.json")))
      .toBeLessThanOrEqual(1e-6);
  }, 600_000);

  it("degenerate single-class corpus aborts with a class-imbalance error",
     async () => {
    const rows = corpora.sqli.filter((r) => r.label === 1).slice(0, 40);
    const splits = { train: rows.slice(0, 30), val: rows.slice(30, 35),
                     test: rows.slice(35) };
    const cfg = deskConfig("sqli", "mlp", { epochs: 1 });
    expect(() => trainNeural("sqli", splits, cfg, extractor))
      .toThrow(/class imbalance/);
  });
});
