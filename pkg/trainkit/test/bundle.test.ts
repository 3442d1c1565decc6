/** Bundle export: structural shape, the pre-write round-trip check, and
 * cross-implementation loading by the engine itself (via python3 when
 * available). */

import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  cnnToBundle,
  executeBundle,
  exportBundle,
  exportReferenceVectors,
  forestToBundle,
  mlpToBundle,
  predictorFor,
  roundTripError,
} from "../src/bundle.js";
import { RandomForest } from "../src/forest.js";
import { CnnModel, MlpModel } from "../src/nn.js";
import { Rng } from "../src/rng.js";

const EMBED = { provider: "hash_ngram" as const, dim: 16, seed: 5 };

function randomInputs(n: number, dim: number, seed: number): Float64Array[] {
  const rng = new Rng(seed);
  return Array.from({ length: n }, () => {
    const x = new Float64Array(dim);
    for (let i = 0; i < dim; i++) x[i] = rng.next() * 4 - 2;
    return x;
  });
}

function toyForest(): RandomForest {
  const rng = new Rng(8);
  const X = randomInputs(300, 6, 9);
  const y = X.map((x) => (x[0] + x[3] > 0 ? 1 : 0));
  const forest = new RandomForest({ nTrees: 10, maxDepth: 6,
                                    minSamplesLeaf: 2, seed: 3 });
  forest.fit(X, y);
  return forest;
}

describe("bundle export", () => {
  it("cnn bundle has the canonical stack and round-trips within 1e-6", () => {
    const model = new CnnModel(27, new Rng(2));
    const bundle = cnnToBundle(model, 27, EMBED, null);
    const types = bundle.layers!.map((l) => l.type);
    expect(types).toEqual([
      "conv1d", "batch_norm", "max_pool",
      "conv1d", "batch_norm", "max_pool",
      "conv1d", "batch_norm", "max_pool",
      "global_max_pool", "dense", "dense"]);
    expect((bundle.layers![0] as { filters: number }).filters).toBe(128);
    expect((bundle.layers![11] as { activation: string }).activation).toBe("sigmoid");
    const inputs = randomInputs(25, 27, 4);
    expect(roundTripError(bundle, predictorFor(model), inputs))
      .toBeLessThanOrEqual(1e-6);
  });

  it("mlp bundle round-trips within 1e-6", () => {
    const model = new MlpModel(11, 7, new Rng(6));
    const bundle = mlpToBundle(model, 11, EMBED, {
      means: new Array(3).fill(0), stds: new Array(3).fill(1) });
    const inputs = randomInputs(25, 11, 5);
    expect(roundTripError(bundle, predictorFor(model), inputs))
      .toBeLessThanOrEqual(1e-6);
  });

  it("forest bundle executes identically to the trained forest", () => {
    const forest = toyForest();
    const bundle = forestToBundle(forest, 6, EMBED, null);
    for (const x of randomInputs(50, 6, 11)) {
      expect(executeBundle(bundle, x)).toBe(forest.predictOne(x));
    }
    // preorder children always index past the parent (loader contract)
    for (const tree of bundle.trees!) {
      tree.nodes.forEach((node, index) => {
        if (node.feature >= 0) {
          expect(node.left).toBeGreaterThan(index);
          expect(node.right).toBeGreaterThan(index);
          expect(node.left).toBeLessThan(tree.nodes.length);
          expect(node.right).toBeLessThan(tree.nodes.length);
        } else {
          expect(node.value).toBeGreaterThanOrEqual(0);
          expect(node.value).toBeLessThanOrEqual(1);
        }
      });
    }
  });

  it("a corrupted export fails the pre-write check", () => {
    const model = new MlpModel(5, 4, new Rng(1));
    const bundle = mlpToBundle(model, 5, EMBED, null);
    (bundle.layers![0].bias as number[])[0] += 0.25;
    const dir = mkdtempSync(join(tmpdir(), "tk-"));
    expect(() => exportBundle(bundle, predictorFor(model),
                              randomInputs(10, 5, 2),
                              join(dir, "broken.json")))
      .toThrow(/round-trip/);
  });

  it("reference vectors are self-consistent and bounded", () => {
    const model = new MlpModel(5, 4, new Rng(13));
    const bundle = mlpToBundle(model, 5, EMBED, null);
    const dir = mkdtempSync(join(tmpdir(), "tk-"));
    const path = join(dir, "vectors.json");
    const fixture = exportReferenceVectors(bundle, "m.json",
                                           predictorFor(model),
                                           randomInputs(50, 5, 3), path);
    expect(fixture.vectors).toHaveLength(50);
    for (const entry of fixture.vectors) {
      expect(entry.probability).toBeGreaterThanOrEqual(0);
      expect(entry.probability).toBeLessThanOrEqual(1);
    }
    expect(JSON.parse(readFileSync(path, "utf-8")).vectors).toHaveLength(50);
  });
});

describe("engine interop", () => {
  const enginePresent = (() => {
    try {
      execFileSync("python3", ["-c", "import gqlshield"], { stdio: "pipe" });
      return true;
    } catch {
      return false;
    }
  })();

  it.skipIf(!enginePresent)(
    "engine loads an exported mlp bundle and agrees on probabilities", () => {
      const model = new MlpModel(12, 6, new Rng(21));
      const bundle = mlpToBundle(model, 12, EMBED, null);
      const dir = mkdtempSync(join(tmpdir(), "tk-"));
      const bundlePath = join(dir, "mlp.json");
      const inputs = randomInputs(20, 12, 22);
      exportBundle(bundle, predictorFor(model), inputs, bundlePath);
      const script = `
import json, sys
from gqlshield.models import load_bundle, mlp_forward
bundle = load_bundle(sys.argv[1])
inputs = json.loads(sys.argv[2])
print(json.dumps([mlp_forward(bundle, x) for x in inputs]))
`;
      const result = execFileSync("python3", [
        "-c", script, bundlePath,
        JSON.stringify(inputs.map((x) => Array.from(x)))], { stdio: "pipe" });
      const probs = JSON.parse(result.toString()) as number[];
      inputs.forEach((x, i) => {
        expect(Math.abs(probs[i] - model.predict([x])[0])).toBeLessThan(1e-9);
      });
    });

  it.skipIf(!enginePresent)(
    "engine loads an exported forest bundle and agrees exactly", () => {
      const forest = toyForest();
      const bundle = forestToBundle(forest, 6, EMBED, null);
      const dir = mkdtempSync(join(tmpdir(), "tk-"));
      const bundlePath = join(dir, "forest.json");
      const inputs = randomInputs(20, 6, 23);
      exportBundle(bundle, (x) => forest.predictOne(x), inputs, bundlePath);
      const script = `
import json, sys
from gqlshield.models import load_bundle, forest_forward
bundle = load_bundle(sys.argv[1])
inputs = json.loads(sys.argv[2])
print(json.dumps([forest_forward(bundle, x) for x in inputs]))
`;
      const result = execFileSync("python3", [
        "-c", script, bundlePath,
        JSON.stringify(inputs.map((x) => Array.from(x)))], { stdio: "pipe" });
      const probs = JSON.parse(result.toString()) as number[];
      inputs.forEach((x, i) => {
        expect(probs[i]).toBeCloseTo(forest.predictOne(x), 12);
      });
    });
});
