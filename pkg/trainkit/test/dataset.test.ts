/** Dataset preparation: dedupe, splits, determinism, negative sampling,
 * and the OS-command augmentation. */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { formatCsv, parseCsv } from "../src/csv.js";
import {
  augmentOsi,
  augmentOsiTemplates,
  loadCorpusCsv,
  loadExclusionRules,
  prepareDataset,
  splitDigest,
} from "../src/dataset.js";
import type { LabeledPayload } from "../src/types.js";

function row(payload: string, label: 0 | 1,
             category: LabeledPayload["category"] = "sqli"): LabeledPayload {
  return { payload, label, source: "test", category };
}

describe("csv", () => {
  it("round-trips quoted payloads", () => {
    const rows = [["payload", "label"],
                  ['tricky,"quoted"\nnewline', "1"],
                  ["plain", "0"]];
    expect(parseCsv(formatCsv(rows))).toEqual(rows);
  });
});

describe("loadCorpusCsv", () => {
  it("reads payload,label with quoting", () => {
    const dir = mkdtempSync(join(tmpdir(), "tk-"));
    const path = join(dir, "c.csv");
    writeFileSync(path, formatCsv([["payload", "label"],
                                   ["' OR 1=1 --", "1"],
                                   ["hello world", "0"]]));
    const rows = loadCorpusCsv(path, "sqli");
    expect(rows).toHaveLength(2);
    expect(rows[0].label).toBe(1);
    expect(rows[1].payload).toBe("hello world");
  });

  it("rejects corpora without the required columns", () => {
    const dir = mkdtempSync(join(tmpdir(), "tk-"));
    const path = join(dir, "bad.csv");
    writeFileSync(path, "a,b\n1,2\n");
    expect(() => loadCorpusCsv(path, "sqli")).toThrow(/payload,label/);
  });
});

describe("prepareDataset", () => {
  it("dedupes and splits by the stated ratios", () => {
    const rows: LabeledPayload[] = [];
    for (let i = 0; i < 4; i++) rows.push(row(`attack ${i}`, 1));
    for (let i = 0; i < 4; i++) rows.push(row(`benign ${i}`, 0));
    rows.push(row("attack 0", 1)); // duplicate
    rows.push(row("benign 0", 0)); // duplicate
    const splits = prepareDataset(rows, "sqli",
                                  { ratios: [0.75, 0.125, 0.125], seed: 1 });
    const total = splits.train.length + splits.val.length + splits.test.length;
    expect(total).toBe(8);
    expect(splits.train.length).toBe(6);
  });

  it("same seed gives identical splits, different seed differs", () => {
    const rows: LabeledPayload[] = [];
    for (let i = 0; i < 60; i++) rows.push(row(`attack ${i}`, 1));
    for (let i = 0; i < 60; i++) rows.push(row(`benign ${i}`, 0));
    const a = prepareDataset(rows, "sqli", { seed: 5 });
    const b = prepareDataset(rows, "sqli", { seed: 5 });
    const c = prepareDataset(rows, "sqli", { seed: 6 });
    expect(splitDigest(a)).toBe(splitDigest(b));
    expect(splitDigest(a)).not.toBe(splitDigest(c));
  });

  it("negative sampling adds other-category attacks labeled benign", () => {
    const rows: LabeledPayload[] = [];
    for (let i = 0; i < 50; i++) rows.push(row(`attack ${i}`, 1));
    for (let i = 0; i < 50; i++) rows.push(row(`benign ${i}`, 0));
    const others: LabeledPayload[] = [];
    for (let i = 0; i < 40; i++) {
      others.push(row(`<script>alert(${i})</script>`, 1, "xss"));
    }
    const splits = prepareDataset(rows, "sqli", {
      seed: 2, negativeSampleRatio: 0.1, otherCategoryAttacks: others });
    const all = [...splits.train, ...splits.val, ...splits.test];
    const sampled = all.filter((r) => r.source.startsWith("negative_sample:"));
    expect(sampled.length).toBe(5); // 10% of 50 benign
    for (const s of sampled) {
      expect(s.label).toBe(0);
      expect(s.category).toBe("xss");
    }
    // malicious count unchanged
    expect(all.filter((r) => r.label === 1)).toHaveLength(50);
  });

  it("same-category attacks are never sampled as negatives", () => {
    const rows = [row("a1", 1), row("a2", 1), row("b1", 0), row("b2", 0)];
    const others = [row("evil", 1, "sqli")];
    const splits = prepareDataset(rows, "sqli", {
      seed: 2, negativeSampleRatio: 1.0, otherCategoryAttacks: others });
    const all = [...splits.train, ...splits.val, ...splits.test];
    expect(all.some((r) => r.payload === "evil")).toBe(false);
  });

  it("empty corpus is a hard error", () => {
    expect(() => prepareDataset([], "sqli")).toThrow(/empty/);
  });

  it("exclusion rules drop rows", () => {
    const dir = mkdtempSync(join(tmpdir(), "tk-"));
    const rulesPath = join(dir, "rules.txt");
    writeFileSync(rulesPath, "# comment\nbad exact row\nre:^noise-\n");
    const rules = loadExclusionRules(rulesPath);
    const rows = [row("bad exact row", 1), row("noise-123", 1),
                  row("keep me", 1), row("benign", 0)];
    const splits = prepareDataset(rows, "sqli", { exclusionRules: rules, seed: 1 });
    const all = [...splits.train, ...splits.val, ...splits.test];
    expect(all.map((r) => r.payload).sort()).toEqual(["benign", "keep me"]);
  });
});

describe("augmentOsi", () => {
  it("template product: commands x connectors x carriers", async () => {
    const generated = augmentOsiTemplates(["ls", "id"], [";", "|"],
                                          ["try {CONN} {CMD}", "x {CONN} {CMD}"]);
    expect(generated).toHaveLength(8);
    expect(generated.every((r) => r.source === "augmented")).toBe(true);
    expect(generated.every((r) => r.label === 1)).toBe(true);
  });

  it("llm client rows are added and tagged", async () => {
    const corpus = [row("; id", 1, "osi")];
    const out = await augmentOsi(corpus, {
      generate: async () => ["please run; whoami now", "ok && env dump", ""],
    }, { templates: false });
    const added = out.filter((r) => r.source === "augmented");
    expect(added).toHaveLength(2);
  });

  it("augmentation off leaves the corpus unchanged", async () => {
    const corpus = [row("; id", 1, "osi")];
    const out = await augmentOsi(corpus, null, { templates: false });
    expect(out).toEqual(corpus);
  });
});
