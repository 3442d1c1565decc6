/** Random forest: bagged CART trees with gini splits and sqrt feature
 * subsampling. Leaves store the class-1 fraction; prediction averages leaf
 * probabilities over trees. Node arrays are preorder, so children always
 * index past their parent (the bundle loader requires this). */

import { Rng } from "./rng.js";

export interface TreeNode {
  feature: number; // -1 for leaves
  threshold: number;
  left: number;
  right: number;
  value: number;
}

export interface ForestConfig {
  nTrees: number;
  maxDepth: number;
  minSamplesLeaf: number;
  seed: number;
}

export const DEFAULT_FOREST: ForestConfig = {
  nTrees: 10,
  maxDepth: 10,
  minSamplesLeaf: 2,
  seed: 4,
};

export class RandomForest {
  trees: TreeNode[][] = [];

  constructor(public config: ForestConfig = DEFAULT_FOREST) {}

  fit(X: Float64Array[], y: number[]): void {
    const rng = new Rng(this.config.seed);
    const nFeatures = X[0].length;
    const featurePool = Math.max(1, Math.round(Math.sqrt(nFeatures)));
    this.trees = [];
    for (let t = 0; t < this.config.nTrees; t++) {
      const indices = new Array(X.length);
      for (let i = 0; i < X.length; i++) indices[i] = rng.int(X.length);
      const nodes: TreeNode[] = [];
      this.grow(nodes, X, y, indices, 0, featurePool, rng);
      this.trees.push(nodes);
    }
  }

  private grow(nodes: TreeNode[], X: Float64Array[], y: number[],
               indices: number[], depth: number, featurePool: number,
               rng: Rng): number {
    const nodeIndex = nodes.length;
    let positives = 0;
    for (const i of indices) positives += y[i];
    const prob = indices.length ? positives / indices.length : 0;
    nodes.push({ feature: -1, threshold: 0, left: -1, right: -1, value: prob });

    if (depth >= this.config.maxDepth
        || indices.length < 2 * this.config.minSamplesLeaf
        || positives === 0 || positives === indices.length) {
      return nodeIndex;
    }

    const split = this.bestSplit(X, y, indices, featurePool, rng);
    if (split === null) return nodeIndex;

    const leftIdx: number[] = [];
    const rightIdx: number[] = [];
    for (const i of indices) {
      (X[i][split.feature] <= split.threshold ? leftIdx : rightIdx).push(i);
    }
    if (leftIdx.length < this.config.minSamplesLeaf
        || rightIdx.length < this.config.minSamplesLeaf) {
      return nodeIndex;
    }
    const node = nodes[nodeIndex];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.value = 0;
    node.left = this.grow(nodes, X, y, leftIdx, depth + 1, featurePool, rng);
    node.right = this.grow(nodes, X, y, rightIdx, depth + 1, featurePool, rng);
    return nodeIndex;
  }

  private bestSplit(X: Float64Array[], y: number[], indices: number[],
                    featurePool: number, rng: Rng):
      { feature: number; threshold: number } | null {
    const nFeatures = X[0].length;
    const candidates = new Set<number>();
    while (candidates.size < Math.min(featurePool, nFeatures)) {
      candidates.add(rng.int(nFeatures));
    }
    let best: { feature: number; threshold: number } | null = null;
    let bestGini = Infinity;
    const total = indices.length;
    for (const feature of candidates) {
      const sorted = [...indices].sort((a, b) => X[a][feature] - X[b][feature]);
      let leftPos = 0;
      let totalPos = 0;
      for (const i of sorted) totalPos += y[i];
      for (let cut = 1; cut < sorted.length; cut++) {
        leftPos += y[sorted[cut - 1]];
        const a = X[sorted[cut - 1]][feature];
        const b = X[sorted[cut]][feature];
        if (a === b) continue;
        const nl = cut;
        const nr = total - cut;
        const pl = leftPos / nl;
        const pr = (totalPos - leftPos) / nr;
        const gini = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / total;
        if (gini < bestGini - 1e-12) {
          bestGini = gini;
          best = { feature, threshold: (a + b) / 2 };
        }
      }
    }
    return best;
  }

  predictOne(x: Float64Array): number {
    let total = 0;
    for (const nodes of this.trees) {
      let node = nodes[0];
      while (node.feature >= 0) {
        node = x[node.feature] <= node.threshold ? nodes[node.left] : nodes[node.right];
      }
      total += node.value;
    }
    return total / this.trees.length;
  }

  predict(X: Float64Array[]): Float64Array {
    const out = new Float64Array(X.length);
    for (let i = 0; i < X.length; i++) out[i] = this.predictOne(X[i]);
    return out;
  }
}
