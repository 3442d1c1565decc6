import type { Metrics } from "./types.js";

export function computeMetrics(yTrue: number[], probs: ArrayLike<number>,
                               threshold = 0.5): Metrics {
  let tp = 0, fp = 0, fn = 0, tn = 0;
  for (let i = 0; i < yTrue.length; i++) {
    const predicted = probs[i] >= threshold ? 1 : 0;
    if (yTrue[i] === 1 && predicted === 1) tp++;
    else if (yTrue[i] === 0 && predicted === 1) fp++;
    else if (yTrue[i] === 1 && predicted === 0) fn++;
    else tn++;
  }
  const precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  const f1 = precision + recall > 0
    ? (2 * precision * recall) / (precision + recall) : 0;
  return {
    accuracy: yTrue.length ? (tp + tn) / yTrue.length : 0,
    precision,
    recall,
    f1,
    confusion: { tp, fp, fn, tn },
  };
}
