/** Network correctness: finite-difference gradient checks over every layer
 * type, deterministic behavior, and learnability on toy data. */

import { describe, expect, it } from "vitest";

import {
  BatchNorm,
  CnnModel,
  Conv1d,
  Dense,
  GlobalMaxPool,
  MaxPool2,
  MlpModel,
  Relu,
  sigmoid,
} from "../src/nn.js";
import { Rng } from "../src/rng.js";

/** tiny conv stack exercising every layer type with small dims */
class TinyStack {
  layers: Array<Conv1d | BatchNorm | Relu | MaxPool2 | GlobalMaxPool | Dense>;

  constructor(rng: Rng, public inputDim = 10) {
    this.layers = [
      new Conv1d(3, 1, 3, rng),        // -> [3][8]
      new BatchNorm(3, 0.6),
      new Relu(),
      new MaxPool2(),                   // -> [3][4]
      new GlobalMaxPool(),              // -> [3]
      new Dense(4, 3, rng),
      new Relu(),
      new Dense(1, 4, rng),
    ];
  }

  forward(X: Float64Array[], train: boolean): Float64Array {
    const batch = X.length;
    let current = new Float64Array(batch * this.inputDim);
    for (let i = 0; i < batch; i++) current.set(X[i], i * this.inputDim);
    let channels = 1;
    for (const layer of this.layers) {
      if (layer instanceof MaxPool2 || layer instanceof GlobalMaxPool) {
        layer.setRows(batch * channels);
      }
      current = layer.forward(current, batch, train);
      channels = layer.outChannels(channels);
      if (layer instanceof GlobalMaxPool || layer instanceof Dense) channels = 1;
    }
    return current;
  }

  loss(X: Float64Array[], y: number[], train: boolean): number {
    const logits = this.forward(X, train);
    let loss = 0;
    for (let i = 0; i < y.length; i++) {
      const p = sigmoid(logits[i]);
      loss -= y[i] * Math.log(p + 1e-12) + (1 - y[i]) * Math.log(1 - p + 1e-12);
    }
    return loss / y.length;
  }

  backwardFrom(X: Float64Array[], y: number[]): void {
    const logits = this.forward(X, true);
    const d = new Float64Array(y.length);
    for (let i = 0; i < y.length; i++) {
      d[i] = (sigmoid(logits[i]) - y[i]) / y.length;
    }
    let grad: Float64Array = d;
    for (let i = this.layers.length - 1; i >= 0; i--) {
      grad = this.layers[i].backward(grad);
    }
  }
}

function zeroAllGrads(stack: TinyStack): void {
  for (const layer of stack.layers) {
    for (const p of layer.params()) p.grad.fill(0);
  }
}

function gradCheckParam(stack: TinyStack, X: Float64Array[], y: number[],
                        value: Float64Array, grad: Float64Array,
                        bn: BatchNorm[]): number {
  // analytic (gradients accumulate, so clear every parameter first)
  zeroAllGrads(stack);
  stack.backwardFrom(X, y);
  const analytic = new Float64Array(grad);
  grad.fill(0);
  // numeric (freeze batch-norm moving updates by restoring them each eval)
  const saved = bn.map((b) => [new Float64Array(b.movingMean),
                               new Float64Array(b.movingVar)]);
  const restore = () => bn.forEach((b, i) => {
    b.movingMean.set(saved[i][0]);
    b.movingVar.set(saved[i][1]);
  });
  const eps = 1e-5;
  let worst = 0;
  const checkCount = Math.min(value.length, 12);
  for (let i = 0; i < checkCount; i++) {
    const original = value[i];
    value[i] = original + eps;
    const up = stack.loss(X, y, true);
    restore();
    value[i] = original - eps;
    const down = stack.loss(X, y, true);
    restore();
    value[i] = original;
    const numeric = (up - down) / (2 * eps);
    const denom = Math.max(1e-6, Math.abs(numeric) + Math.abs(analytic[i]));
    worst = Math.max(worst, Math.abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

describe("gradient checks (finite differences)", () => {
  const rng = new Rng(42);
  const stack = new TinyStack(rng);
  const dataRng = new Rng(7);
  const X = Array.from({ length: 6 }, () => {
    const x = new Float64Array(10);
    for (let i = 0; i < 10; i++) x[i] = dataRng.normal();
    return x;
  });
  const y = [1, 0, 1, 1, 0, 0];
  const bnLayers = stack.layers.filter(
    (l): l is BatchNorm => l instanceof BatchNorm);

  it("conv weights and bias", () => {
    const conv = stack.layers[0] as Conv1d;
    const params = conv.params();
    for (const p of params) {
      expect(gradCheckParam(stack, X, y, p.value, p.grad, bnLayers))
        .toBeLessThan(1e-4);
    }
  });

  it("batch-norm gamma and beta", () => {
    const bn = stack.layers[1] as BatchNorm;
    for (const p of bn.params()) {
      expect(gradCheckParam(stack, X, y, p.value, p.grad, bnLayers))
        .toBeLessThan(1e-4);
    }
  });

  it("dense layers", () => {
    for (const layer of stack.layers) {
      if (layer instanceof Dense) {
        for (const p of layer.params()) {
          expect(gradCheckParam(stack, X, y, p.value, p.grad, bnLayers))
            .toBeLessThan(1e-4);
        }
      }
    }
  });
});

describe("model behavior", () => {
  it("mlp with zero weights outputs 0.5", () => {
    const model = new MlpModel(4, 3, new Rng(1));
    for (const layer of model.getLayers()) {
      for (const p of layer.params()) p.value.fill(0);
    }
    const probs = model.predict([new Float64Array([1, 2, 3, 4])]);
    expect(probs[0]).toBe(0.5);
  });

  it("mlp learns a linearly separable toy set", () => {
    const rng = new Rng(3);
    const X: Float64Array[] = [];
    const y: number[] = [];
    for (let i = 0; i < 100; i++) {
      const positive = i % 2 === 0;
      const x = new Float64Array(4);
      for (let j = 0; j < 4; j++) x[j] = rng.normal() + (positive ? 2 : -2);
      X.push(x);
      y.push(positive ? 1 : 0);
    }
    const model = new MlpModel(4, 8, new Rng(5));
    let step = 0;
    for (let epoch = 0; epoch < 30; epoch++) {
      for (let start = 0; start < X.length; start += 16) {
        model.trainBatch(X.slice(start, start + 16), y.slice(start, start + 16),
                         0.01, ++step);
      }
    }
    const probs = model.predict(X);
    let correct = 0;
    for (let i = 0; i < y.length; i++) {
      if ((probs[i] >= 0.5 ? 1 : 0) === y[i]) correct++;
    }
    expect(correct / y.length).toBeGreaterThanOrEqual(0.99);
  });

  it("cnn forward is deterministic and in range", () => {
    const model = new CnnModel(27, new Rng(9));
    const x = new Float64Array(27).map((_, i) => Math.sin(i));
    const a = model.predict([x])[0];
    const b = model.predict([x])[0];
    expect(a).toBe(b);
    expect(a).toBeGreaterThanOrEqual(0);
    expect(a).toBeLessThanOrEqual(1);
  });

  it("cnn rejects inputs smaller than the stack needs", () => {
    expect(() => new CnnModel(8, new Rng(1))).toThrow(/too small/);
  });

  it("snapshot/restore round-trips weights and moving stats", () => {
    const model = new CnnModel(27, new Rng(11));
    const x = new Float64Array(27).fill(0.5);
    const before = model.predict([x])[0];
    const saved = model.snapshot();
    model.trainBatch([x, x], [1, 0], 0.05, 1);
    expect(model.predict([x])[0]).not.toBe(before);
    model.restore(saved);
    expect(model.predict([x])[0]).toBe(before);
  });
});
