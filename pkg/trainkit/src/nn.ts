/** Neural-network training: the fixed 1D-CNN stack
 * (conv128/256/512 k3 + batch norm + relu + maxpool2, global max pool,
 * dense 256 relu, dense 1 sigmoid) and a small MLP, trained with Adam on
 * binary cross-entropy. Flat Float64Array tensors, [batch][channel][time]
 * layout. Gradients are verified against finite differences in tests. */

import { Rng } from "./rng.js";

export const BN_EPSILON = 1e-3;
export const CNN_STACK: Array<[number, number]> = [[128, 3], [256, 3], [512, 3]];
export const CNN_DENSE_HIDDEN = 256;

// ---------------------------------------------------------------------------
// Adam state per parameter tensor
// ---------------------------------------------------------------------------

class AdamParam {
  m: Float64Array;
  v: Float64Array;

  constructor(public value: Float64Array, public grad: Float64Array) {
    this.m = new Float64Array(value.length);
    this.v = new Float64Array(value.length);
  }

  step(lr: number, t: number): void {
    const b1 = 0.9, b2 = 0.999, eps = 1e-7;
    const c1 = 1 - Math.pow(b1, t);
    const c2 = 1 - Math.pow(b2, t);
    const { value, grad, m, v } = this;
    for (let i = 0; i < value.length; i++) {
      const g = grad[i];
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      value[i] -= (lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + eps);
      grad[i] = 0;
    }
  }
}

export interface Layer {
  params(): AdamParam[];
  /** x: [B][Cin][Tin] flat; returns [B][Cout][Tout] flat */
  forward(x: Float64Array, batch: number, train: boolean): Float64Array;
  backward(dy: Float64Array): Float64Array;
  outChannels(inChannels: number): number;
  outTime(inTime: number): number;
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

export class Conv1d implements Layer {
  W: Float64Array; // [F][C][K]
  b: Float64Array; // [F]
  dW: Float64Array;
  db: Float64Array;
  private adam: AdamParam[];
  private cacheX: Float64Array = new Float64Array(0);
  private batch = 0;
  private tin = 0;

  constructor(public filters: number, public inChannels: number,
              public kernel: number, rng: Rng) {
    const fanIn = inChannels * kernel;
    const fanOut = filters * kernel;
    const limit = Math.sqrt(6 / (fanIn + fanOut));
    this.W = new Float64Array(filters * inChannels * kernel);
    for (let i = 0; i < this.W.length; i++) {
      this.W[i] = (rng.next() * 2 - 1) * limit;
    }
    this.b = new Float64Array(filters);
    this.dW = new Float64Array(this.W.length);
    this.db = new Float64Array(filters);
    this.adam = [new AdamParam(this.W, this.dW), new AdamParam(this.b, this.db)];
  }

  params(): AdamParam[] {
    return this.adam;
  }

  outChannels(): number {
    return this.filters;
  }

  outTime(inTime: number): number {
    return inTime - this.kernel + 1;
  }

  forward(x: Float64Array, batch: number, _train: boolean): Float64Array {
    const { filters: F, inChannels: C, kernel: K, W, b } = this;
    const tin = x.length / (batch * C);
    const tout = tin - K + 1;
    this.cacheX = x;
    this.batch = batch;
    this.tin = tin;
    const y = new Float64Array(batch * F * tout);
    for (let bi = 0; bi < batch; bi++) {
      for (let f = 0; f < F; f++) {
        const yOff = (bi * F + f) * tout;
        const bias = b[f];
        for (let t = 0; t < tout; t++) y[yOff + t] = bias;
        for (let c = 0; c < C; c++) {
          const xOff = (bi * C + c) * tin;
          const wOff = (f * C + c) * K;
          for (let k = 0; k < K; k++) {
            const w = W[wOff + k];
            const xBase = xOff + k;
            for (let t = 0; t < tout; t++) {
              y[yOff + t] += w * x[xBase + t];
            }
          }
        }
      }
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const { filters: F, inChannels: C, kernel: K, W, dW, db } = this;
    const batch = this.batch;
    const tin = this.tin;
    const tout = tin - K + 1;
    const x = this.cacheX;
    const dx = new Float64Array(batch * C * tin);
    for (let bi = 0; bi < batch; bi++) {
      for (let f = 0; f < F; f++) {
        const dyOff = (bi * F + f) * tout;
        let bsum = 0;
        for (let t = 0; t < tout; t++) bsum += dy[dyOff + t];
        db[f] += bsum;
        for (let c = 0; c < C; c++) {
          const xOff = (bi * C + c) * tin;
          const wOff = (f * C + c) * K;
          for (let k = 0; k < K; k++) {
            const w = W[wOff + k];
            let wsum = 0;
            const xBase = xOff + k;
            for (let t = 0; t < tout; t++) {
              const d = dy[dyOff + t];
              wsum += d * x[xBase + t];
              dx[xBase + t] += w * d;
            }
            dW[wOff + k] += wsum;
          }
        }
      }
    }
    return dx;
  }
}

export class BatchNorm implements Layer {
  gamma: Float64Array;
  beta: Float64Array;
  movingMean: Float64Array;
  movingVar: Float64Array;
  private dGamma: Float64Array;
  private dBeta: Float64Array;
  private adam: AdamParam[];
  private cacheXhat: Float64Array = new Float64Array(0);
  private cacheInvStd: Float64Array = new Float64Array(0);
  private batch = 0;
  private time = 0;

  constructor(public channels: number, public momentum = 0.6) {
    this.gamma = new Float64Array(channels).fill(1);
    this.beta = new Float64Array(channels);
    this.movingMean = new Float64Array(channels);
    this.movingVar = new Float64Array(channels).fill(1);
    this.dGamma = new Float64Array(channels);
    this.dBeta = new Float64Array(channels);
    this.adam = [new AdamParam(this.gamma, this.dGamma),
                 new AdamParam(this.beta, this.dBeta)];
  }

  params(): AdamParam[] {
    return this.adam;
  }

  outChannels(c: number): number {
    return c;
  }

  outTime(t: number): number {
    return t;
  }

  forward(x: Float64Array, batch: number, train: boolean): Float64Array {
    const C = this.channels;
    const T = x.length / (batch * C);
    this.batch = batch;
    this.time = T;
    const y = new Float64Array(x.length);
    if (!train) {
      for (let c = 0; c < C; c++) {
        const scale = this.gamma[c] / Math.sqrt(this.movingVar[c] + BN_EPSILON);
        const shift = this.beta[c] - scale * this.movingMean[c];
        for (let bi = 0; bi < batch; bi++) {
          const off = (bi * C + c) * T;
          for (let t = 0; t < T; t++) y[off + t] = scale * x[off + t] + shift;
        }
      }
      return y;
    }
    const n = batch * T;
    this.cacheXhat = new Float64Array(x.length);
    this.cacheInvStd = new Float64Array(C);
    for (let c = 0; c < C; c++) {
      let sum = 0;
      let sumSq = 0;
      for (let bi = 0; bi < batch; bi++) {
        const off = (bi * C + c) * T;
        for (let t = 0; t < T; t++) {
          const v = x[off + t];
          sum += v;
          sumSq += v * v;
        }
      }
      const mean = sum / n;
      const variance = Math.max(0, sumSq / n - mean * mean);
      const invStd = 1 / Math.sqrt(variance + BN_EPSILON);
      this.cacheInvStd[c] = invStd;
      const g = this.gamma[c];
      const bta = this.beta[c];
      for (let bi = 0; bi < batch; bi++) {
        const off = (bi * C + c) * T;
        for (let t = 0; t < T; t++) {
          const xhat = (x[off + t] - mean) * invStd;
          this.cacheXhat[off + t] = xhat;
          y[off + t] = g * xhat + bta;
        }
      }
      this.movingMean[c] = this.momentum * this.movingMean[c] + (1 - this.momentum) * mean;
      this.movingVar[c] = this.momentum * this.movingVar[c] + (1 - this.momentum) * variance;
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const C = this.channels;
    const batch = this.batch;
    const T = this.time;
    const n = batch * T;
    const dx = new Float64Array(dy.length);
    for (let c = 0; c < C; c++) {
      let sumDy = 0;
      let sumDyXhat = 0;
      for (let bi = 0; bi < batch; bi++) {
        const off = (bi * C + c) * T;
        for (let t = 0; t < T; t++) {
          sumDy += dy[off + t];
          sumDyXhat += dy[off + t] * this.cacheXhat[off + t];
        }
      }
      this.dBeta[c] += sumDy;
      this.dGamma[c] += sumDyXhat;
      const scale = this.gamma[c] * this.cacheInvStd[c];
      const meanDy = sumDy / n;
      const meanDyXhat = sumDyXhat / n;
      for (let bi = 0; bi < batch; bi++) {
        const off = (bi * C + c) * T;
        for (let t = 0; t < T; t++) {
          dx[off + t] = scale * (dy[off + t] - meanDy
            - this.cacheXhat[off + t] * meanDyXhat);
        }
      }
    }
    return dx;
  }
}

export class Relu implements Layer {
  private mask: Uint8Array = new Uint8Array(0);

  params(): AdamParam[] {
    return [];
  }

  outChannels(c: number): number {
    return c;
  }

  outTime(t: number): number {
    return t;
  }

  forward(x: Float64Array, _batch: number, _train: boolean): Float64Array {
    const y = new Float64Array(x.length);
    this.mask = new Uint8Array(x.length);
    for (let i = 0; i < x.length; i++) {
      if (x[i] > 0) {
        y[i] = x[i];
        this.mask[i] = 1;
      }
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const dx = new Float64Array(dy.length);
    for (let i = 0; i < dy.length; i++) {
      if (this.mask[i]) dx[i] = dy[i];
    }
    return dx;
  }
}

export class MaxPool2 implements Layer {
  private argmax: Int32Array = new Int32Array(0);
  private inLength = 0;

  params(): AdamParam[] {
    return [];
  }

  outChannels(c: number): number {
    return c;
  }

  outTime(t: number): number {
    return Math.floor(t / 2);
  }

  // Channels are tracked by the network; pooling only needs the row count
  // (batch x channels), set before each forward call.
  private rowsCache = 0;

  setRows(rows: number): void {
    this.rowsCache = rows;
  }

  forward(x: Float64Array, batch: number, _train: boolean): Float64Array {
    this.inLength = x.length;
    const totalRows = this.rowsCache || batch;
    const tin = x.length / totalRows;
    const tout = Math.floor(tin / 2);
    const y = new Float64Array(totalRows * tout);
    this.argmax = new Int32Array(totalRows * tout);
    for (let r = 0; r < totalRows; r++) {
      const xOff = r * tin;
      const yOff = r * tout;
      for (let t = 0; t < tout; t++) {
        const a = x[xOff + 2 * t];
        const b = x[xOff + 2 * t + 1];
        if (a >= b) {
          y[yOff + t] = a;
          this.argmax[yOff + t] = xOff + 2 * t;
        } else {
          y[yOff + t] = b;
          this.argmax[yOff + t] = xOff + 2 * t + 1;
        }
      }
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const dx = new Float64Array(this.inLength);
    for (let i = 0; i < dy.length; i++) {
      dx[this.argmax[i]] += dy[i];
    }
    return dx;
  }
}

export class GlobalMaxPool implements Layer {
  private argmax: Int32Array = new Int32Array(0);
  private inLength = 0;

  params(): AdamParam[] {
    return [];
  }

  outChannels(c: number): number {
    return c;
  }

  outTime(_t: number): number {
    return 1;
  }

  private rowsCache = 0;

  setRows(rows: number): void {
    this.rowsCache = rows;
  }

  forward(x: Float64Array, batch: number, _train: boolean): Float64Array {
    const rows = this.rowsCache || batch;
    const tin = x.length / rows;
    this.inLength = x.length;
    const y = new Float64Array(rows);
    this.argmax = new Int32Array(rows);
    for (let r = 0; r < rows; r++) {
      const off = r * tin;
      let best = x[off];
      let bestIdx = off;
      for (let t = 1; t < tin; t++) {
        if (x[off + t] > best) {
          best = x[off + t];
          bestIdx = off + t;
        }
      }
      y[r] = best;
      this.argmax[r] = bestIdx;
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const dx = new Float64Array(this.inLength);
    for (let i = 0; i < dy.length; i++) {
      dx[this.argmax[i]] += dy[i];
    }
    return dx;
  }
}

export class Dense implements Layer {
  W: Float64Array; // [out][in]
  b: Float64Array;
  private dW: Float64Array;
  private db: Float64Array;
  private adam: AdamParam[];
  private cacheX: Float64Array = new Float64Array(0);
  private batch = 0;

  constructor(public outDim: number, public inDim: number, rng: Rng) {
    const limit = Math.sqrt(6 / (inDim + outDim));
    this.W = new Float64Array(outDim * inDim);
    for (let i = 0; i < this.W.length; i++) {
      this.W[i] = (rng.next() * 2 - 1) * limit;
    }
    this.b = new Float64Array(outDim);
    this.dW = new Float64Array(this.W.length);
    this.db = new Float64Array(outDim);
    this.adam = [new AdamParam(this.W, this.dW), new AdamParam(this.b, this.db)];
  }

  params(): AdamParam[] {
    return this.adam;
  }

  outChannels(): number {
    return this.outDim;
  }

  outTime(): number {
    return 1;
  }

  forward(x: Float64Array, batch: number, _train: boolean): Float64Array {
    const { outDim, inDim, W, b } = this;
    this.cacheX = x;
    this.batch = batch;
    const y = new Float64Array(batch * outDim);
    for (let bi = 0; bi < batch; bi++) {
      const xOff = bi * inDim;
      const yOff = bi * outDim;
      for (let o = 0; o < outDim; o++) {
        let sum = b[o];
        const wOff = o * inDim;
        for (let i = 0; i < inDim; i++) {
          sum += W[wOff + i] * x[xOff + i];
        }
        y[yOff + o] = sum;
      }
    }
    return y;
  }

  backward(dy: Float64Array): Float64Array {
    const { outDim, inDim, W, dW, db } = this;
    const batch = this.batch;
    const x = this.cacheX;
    const dx = new Float64Array(batch * inDim);
    for (let bi = 0; bi < batch; bi++) {
      const xOff = bi * inDim;
      const yOff = bi * outDim;
      for (let o = 0; o < outDim; o++) {
        const d = dy[yOff + o];
        if (d === 0) continue;
        db[o] += d;
        const wOff = o * inDim;
        for (let i = 0; i < inDim; i++) {
          dW[wOff + i] += d * x[xOff + i];
          dx[xOff + i] += W[wOff + i] * d;
        }
      }
    }
    return dx;
  }
}

export function sigmoid(z: number): number {
  if (z >= 0) return 1 / (1 + Math.exp(-z));
  const e = Math.exp(z);
  return e / (1 + e);
}

// ---------------------------------------------------------------------------
// Networks
// ---------------------------------------------------------------------------

export interface TrainableModel {
  /** probabilities for a batch of inputs (inference mode) */
  predict(X: Float64Array[], batch?: number): Float64Array;
  /** one gradient step over a batch; returns mean BCE loss */
  trainBatch(X: Float64Array[], y: number[], lr: number, step: number): number;
  snapshot(): Float64Array[];
  restore(weights: Float64Array[]): void;
}

abstract class StackModel implements TrainableModel {
  protected layers: Layer[] = [];

  constructor(public inputDim: number) {}

  protected abstract runForward(X: Float64Array[], train: boolean): Float64Array;

  getLayers(): Layer[] {
    return this.layers;
  }

  predict(X: Float64Array[]): Float64Array {
    const logits = this.runForward(X, false);
    const probs = new Float64Array(logits.length);
    for (let i = 0; i < logits.length; i++) probs[i] = sigmoid(logits[i]);
    return probs;
  }

  trainBatch(X: Float64Array[], y: number[], lr: number, step: number): number {
    const batch = X.length;
    const logits = this.runForward(X, true);
    let loss = 0;
    const dLogits = new Float64Array(batch);
    for (let i = 0; i < batch; i++) {
      const p = sigmoid(logits[i]);
      const target = y[i];
      const eps = 1e-12;
      loss -= target * Math.log(p + eps) + (1 - target) * Math.log(1 - p + eps);
      dLogits[i] = (p - target) / batch;
    }
    loss /= batch;
    let grad: Float64Array = dLogits;
    for (let li = this.layers.length - 1; li >= 0; li--) {
      grad = this.layers[li].backward(grad);
    }
    for (const layer of this.layers) {
      for (const param of layer.params()) {
        param.step(lr, step);
      }
    }
    return loss;
  }

  snapshot(): Float64Array[] {
    const out: Float64Array[] = [];
    for (const layer of this.layers) {
      for (const param of layer.params()) {
        out.push(new Float64Array(param.value));
      }
      if (layer instanceof BatchNorm) {
        out.push(new Float64Array(layer.movingMean));
        out.push(new Float64Array(layer.movingVar));
      }
    }
    return out;
  }

  restore(weights: Float64Array[]): void {
    let index = 0;
    for (const layer of this.layers) {
      for (const param of layer.params()) {
        param.value.set(weights[index++]);
      }
      if (layer instanceof BatchNorm) {
        layer.movingMean.set(weights[index++]);
        layer.movingVar.set(weights[index++]);
      }
    }
  }
}

/** The canonical conv stack over a single-channel sequence input. */
export class CnnModel extends StackModel {
  constructor(inputDim: number, rng: Rng, bnMomentum = 0.6) {
    super(inputDim);
    let channels = 1;
    let time = inputDim;
    for (const [filters, kernel] of CNN_STACK) {
      this.layers.push(new Conv1d(filters, channels, kernel, rng));
      this.layers.push(new BatchNorm(filters, bnMomentum));
      this.layers.push(new Relu());
      this.layers.push(new MaxPool2());
      channels = filters;
      time = Math.floor((time - kernel + 1) / 2);
      if (time < 1) {
        throw new Error(`input_dim ${inputDim} too small for the conv stack`);
      }
    }
    this.layers.push(new GlobalMaxPool());
    this.layers.push(new Dense(CNN_DENSE_HIDDEN, channels, rng));
    this.layers.push(new Relu());
    this.layers.push(new Dense(1, CNN_DENSE_HIDDEN, rng));
  }

  protected runForward(X: Float64Array[], train: boolean): Float64Array {
    const batch = X.length;
    let current: Float64Array = new Float64Array(batch * this.inputDim);
    for (let i = 0; i < batch; i++) current.set(X[i], i * this.inputDim);
    let channels = 1;
    for (const layer of this.layers) {
      if (layer instanceof MaxPool2 || layer instanceof GlobalMaxPool) {
        layer.setRows(batch * channels);
      }
      current = layer.forward(current, batch, train);
      channels = layer.outChannels(channels);
      if (layer instanceof GlobalMaxPool) channels = 1;
      if (layer instanceof Dense) channels = 1;
    }
    return current; // [batch] logits
  }
}

/** input -> dense(hidden, relu) -> dense(1) logits */
export class MlpModel extends StackModel {
  constructor(inputDim: number, hidden: number, rng: Rng) {
    super(inputDim);
    this.layers.push(new Dense(hidden, inputDim, rng));
    this.layers.push(new Relu());
    this.layers.push(new Dense(1, hidden, rng));
  }

  protected runForward(X: Float64Array[], train: boolean): Float64Array {
    const batch = X.length;
    let current: Float64Array = new Float64Array(batch * this.inputDim);
    for (let i = 0; i < batch; i++) current.set(X[i], i * this.inputDim);
    for (const layer of this.layers) {
      current = layer.forward(current, batch, train);
    }
    return current;
  }
}
