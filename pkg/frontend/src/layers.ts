/** Weight containers built on raw tfjs ops.
 *
 * Modules own their tf.Variables and register them under hierarchical names
 * so checkpoints and per-network gradient filtering stay simple. All weight
 * initialization is driven by an explicit PRNG, so a seed fully determines
 * the network.
 */

import * as tf from '@tensorflow/tfjs';

/** mulberry32: tiny deterministic PRNG, uniform in [0, 1). */
export class Rng {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  uniform(lo: number, hi: number): number {
    return lo + (hi - lo) * this.next();
  }

  /** Derive an independent stream (for per-module seeding). */
  fork(): Rng {
    return new Rng(Math.floor(this.next() * 4294967296));
  }
}

export function heUniformInit(rng: Rng, shape: number[], fanIn: number): tf.Tensor {
  const limit = Math.sqrt(6.0 / Math.max(fanIn, 1));
  const n = shape.reduce((a, b) => a * b, 1);
  const data = new Float32Array(n);
  for (let i = 0; i < n; i++) data[i] = rng.uniform(-limit, limit);
  return tf.tensor(data, shape);
}

/** Registry of named variables owned by one network. */
export class VariableBag {
  readonly variables = new Map<string, tf.Variable>();

  add(name: string, initial: tf.Tensor, trainable = true): tf.Variable {
    if (this.variables.has(name)) throw new Error(`duplicate variable ${name}`);
    const v = tf.variable(initial, trainable, name);
    initial.dispose();
    this.variables.set(name, v);
    return v;
  }

  trainable(): tf.Variable[] {
    return [...this.variables.values()].filter((v) => v.trainable);
  }

  dispose(): void {
    for (const v of this.variables.values()) v.dispose();
    this.variables.clear();
  }
}

export class Conv2d {
  readonly kernel: tf.Variable;
  readonly bias: tf.Variable;

  constructor(
    bag: VariableBag,
    name: string,
    rng: Rng,
    inCh: number,
    outCh: number,
    size: number,
    opts: { zeroInit?: boolean } = {},
  ) {
    const fanIn = size * size * inCh;
    const kernelInit = opts.zeroInit
      ? tf.zeros([size, size, inCh, outCh])
      : heUniformInit(rng, [size, size, inCh, outCh], fanIn);
    this.kernel = bag.add(`${name}/kernel`, kernelInit);
    this.bias = bag.add(`${name}/bias`, tf.zeros([outCh]));
  }

  apply(x: tf.Tensor4D, stride: 1 | 2 = 1): tf.Tensor4D {
    return tf.add(tf.conv2d(x, this.kernel as tf.Tensor4D, stride, 'same'), this.bias) as tf.Tensor4D;
  }
}

export class ConvTranspose2d {
  readonly kernel: tf.Variable;
  readonly bias: tf.Variable;
  private readonly outCh: number;

  constructor(bag: VariableBag, name: string, rng: Rng, inCh: number, outCh: number, size = 4) {
    // conv2dTranspose kernels are [h, w, out, in]
    this.kernel = bag.add(`${name}/kernel`, heUniformInit(rng, [size, size, outCh, inCh], size * size * inCh));
    this.bias = bag.add(`${name}/bias`, tf.zeros([outCh]));
    this.outCh = outCh;
  }

  /** Upsample by 2x. */
  apply(x: tf.Tensor4D): tf.Tensor4D {
    const [b, h, w] = [x.shape[0], x.shape[1], x.shape[2]];
    const out = tf.conv2dTranspose(x, this.kernel as tf.Tensor4D, [b, h * 2, w * 2, this.outCh], 2, 'same');
    return tf.add(out, this.bias) as tf.Tensor4D;
  }
}

export class BatchNorm {
  readonly gamma: tf.Variable;
  readonly beta: tf.Variable;
  readonly movingMean: tf.Variable;
  readonly movingVar: tf.Variable;
  momentum = 0.99;
  epsilon = 1e-3;

  constructor(bag: VariableBag, name: string, channels: number) {
    this.gamma = bag.add(`${name}/gamma`, tf.ones([channels]));
    this.beta = bag.add(`${name}/beta`, tf.zeros([channels]));
    this.movingMean = bag.add(`${name}/moving_mean`, tf.zeros([channels]), false);
    this.movingVar = bag.add(`${name}/moving_var`, tf.ones([channels]), false);
  }

  apply(x: tf.Tensor4D, training: boolean): tf.Tensor4D {
    if (!training) {
      return tf.batchNorm(x, this.movingMean, this.movingVar, this.beta, this.gamma, this.epsilon) as tf.Tensor4D;
    }
    const mean = tf.mean(x, [0, 1, 2]);
    const variance = tf.mean(tf.square(tf.sub(x, mean)), [0, 1, 2]);
    // moving stats update is a side effect; keep it out of the autodiff tape
    tf.tidy(() => {
      const m = this.momentum;
      this.movingMean.assign(tf.add(tf.mul(this.movingMean, m), tf.mul(mean, 1 - m)));
      this.movingVar.assign(tf.add(tf.mul(this.movingVar, m), tf.mul(variance, 1 - m)));
      return tf.scalar(0);
    });
    return tf.batchNorm(x, mean, variance, this.beta, this.gamma, this.epsilon) as tf.Tensor4D;
  }
}

export class Dense {
  readonly weight: tf.Variable;
  readonly bias: tf.Variable;

  constructor(bag: VariableBag, name: string, rng: Rng, inDim: number, outDim: number) {
    this.weight = bag.add(`${name}/weight`, heUniformInit(rng, [inDim, outDim], inDim));
    this.bias = bag.add(`${name}/bias`, tf.zeros([outDim]));
  }

  apply(x: tf.Tensor2D): tf.Tensor2D {
    return tf.add(tf.matMul(x, this.weight as tf.Tensor2D), this.bias) as tf.Tensor2D;
  }
}
