/** Rectification network: pyramid context encoder, attention-based flow
 * estimation refined coarse to fine, and a layer-by-layer decoder that warps
 * features with the predicted backward flows while rendering a rectified
 * image at every scale.
 */

import * as tf from '@tensorflow/tfjs';
import { ModelConfig } from './config.js';
import { BatchNorm, Conv2d, ConvTranspose2d, Dense, Rng, VariableBag } from './layers.js';
import { backwardWarp } from './warp.js';

export interface GeneratorForward {
  /** Backward flows per level, finest first (index 0 at input resolution). */
  flows: tf.Tensor4D[];
  /** Rectified images at the five intermediate scales, coarsest first. */
  intermediates: tf.Tensor4D[];
  /** Full-resolution rectified image. */
  output: tf.Tensor4D;
}

class EncoderStage {
  conv: Conv2d;
  bn: BatchNorm;

  constructor(bag: VariableBag, name: string, rng: Rng, inCh: number, outCh: number) {
    this.conv = new Conv2d(bag, `${name}/conv`, rng, inCh, outCh, 3);
    this.bn = new BatchNorm(bag, `${name}/bn`, outCh);
  }

  apply(x: tf.Tensor4D, stride: 1 | 2, training: boolean): tf.Tensor4D {
    return tf.relu(this.bn.apply(this.conv.apply(x, stride), training));
  }
}

/** Six-stage feature pyramid: a stride-1 stem keeps the finest level at the
 * input resolution, then five stride-2 stages halve down to size/32. */
export class Encoder {
  stages: EncoderStage[] = [];

  constructor(bag: VariableBag, rng: Rng, cfg: ModelConfig) {
    let inCh = 3;
    cfg.encoderWidths.forEach((width, i) => {
      this.stages.push(new EncoderStage(bag, `encoder/stage${i}`, rng, inCh, width));
      inCh = width;
    });
  }

  /** Returns features finest first: sizes [s, s/2, s/4, s/8, s/16, s/32]. */
  forward(x: tf.Tensor4D, training: boolean): tf.Tensor4D[] {
    const feats: tf.Tensor4D[] = [];
    let h = x;
    this.stages.forEach((stage, i) => {
      h = stage.apply(h, i === 0 ? 1 : 2, training);
      feats.push(h);
    });
    return feats;
  }
}

/** Flow estimator for one pyramid level: channel attention, spatial
 * attention, a residual block, and zero-initialized flow/offset heads that
 * refine the upsampled coarser offsets. */
export class BwemStep {
  fuse: Conv2d;
  seDown: Dense;
  seUp: Dense;
  spatial: Conv2d;
  res1: Conv2d;
  res2: Conv2d;
  flowHead: Conv2d;
  deltaHead: Conv2d;
  channels: number;

  constructor(bag: VariableBag, name: string, rng: Rng, channels: number, seReduction: number) {
    const squeezed = Math.max(1, Math.round(channels / seReduction));
    this.channels = channels;
    this.fuse = new Conv2d(bag, `${name}/fuse`, rng, channels + 2, channels, 3);
    this.seDown = new Dense(bag, `${name}/se_down`, rng, channels, squeezed);
    this.seUp = new Dense(bag, `${name}/se_up`, rng, squeezed, channels);
    this.spatial = new Conv2d(bag, `${name}/spatial`, rng, 2, 1, 7);
    this.res1 = new Conv2d(bag, `${name}/res1`, rng, channels, channels, 3);
    this.res2 = new Conv2d(bag, `${name}/res2`, rng, channels, channels, 3);
    this.flowHead = new Conv2d(bag, `${name}/flow`, rng, channels, 2, 3, { zeroInit: true });
    this.deltaHead = new Conv2d(bag, `${name}/delta`, rng, channels, 2, 3, { zeroInit: true });
  }

  /** phi: [B,H,W,C]; deltaPrev: [B,ceil(H/2),ceil(W/2),2] from the coarser
   * level. Returns this level's flow and the offsets handed to the next. */
  forward(phi: tf.Tensor4D, deltaPrev: tf.Tensor4D): { flow: tf.Tensor4D; delta: tf.Tensor4D } {
    const [b, h, w] = [phi.shape[0], phi.shape[1], phi.shape[2]];
    const up = tf.mul(
      tf.image.resizeBilinear(deltaPrev, [h, w], false),
      tf.scalar(2),
    ) as tf.Tensor4D;

    let x = tf.relu(this.fuse.apply(tf.concat([phi, up], 3) as tf.Tensor4D)) as tf.Tensor4D;

    // channel attention (squeeze and excite)
    const pooled = tf.mean(x, [1, 2]) as tf.Tensor2D;
    const gate = tf.sigmoid(this.seUp.apply(tf.relu(this.seDown.apply(pooled)) as tf.Tensor2D));
    x = tf.mul(x, gate.reshape([b, 1, 1, this.channels])) as tf.Tensor4D;

    // spatial attention over channel-average and channel-max maps
    const avgMap = tf.mean(x, 3, true);
    const maxMap = tf.max(x, 3, true);
    const sGate = tf.sigmoid(this.spatial.apply(tf.concat([avgMap, maxMap], 3) as tf.Tensor4D));
    x = tf.mul(x, sGate) as tf.Tensor4D;

    // residual block
    const r = this.res2.apply(tf.relu(this.res1.apply(x)) as tf.Tensor4D);
    x = tf.add(x, r) as tf.Tensor4D;

    const flow = tf.add(this.flowHead.apply(x), up) as tf.Tensor4D;
    const delta = tf.add(this.deltaHead.apply(x), up) as tf.Tensor4D;
    return { flow, delta };
  }
}

class DecoderStage {
  up: ConvTranspose2d;
  fuse: Conv2d;
  toImage: Conv2d;

  constructor(bag: VariableBag, name: string, rng: Rng, inCh: number, skipCh: number, outCh: number) {
    this.up = new ConvTranspose2d(bag, `${name}/up`, rng, inCh, outCh);
    this.fuse = new Conv2d(bag, `${name}/fuse`, rng, outCh + skipCh, outCh, 3);
    this.toImage = new Conv2d(bag, `${name}/to_image`, rng, outCh, 3, 3);
  }
}

/** Layer-by-layer decoder: upsample with transposed convolutions, fuse the
 * encoder skip, warp the fused features by that level's backward flow, and
 * render a 3-channel image at every scale. */
export class Decoder {
  bottomImage: Conv2d;
  stages: DecoderStage[] = [];

  constructor(bag: VariableBag, rng: Rng, cfg: ModelConfig) {
    const widths = cfg.encoderWidths;
    const coarsest = widths.length - 1;
    this.bottomImage = new Conv2d(bag, 'decoder/bottom_image', rng, widths[coarsest], 3, 3);
    for (let i = coarsest - 1; i >= 0; i--) {
      this.stages.push(
        new DecoderStage(bag, `decoder/stage${i}`, rng, widths[i + 1], widths[i], widths[i]),
      );
    }
  }

  forward(
    feats: tf.Tensor4D[],
    flows: tf.Tensor4D[],
    training: boolean,
  ): { intermediates: tf.Tensor4D[]; output: tf.Tensor4D } {
    const coarsest = feats.length - 1;
    const images: tf.Tensor4D[] = [];

    let x = backwardWarp(feats[coarsest], flows[coarsest]);
    images.push(tf.sigmoid(this.bottomImage.apply(x)) as tf.Tensor4D);

    this.stages.forEach((stage, idx) => {
      const level = coarsest - 1 - idx; // feats index this stage lands on
      let h = stage.up.apply(x);
      h = tf.relu(stage.fuse.apply(tf.concat([h, feats[level]], 3) as tf.Tensor4D)) as tf.Tensor4D;
      h = backwardWarp(h, flows[level]);
      images.push(tf.sigmoid(stage.toImage.apply(h)) as tf.Tensor4D);
      x = h;
    });

    const output = images.pop()!;
    return { intermediates: images, output };
  }
}

export class Generator {
  readonly bag = new VariableBag();
  readonly cfg: ModelConfig;
  encoder: Encoder;
  bwems: BwemStep[] = [];
  decoder: Decoder;

  constructor(cfg: ModelConfig, seed = cfg.seed) {
    this.cfg = cfg;
    const rng = new Rng(seed * 2654435761 + 1);
    this.encoder = new Encoder(this.bag, rng.fork(), cfg);
    cfg.encoderWidths.forEach((width, i) => {
      this.bwems.push(new BwemStep(this.bag, `bwem/level${i}`, rng.fork(), width, cfg.seReduction));
    });
    this.decoder = new Decoder(this.bag, rng.fork(), cfg);
  }

  forward(distorted: tf.Tensor4D, training = false): GeneratorForward {
    const feats = this.encoder.forward(distorted, training);
    const coarsest = feats.length - 1;

    const flows: tf.Tensor4D[] = new Array(feats.length);
    const b = distorted.shape[0];
    let delta = tf.zeros([
      b,
      Math.ceil(feats[coarsest].shape[1] / 2),
      Math.ceil(feats[coarsest].shape[2] / 2),
      2,
    ]) as tf.Tensor4D;
    for (let level = coarsest; level >= 0; level--) {
      const step = this.bwems[level].forward(feats[level], delta);
      flows[level] = step.flow;
      delta = step.delta;
    }

    const { intermediates, output } = this.decoder.forward(feats, flows, training);
    return { flows, intermediates, output };
  }

  parameterCount(): number {
    let total = 0;
    for (const v of this.bag.variables.values()) total += v.size;
    return total;
  }

  dispose(): void {
    this.bag.dispose();
  }
}

export class Discriminator {
  readonly bag = new VariableBag();
  convs: Conv2d[] = [];
  bns: BatchNorm[] = [];
  fc1: Dense;
  fc2: Dense;
  private flatDim: number;

  constructor(cfg: ModelConfig, seed = cfg.seed) {
    const rng = new Rng(seed * 2246822519 + 7);
    let inCh = 3;
    cfg.discWidths.forEach((width, i) => {
      this.convs.push(new Conv2d(this.bag, `disc/conv${i}`, rng, inCh, width, 5));
      this.bns.push(new BatchNorm(this.bag, `disc/bn${i}`, width));
      inCh = width;
    });
    const finalSide = Math.max(1, cfg.inputSize / 2 ** cfg.discWidths.length);
    this.flatDim = finalSide * finalSide * inCh;
    this.fc1 = new Dense(this.bag, 'disc/fc1', rng, this.flatDim, cfg.discFcWidth);
    this.fc2 = new Dense(this.bag, 'disc/fc2', rng, cfg.discFcWidth, 1);
  }

  /** Returns realness logits of shape [B, 1]. */
  forward(img: tf.Tensor4D, training = false): tf.Tensor2D {
    let h = img;
    this.convs.forEach((conv, i) => {
      h = tf.leakyRelu(this.bns[i].apply(conv.apply(h, 2), training), 0.2) as tf.Tensor4D;
    });
    const flat = h.reshape([h.shape[0], this.flatDim]) as tf.Tensor2D;
    const hidden = tf.leakyRelu(this.fc1.apply(flat), 0.2) as tf.Tensor2D;
    return this.fc2.apply(hidden);
  }

  dispose(): void {
    this.bag.dispose();
  }
}
