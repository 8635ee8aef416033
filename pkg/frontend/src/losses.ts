/** Training losses: pixel L1, multi-stage perceptual, multi-scale pyramid,
 * and the adversarial pair. Every term is a nonnegative scalar mean, so the
 * total is zero exactly when each component is.
 */

import * as tf from '@tensorflow/tfjs';
import { LossWeights, ModelConfig } from './config.js';
import { Conv2d, Rng, VariableBag } from './layers.js';

export function l1Loss(a: tf.Tensor, b: tf.Tensor): tf.Scalar {
  return tf.mean(tf.abs(tf.sub(a, b))) as tf.Scalar;
}

/** Fixed convolutional feature extractor with five stages (the activations
 * just before each pooling step). The topology follows the classic 19-layer
 * configuration (blocks of 2,2,4,4,4 3x3 convolutions); widths are
 * configurable and the weights are deterministic from the seed. Pretrained
 * weights can be substituted through the VariableBag, but random fixed
 * projections already make the loss a meaningful high-frequency penalty.
 */
export class PerceptualExtractor {
  readonly bag = new VariableBag();
  private blocks: Conv2d[][] = [];

  static readonly BLOCK_DEPTHS = [2, 2, 4, 4, 4];

  constructor(cfg: ModelConfig, seed = 1234) {
    const rng = new Rng(seed * 3266489917 + 11);
    let inCh = 3;
    PerceptualExtractor.BLOCK_DEPTHS.forEach((depth, b) => {
      const width = cfg.perceptualWidths[b];
      const convs: Conv2d[] = [];
      for (let i = 0; i < depth; i++) {
        convs.push(new Conv2d(this.bag, `perc/block${b}/conv${i}`, rng, inCh, width, 3));
        inCh = width;
      }
      this.blocks.push(convs);
    });
    // frozen: the extractor is a fixed measurement, not a trainable network
    for (const v of this.bag.variables.values()) {
      (v as { trainable: boolean }).trainable = false;
    }
  }

  /** Five feature maps, one per block, taken before each 2x2 pooling. */
  stages(img: tf.Tensor4D): tf.Tensor4D[] {
    const out: tf.Tensor4D[] = [];
    let h = img;
    this.blocks.forEach((convs, b) => {
      for (const conv of convs) h = tf.relu(conv.apply(h)) as tf.Tensor4D;
      out.push(h);
      if (b < this.blocks.length - 1) {
        h = tf.maxPool(h, 2, 2, 'same');
      }
    });
    return out;
  }

  dispose(): void {
    this.bag.dispose();
  }
}

export function perceptualLoss(
  extractor: PerceptualExtractor,
  rectified: tf.Tensor4D,
  gt: tf.Tensor4D,
  stageWeights: number[],
): tf.Scalar {
  const fa = extractor.stages(rectified);
  const fb = extractor.stages(gt);
  const terms = fa.map((f, i) => tf.mul(l1Loss(f, fb[i]), tf.scalar(stageWeights[i])));
  return tf.addN(terms) as tf.Scalar;
}

/** 2x2 box average, matching the dataset generator's pyramid filter. */
export function boxDownsample(img: tf.Tensor4D, times: number): tf.Tensor4D {
  let h = img;
  for (let i = 0; i < times; i++) h = tf.avgPool(h, 2, 2, 'valid') as tf.Tensor4D;
  return h;
}

/** Sum of L1 terms between each intermediate image and the ground truth
 * downsampled to its resolution. */
export function pyramidLoss(intermediates: tf.Tensor4D[], gt: tf.Tensor4D): tf.Scalar {
  const size = gt.shape[1];
  const terms = intermediates.map((img) => {
    const halvings = Math.round(Math.log2(size / img.shape[1]));
    return l1Loss(img, boxDownsample(gt, halvings));
  });
  return tf.addN(terms) as tf.Scalar;
}

export interface AdversarialLosses {
  /** Generator term: -log D(fake), nonnegative, zero when D is fooled completely. */
  generator: tf.Scalar;
  /** Discriminator term: -log D(real) - log(1 - D(fake)). */
  discriminator: tf.Scalar;
}

export function adversarialLosses(
  realLogits: tf.Tensor2D,
  fakeLogits: tf.Tensor2D,
): AdversarialLosses {
  const ones = tf.onesLike(realLogits);
  const zeros = tf.zerosLike(fakeLogits);
  const bce = (logits: tf.Tensor, labels: tf.Tensor) =>
    tf.mean(tf.losses.sigmoidCrossEntropy(labels, logits, undefined, 0, tf.Reduction.NONE)) as tf.Scalar;
  return {
    generator: bce(fakeLogits, tf.onesLike(fakeLogits)),
    discriminator: tf.add(bce(realLogits, ones), bce(fakeLogits, zeros)) as tf.Scalar,
  };
}

export interface GeneratorLossTerms {
  l1: tf.Scalar;
  perceptual: tf.Scalar;
  pyramid: tf.Scalar;
  adversarial: tf.Scalar;
  total: tf.Scalar;
}

export function generatorLoss(
  weights: LossWeights,
  rectified: tf.Tensor4D,
  intermediates: tf.Tensor4D[],
  gt: tf.Tensor4D,
  fakeLogits: tf.Tensor2D,
  extractor: PerceptualExtractor | null,
): GeneratorLossTerms {
  const l1 = l1Loss(rectified, gt);
  const perceptual = extractor
    ? perceptualLoss(extractor, rectified, gt, weights.stageWeights)
    : (tf.scalar(0) as tf.Scalar);
  const pyramid = pyramidLoss(intermediates, gt);
  const adversarial = tf.mean(
    tf.losses.sigmoidCrossEntropy(
      tf.onesLike(fakeLogits),
      fakeLogits,
      undefined,
      0,
      tf.Reduction.NONE,
    ),
  ) as tf.Scalar;
  const total = tf.addN([
    tf.mul(l1, tf.scalar(weights.lambdaL1)),
    tf.mul(perceptual, tf.scalar(weights.lambdaPerc)),
    pyramid,
    adversarial,
  ]) as tf.Scalar;
  return { l1, perceptual, pyramid, adversarial, total };
}
