/** Adversarial training loop: alternating discriminator / generator steps
 * with Adam, per-epoch loss aggregation, and evaluation (PSNR / SSIM / EPE)
 * against the dataset's ground truth and stored flows.
 */

import * as tf from '@tensorflow/tfjs';
import { LossWeights, ModelConfig, TrainConfig } from './config.js';
import { DatasetSample, FlowRaster, RasterImage } from './dataio.js';
import { Rng } from './layers.js';
import { adversarialLosses, generatorLoss, PerceptualExtractor } from './losses.js';
import { epe, psnr, ssim } from './metrics.js';
import { Discriminator, Generator } from './model.js';

export interface EpochLog {
  epoch: number;
  genTotal: number;
  l1: number;
  perceptual: number;
  pyramid: number;
  advGen: number;
  advDisc: number;
  psnr?: number;
  ssim?: number;
  epe?: number;
}

export interface TrainResult {
  epochs: EpochLog[];
  generator: Generator;
  discriminator: Discriminator;
  extractor: PerceptualExtractor | null;
  /** PSNR of the distorted inputs against ground truth (reference level). */
  distortedPsnr: number;
}

export interface TrainOptions {
  modelCfg: ModelConfig;
  lossWeights: LossWeights;
  trainCfg: TrainConfig;
  samples: DatasetSample[];
  /** Use the fixed perceptual extractor (default true). */
  withPerceptual?: boolean;
  /** Evaluate image/flow metrics every N epochs (0 = only at the end). */
  evalEvery?: number;
  /** Stop early once rectified PSNR reaches distorted PSNR + this gain. */
  stopAtPsnrGain?: number;
  log?: (line: string) => void;
}

function toTensor(images: RasterImage[]): tf.Tensor4D {
  const [h, w] = [images[0].height, images[0].width];
  const data = new Float32Array(images.length * h * w * 3);
  images.forEach((img, i) => data.set(img.data, i * h * w * 3));
  return tf.tensor4d(data, [images.length, h, w, 3]);
}

function tensorToRaster(data: Float32Array, width: number, height: number): RasterImage {
  return { width, height, data };
}

export function meanDistortedPsnr(samples: DatasetSample[]): number {
  const scores = samples.map((s) => psnr(s.distorted, s.gt));
  return scores.reduce((a, b) => a + b, 0) / scores.length;
}

export async function evaluate(
  generator: Generator,
  samples: DatasetSample[],
  batch = 4,
): Promise<{ psnr: number; ssim: number; epe: number }> {
  const [h, w] = [samples[0].gt.height, samples[0].gt.width];
  let psnrAcc = 0;
  let ssimAcc = 0;
  let epeAcc = 0;
  for (let start = 0; start < samples.length; start += batch) {
    const part = samples.slice(start, start + batch);
    const distorted = toTensor(part.map((s) => s.distorted));
    const fwd = generator.forward(distorted, false);
    const out = (await fwd.output.data()) as Float32Array;
    const flow = (await fwd.flows[0].data()) as Float32Array;
    part.forEach((sample, i) => {
      const img = tensorToRaster(out.slice(i * h * w * 3, (i + 1) * h * w * 3), w, h);
      psnrAcc += psnr(img, sample.gt);
      ssimAcc += ssim(img, sample.gt);
      const predFlow: FlowRaster = {
        width: w,
        height: h,
        data: flow.slice(i * h * w * 2, (i + 1) * h * w * 2),
      };
      epeAcc += epe(predFlow, sample.flow);
    });
    distorted.dispose();
    fwd.output.dispose();
    fwd.flows.forEach((f) => f.dispose());
    fwd.intermediates.forEach((f) => f.dispose());
  }
  return {
    psnr: psnrAcc / samples.length,
    ssim: ssimAcc / samples.length,
    epe: epeAcc / samples.length,
  };
}

export async function trainModel(opts: TrainOptions): Promise<TrainResult> {
  const { modelCfg, lossWeights, trainCfg, samples } = opts;
  const log = opts.log ?? (() => undefined);
  const withPerceptual = opts.withPerceptual ?? true;

  const generator = new Generator(modelCfg, modelCfg.seed + trainCfg.seed);
  const discriminator = new Discriminator(modelCfg, modelCfg.seed + trainCfg.seed);
  const extractor = withPerceptual ? new PerceptualExtractor(modelCfg) : null;

  const gtAll = toTensor(samples.map((s) => s.gt));
  const distortedAll = toTensor(samples.map((s) => s.distorted));
  const distortedPsnr = meanDistortedPsnr(samples);

  const gOpt = tf.train.adam(trainCfg.learningRate);
  const dOpt = tf.train.adam(trainCfg.learningRate);
  const rng = new Rng(0x5eed + trainCfg.seed);
  const epochs: EpochLog[] = [];

  const order = [...samples.keys()];
  for (let epoch = 1; epoch <= trainCfg.epochs; epoch++) {
    // deterministic shuffle per epoch
    for (let i = order.length - 1; i > 0; i--) {
      const j = Math.floor(rng.next() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }

    const sums = { genTotal: 0, l1: 0, perceptual: 0, pyramid: 0, advGen: 0, advDisc: 0 };
    let batches = 0;
    for (let start = 0; start < order.length; start += trainCfg.batchSize) {
      const idx = order.slice(start, start + trainCfg.batchSize);
      const gtBatch = tf.gather(gtAll, idx) as tf.Tensor4D;
      const distortedBatch = tf.gather(distortedAll, idx) as tf.Tensor4D;

      // discriminator step(s) on detached fakes
      let advDisc = 0;
      for (let k = 0; k < trainCfg.discSteps; k++) {
        const fakeDetached = tf.tidy(() => {
          const fwd = generator.forward(distortedBatch, true);
          const out = fwd.output.clone();
          return out;
        });
        const dLoss = dOpt.minimize(
          () => {
            const real = discriminator.forward(gtBatch, true);
            const fake = discriminator.forward(fakeDetached, true);
            return adversarialLosses(real, fake).discriminator;
          },
          true,
          discriminator.bag.trainable(),
        ) as tf.Scalar;
        advDisc = (await dLoss.data())[0];
        dLoss.dispose();
        fakeDetached.dispose();
      }

      // generator step
      let terms = { genTotal: 0, l1: 0, perceptual: 0, pyramid: 0, advGen: 0 };
      const gLoss = gOpt.minimize(
        () => {
          const fwd = generator.forward(distortedBatch, true);
          const fakeLogits = discriminator.forward(fwd.output, true);
          const loss = generatorLoss(
            lossWeights,
            fwd.output,
            fwd.intermediates,
            gtBatch,
            fakeLogits,
            extractor,
          );
          // stash component values for the epoch log (sync reads are cheap here)
          terms = {
            genTotal: loss.total.dataSync()[0],
            l1: loss.l1.dataSync()[0],
            perceptual: loss.perceptual.dataSync()[0],
            pyramid: loss.pyramid.dataSync()[0],
            advGen: loss.adversarial.dataSync()[0],
          };
          return loss.total;
        },
        true,
        generator.bag.trainable(),
      ) as tf.Scalar;
      gLoss.dispose();
      gtBatch.dispose();
      distortedBatch.dispose();

      sums.genTotal += terms.genTotal;
      sums.l1 += terms.l1;
      sums.perceptual += terms.perceptual;
      sums.pyramid += terms.pyramid;
      sums.advGen += terms.advGen;
      sums.advDisc += advDisc;
      batches++;
    }

    const entry: EpochLog = {
      epoch,
      genTotal: sums.genTotal / batches,
      l1: sums.l1 / batches,
      perceptual: sums.perceptual / batches,
      pyramid: sums.pyramid / batches,
      advGen: sums.advGen / batches,
      advDisc: sums.advDisc / batches,
    };

    const evalEvery = opts.evalEvery ?? 0;
    const due = evalEvery > 0 && epoch % evalEvery === 0;
    if (due || epoch === trainCfg.epochs) {
      const scores = await evaluate(generator, samples, trainCfg.batchSize);
      entry.psnr = scores.psnr;
      entry.ssim = scores.ssim;
      entry.epe = scores.epe;
    }
    epochs.push(entry);
    log(JSON.stringify(entry));

    if (
      opts.stopAtPsnrGain !== undefined &&
      entry.psnr !== undefined &&
      entry.psnr >= distortedPsnr + opts.stopAtPsnrGain
    ) {
      break;
    }
  }

  gtAll.dispose();
  distortedAll.dispose();
  return { epochs, generator, discriminator, extractor, distortedPsnr };
}
