/** Model and training configuration presets. */

export interface ModelConfig {
  /** Pyramid depth (number of encoder levels / flows). */
  levels: number;
  /** Square input resolution; must be divisible by 2^(levels-1). */
  inputSize: number;
  /** Encoder channel widths, finest level first. */
  encoderWidths: number[];
  /** Discriminator conv widths, one per stride-2 stage. */
  discWidths: number[];
  /** Hidden width of the discriminator's first fully connected layer. */
  discFcWidth: number;
  /** Channel-attention squeeze factor. */
  seReduction: number;
  /** Feature-extractor block widths for the perceptual loss. */
  perceptualWidths: number[];
  /** Weight-initialization seed. */
  seed: number;
}

/** Full-scale preset: 256^2 inputs, encoder resolutions 256..8. */
export const FULL_CONFIG: ModelConfig = {
  levels: 6,
  inputSize: 256,
  encoderWidths: [32, 64, 96, 128, 160, 192],
  discWidths: [64, 128, 256, 512, 512, 512],
  discFcWidth: 512,
  seReduction: 8,
  perceptualWidths: [64, 128, 256, 512, 512],
  seed: 0,
};

/** Toy preset for desk-scale training: 64^2 inputs, discriminator widths
 * follow the full ladder scaled by 1/8. */
export const TOY_CONFIG: ModelConfig = {
  levels: 6,
  inputSize: 64,
  encoderWidths: [16, 32, 64, 96, 96, 96],
  discWidths: [8, 16, 32, 64, 64, 64],
  discFcWidth: 64,
  seReduction: 8,
  perceptualWidths: [8, 12, 16, 16, 16],
  seed: 0,
};

export interface LossWeights {
  /** Multiplier of the pixel L1 term. */
  lambdaL1: number;
  /** Multiplier of the perceptual term. */
  lambdaPerc: number;
  /** Per-stage weights of the perceptual term (5 stages). */
  stageWeights: number[];
}

export const DEFAULT_LOSS_WEIGHTS: LossWeights = {
  lambdaL1: 120,
  lambdaPerc: 10,
  stageWeights: [1, 1, 1, 1, 1],
};

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  learningRate: number;
  /** Data shuffling / init seed for the run. */
  seed: number;
  /** Discriminator updates per generator update. */
  discSteps: number;
}

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  epochs: 200,
  batchSize: 4,
  learningRate: 1e-4,
  seed: 0,
  discSteps: 1,
};

/** Desk-scale profile: the higher rate makes a 20-image overfit converge
 * within a couple hundred epochs; full-scale runs keep 1e-4. */
export const TOY_TRAIN_CONFIG: TrainConfig = {
  epochs: 200,
  batchSize: 4,
  learningRate: 1e-3,
  seed: 0,
  discSteps: 1,
};
