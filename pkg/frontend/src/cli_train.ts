/** Train the rectification network on a barrelwarp dataset manifest.
 *
 * Usage: node dist/cli_train.js --manifest path/to/manifest.jsonl
 *        [--epochs 200] [--batch 4] [--lr 0.001] [--seed 0] [--full]
 *        [--checkpoint out.ckpt.json] [--log out.jsonl]
 */

import * as fs from 'fs';
import { parseArgs } from 'util';
import { initBackend } from './backend.js';
import { DEFAULT_LOSS_WEIGHTS, FULL_CONFIG, TOY_CONFIG, TOY_TRAIN_CONFIG } from './config.js';
import { loadDataset } from './dataio.js';
import { saveCheckpoint } from './checkpoint.js';
import { trainModel } from './train.js';

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: {
      manifest: { type: 'string' },
      epochs: { type: 'string', default: '200' },
      batch: { type: 'string', default: '4' },
      lr: { type: 'string' },
      seed: { type: 'string', default: '0' },
      full: { type: 'boolean', default: false },
      checkpoint: { type: 'string' },
      log: { type: 'string' },
      'eval-every': { type: 'string', default: '10' },
    },
  });
  if (!values.manifest) {
    console.error('required: --manifest path/to/manifest.jsonl');
    process.exit(1);
  }
  const backend = await initBackend();
  console.error(`backend: ${backend}`);

  const modelCfg = values.full ? FULL_CONFIG : TOY_CONFIG;
  const trainCfg = {
    ...TOY_TRAIN_CONFIG,
    epochs: Number(values.epochs),
    batchSize: Number(values.batch),
    learningRate: values.lr !== undefined ? Number(values.lr) : values.full ? 1e-4 : TOY_TRAIN_CONFIG.learningRate,
    seed: Number(values.seed),
  };

  const samples = loadDataset(values.manifest);
  console.error(`loaded ${samples.length} samples at ${samples[0].gt.width}^2`);

  const logStream = values.log ? fs.createWriteStream(values.log) : null;
  const result = await trainModel({
    modelCfg,
    lossWeights: DEFAULT_LOSS_WEIGHTS,
    trainCfg,
    samples,
    evalEvery: Number(values['eval-every']),
    log: (line) => {
      console.error(line);
      logStream?.write(line + '\n');
    },
  });
  logStream?.end();

  const last = result.epochs[result.epochs.length - 1];
  console.error(
    `done: distorted ${result.distortedPsnr.toFixed(2)} dB -> rectified ${last.psnr?.toFixed(2)} dB`
    + ` (epe ${last.epe?.toFixed(3)} px) after ${last.epoch} epochs`,
  );
  if (values.checkpoint) {
    await saveCheckpoint(
      { generator: result.generator.bag, discriminator: result.discriminator.bag },
      values.checkpoint,
    );
    console.error(`checkpoint written to ${values.checkpoint}`);
  }
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
