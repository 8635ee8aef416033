/** Checkpoints: one JSON file mapping variable names to shapes and
 * base64-encoded float32 payloads. Writes go through a temp file and an
 * atomic rename.
 */

import * as fs from 'fs';
import * as tf from '@tensorflow/tfjs';
import { VariableBag } from './layers.js';

interface StoredVariable {
  shape: number[];
  data: string; // base64 float32, little endian
}

export async function saveCheckpoint(
  bags: Record<string, VariableBag>,
  filePath: string,
): Promise<void> {
  const payload: Record<string, Record<string, StoredVariable>> = {};
  for (const [scope, bag] of Object.entries(bags)) {
    payload[scope] = {};
    for (const [name, variable] of bag.variables) {
      const values = (await variable.data()) as Float32Array;
      payload[scope][name] = {
        shape: variable.shape.slice(),
        data: Buffer.from(values.buffer, values.byteOffset, values.byteLength).toString('base64'),
      };
    }
  }
  const tmp = `${filePath}.tmp`;
  fs.writeFileSync(tmp, JSON.stringify(payload));
  fs.renameSync(tmp, filePath);
}

export function loadCheckpoint(
  bags: Record<string, VariableBag>,
  filePath: string,
): void {
  const payload = JSON.parse(fs.readFileSync(filePath, 'utf-8')) as Record<
    string,
    Record<string, StoredVariable>
  >;
  for (const [scope, bag] of Object.entries(bags)) {
    const stored = payload[scope];
    if (!stored) throw new Error(`checkpoint missing scope ${scope}`);
    for (const [name, variable] of bag.variables) {
      const entry = stored[name];
      if (!entry) throw new Error(`checkpoint missing variable ${scope}/${name}`);
      const raw = Buffer.from(entry.data, 'base64');
      const values = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
      variable.assign(tf.tensor(Array.from(values), entry.shape));
    }
  }
}
