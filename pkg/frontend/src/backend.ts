/** Backend selection: the wasm backend when available (5-10x faster than the
 * plain JS CPU backend in Node), with CPU fallback. Override with
 * RECTNET_BACKEND=cpu|wasm.
 */

import * as tf from '@tensorflow/tfjs';
import * as path from 'path';
import { fileURLToPath } from 'url';

let initialized: Promise<string> | null = null;

export function initBackend(): Promise<string> {
  if (!initialized) {
    initialized = (async () => {
      const requested = process.env.RECTNET_BACKEND ?? 'wasm';
      if (requested === 'wasm') {
        try {
          const wasm = await import('@tensorflow/tfjs-backend-wasm');
          const here = path.dirname(fileURLToPath(import.meta.url));
          wasm.setWasmPaths(
            path.join(here, '..', 'node_modules', '@tensorflow/tfjs-backend-wasm', 'dist')
              + path.sep,
          );
          if (await tf.setBackend('wasm')) {
            await tf.ready();
            return tf.getBackend();
          }
        } catch {
          // fall through to cpu
        }
      }
      await tf.setBackend('cpu');
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return initialized;
}
