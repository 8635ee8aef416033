/** Quality scores matching the dataset generator's definitions bit-for-bit
 * in double precision: PSNR and SSIM on unit-interval rasters (dynamic range
 * 1, 11x11 Gaussian window with sigma 1.5, full-support windows only, per
 * channel averaged) and mean endpoint error between flows.
 */

import { FlowRaster, RasterImage } from './dataio.js';

const WINDOW = 11;
const SIGMA = 1.5;
const C1 = 0.01 * 0.01;
const C2 = 0.03 * 0.03;

export function psnr(a: RasterImage, b: RasterImage): number {
  if (a.width !== b.width || a.height !== b.height) throw new Error('dimension mismatch');
  let acc = 0;
  for (let i = 0; i < a.data.length; i++) {
    const d = a.data[i] - b.data[i];
    acc += d * d;
  }
  const mse = acc / a.data.length;
  if (mse === 0) return Infinity;
  return 10 * Math.log10(1 / mse);
}

function gaussianKernel(): Float64Array {
  const k = new Float64Array(WINDOW);
  const half = (WINDOW - 1) / 2;
  let sum = 0;
  for (let i = 0; i < WINDOW; i++) {
    k[i] = Math.exp(-((i - half) ** 2) / (2 * SIGMA * SIGMA));
    sum += k[i];
  }
  for (let i = 0; i < WINDOW; i++) k[i] /= sum;
  return k;
}

/** Separable correlation with zero padding; callers crop to full support. */
function smooth(plane: Float64Array, w: number, h: number, kernel: Float64Array): Float64Array {
  const half = (WINDOW - 1) / 2;
  const tmp = new Float64Array(w * h);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      let acc = 0;
      for (let t = -half; t <= half; t++) {
        const xx = x + t;
        if (xx >= 0 && xx < w) acc += kernel[t + half] * plane[y * w + xx];
      }
      tmp[y * w + x] = acc;
    }
  }
  const out = new Float64Array(w * h);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      let acc = 0;
      for (let t = -half; t <= half; t++) {
        const yy = y + t;
        if (yy >= 0 && yy < h) acc += kernel[t + half] * tmp[yy * w + x];
      }
      out[y * w + x] = acc;
    }
  }
  return out;
}

export function ssim(a: RasterImage, b: RasterImage): number {
  if (a.width !== b.width || a.height !== b.height) throw new Error('dimension mismatch');
  if (Math.min(a.width, a.height) < WINDOW) throw new Error('image too small for ssim');
  const { width: w, height: h } = a;
  const kernel = gaussianKernel();
  const half = (WINDOW - 1) / 2;
  const channelScores: number[] = [];
  for (let c = 0; c < 3; c++) {
    const x = new Float64Array(w * h);
    const y = new Float64Array(w * h);
    for (let i = 0; i < w * h; i++) {
      x[i] = a.data[i * 3 + c];
      y[i] = b.data[i * 3 + c];
    }
    const xx = new Float64Array(w * h);
    const yy = new Float64Array(w * h);
    const xy = new Float64Array(w * h);
    for (let i = 0; i < w * h; i++) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const muX = smooth(x, w, h, kernel);
    const muY = smooth(y, w, h, kernel);
    const sXX = smooth(xx, w, h, kernel);
    const sYY = smooth(yy, w, h, kernel);
    const sXY = smooth(xy, w, h, kernel);
    let acc = 0;
    let count = 0;
    for (let row = half; row < h - half; row++) {
      for (let col = half; col < w - half; col++) {
        const i = row * w + col;
        const vx = sXX[i] - muX[i] * muX[i];
        const vy = sYY[i] - muY[i] * muY[i];
        const vxy = sXY[i] - muX[i] * muY[i];
        const num = (2 * muX[i] * muY[i] + C1) * (2 * vxy + C2);
        const den = (muX[i] * muX[i] + muY[i] * muY[i] + C1) * (vx + vy + C2);
        acc += num / den;
        count++;
      }
    }
    channelScores.push(acc / count);
  }
  return (channelScores[0] + channelScores[1] + channelScores[2]) / 3;
}

export function epe(a: FlowRaster, b: FlowRaster): number {
  if (a.width !== b.width || a.height !== b.height) throw new Error('dimension mismatch');
  const n = a.width * a.height;
  let acc = 0;
  for (let i = 0; i < n; i++) {
    const du = a.data[i * 2] - b.data[i * 2];
    const dv = a.data[i * 2 + 1] - b.data[i * 2 + 1];
    acc += Math.hypot(du, dv);
  }
  return acc / n;
}
