/** Differentiable backward bilinear warp.
 *
 * output(u, v) = input(u + du, v + dv), sampling the four nearest pixel
 * centers with coordinates clamped to the border — the same semantics as the
 * dataset generator's warping, so a flow file drives both identically.
 * Gradients reach the flow through the interpolation weights.
 */

import * as tf from '@tensorflow/tfjs';

/** img: [B, H, W, C]; flow: [B, H, W, 2] with (du, dv) in pixels. */
export function backwardWarp(img: tf.Tensor4D, flow: tf.Tensor4D): tf.Tensor4D {
  return tf.tidy(() => {
    const [b, h, w, c] = img.shape;
    const xsBase = tf.range(0, w, 1, 'float32').reshape([1, 1, w, 1]);
    const ysBase = tf.range(0, h, 1, 'float32').reshape([1, h, 1, 1]);
    const du = tf.slice(flow, [0, 0, 0, 0], [b, h, w, 1]);
    const dv = tf.slice(flow, [0, 0, 0, 1], [b, h, w, 1]);
    const x = tf.clipByValue(tf.add(xsBase, du), 0, w - 1);
    const y = tf.clipByValue(tf.add(ysBase, dv), 0, h - 1);

    const x0 = tf.floor(x);
    const y0 = tf.floor(y);
    const fx = tf.sub(x, x0);
    const fy = tf.sub(y, y0);

    const one = tf.scalar(1, 'int32');
    const x0i = tf.cast(x0, 'int32');
    const y0i = tf.cast(y0, 'int32');
    const x1i = tf.minimum(tf.add(x0i, one), tf.scalar(w - 1, 'int32'));
    const y1i = tf.minimum(tf.add(y0i, one), tf.scalar(h - 1, 'int32'));

    const flat = img.reshape([b * h * w, c]);
    const batchOffset = tf
      .mul(tf.range(0, b, 1, 'int32'), tf.scalar(h * w, 'int32'))
      .reshape([b, 1, 1, 1]);

    const gatherAt = (yi: tf.Tensor, xi: tf.Tensor): tf.Tensor4D => {
      const index = tf.add(batchOffset, tf.add(tf.mul(yi, tf.scalar(w, 'int32')), xi));
      return tf
        .gather(flat, index.reshape([b * h * w]))
        .reshape([b, h, w, c]) as tf.Tensor4D;
    };

    const v00 = gatherAt(y0i, x0i);
    const v10 = gatherAt(y0i, x1i);
    const v01 = gatherAt(y1i, x0i);
    const v11 = gatherAt(y1i, x1i);

    const oneF = tf.scalar(1);
    const w00 = tf.mul(tf.sub(oneF, fx), tf.sub(oneF, fy));
    const w10 = tf.mul(fx, tf.sub(oneF, fy));
    const w01 = tf.mul(tf.sub(oneF, fx), fy);
    const w11 = tf.mul(fx, fy);

    return tf.addN([
      tf.mul(v00, w00),
      tf.mul(v10, w10),
      tf.mul(v01, w01),
      tf.mul(v11, w11),
    ]) as tf.Tensor4D;
  });
}

/** Validity of each warped sample: true when it lands inside the frame. */
export function warpValidity(flow: tf.Tensor4D): tf.Tensor4D {
  return tf.tidy(() => {
    const [b, h, w] = [flow.shape[0], flow.shape[1], flow.shape[2]];
    const xsBase = tf.range(0, w, 1, 'float32').reshape([1, 1, w, 1]);
    const ysBase = tf.range(0, h, 1, 'float32').reshape([1, h, 1, 1]);
    const x = tf.add(xsBase, tf.slice(flow, [0, 0, 0, 0], [b, h, w, 1]));
    const y = tf.add(ysBase, tf.slice(flow, [0, 0, 0, 1], [b, h, w, 1]));
    const inX = tf.logicalAnd(tf.greaterEqual(x, 0), tf.lessEqual(x, w - 1));
    const inY = tf.logicalAnd(tf.greaterEqual(y, 0), tf.lessEqual(y, h - 1));
    return tf.logicalAnd(inX, inY) as tf.Tensor4D;
  });
}
