/** Loss terms for reconstruction training.
 *
 * The reconstruction term is the k-norm of the pixel difference,
 * (sum |x - y|^k)^(1/k); with the default k = 1 that is the plain sum of
 * absolute differences. `meanReduction` divides by the element count for
 * callers who prefer a true mean. The perceptual term compares activations
 * of a feature network F: 0.5 * ||F(x) - F(y)||_2^2.
 */

import * as tf from "@tensorflow/tfjs";

import type { FeatureNetwork } from "./perceptual.js";

export function reconstructionLoss(
  x: tf.Tensor,
  y: tf.Tensor,
  k = 1,
  meanReduction = false,
): tf.Scalar {
  if (!arrayEqual(x.shape, y.shape)) {
    throw new Error(`shape mismatch ${x.shape} vs ${y.shape}`);
  }
  return tf.tidy(() => {
    const absDiff = tf.abs(tf.sub(x, y));
    const powed = k === 1 ? absDiff : tf.pow(absDiff, k);
    let total = tf.sum(powed);
    if (k !== 1) total = tf.pow(total, 1 / k);
    if (meanReduction) {
      const batch = x.shape.length === 4 ? x.shape[0] : 1;
      total = tf.div(total, tf.scalar(x.size / batch));
    }
    return total.asScalar();
  });
}

export function perceptualLoss(
  x: tf.Tensor,
  y: tf.Tensor,
  feature: FeatureNetwork,
): tf.Scalar {
  return tf.tidy(() => {
    const fx = feature.apply(x);
    const fy = feature.apply(y);
    return tf.mul(0.5, tf.sum(tf.square(tf.sub(fx, fy)))).asScalar();
  });
}

export function totalLoss(
  x: tf.Tensor,
  y: tf.Tensor,
  lambdaPercept: number,
  feature: FeatureNetwork | null,
  k = 1,
  meanReduction = false,
): tf.Scalar {
  return tf.tidy(() => {
    const recon = reconstructionLoss(x, y, k, meanReduction);
    if (lambdaPercept === 0 || feature === null) {
      return recon;
    }
    return tf.add(recon, tf.mul(lambdaPercept, perceptualLoss(x, y, feature))).asScalar();
  });
}

function arrayEqual(a: readonly (number | null)[], b: readonly (number | null)[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}
