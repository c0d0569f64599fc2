/** Reconstruction network: feature vector in, Tanh image out.
 *
 * Dense projection, reshape to a small tensor, then a stack of
 * upsampling blocks (transposed conv, batch-norm, ReLU); the final block
 * is a transposed conv followed by Tanh. Kernel 4 / stride 2 / 'same'
 * keeps every block geometry exportable to the inference engine's
 * symmetric-padding layout.
 */

import * as tf from "@tensorflow/tfjs";

import type { TrainConfig } from "./config.js";
import { validateConfig } from "./config.js";

export function buildReconstructionNet(config: TrainConfig): tf.Sequential {
  validateConfig(config);
  const { h, w } = config.imageSize;
  const ups = config.channels.length - 1;
  const factor = 2 ** ups;
  if (h % factor !== 0 || w % factor !== 0) {
    throw new Error(`image ${h}x${w} not divisible by the upsampling factor ${factor}`);
  }
  const h0 = h / factor;
  const w0 = w / factor;
  const c0 = config.channels[0];
  const model = tf.sequential();
  model.add(
    tf.layers.dense({
      inputShape: [config.featDim],
      units: h0 * w0 * c0,
      kernelInitializer: tf.initializers.heNormal({ seed: config.seed }),
      biasInitializer: "zeros",
    }),
  );
  model.add(tf.layers.reshape({ targetShape: [h0, w0, c0] }));
  for (let i = 1; i < config.channels.length; i++) {
    const last = i === config.channels.length - 1;
    model.add(
      tf.layers.conv2dTranspose({
        filters: config.channels[i],
        kernelSize: 4,
        strides: 2,
        padding: "same",
        kernelInitializer: tf.initializers.heNormal({ seed: config.seed + i }),
        biasInitializer: "zeros",
      }),
    );
    if (!last) {
      model.add(tf.layers.batchNormalization({}));
      model.add(tf.layers.reLU());
    }
  }
  model.add(tf.layers.activation({ activation: "tanh" }));
  return model;
}

/** Inference helper: Tanh output mapped to the [0, 1] pixel domain. */
export function predictPixels(model: tf.LayersModel, features: tf.Tensor2D): tf.Tensor4D {
  return tf.tidy(() => {
    const t = model.predict(features) as tf.Tensor4D;
    return tf.div(tf.add(t, 1), 2);
  });
}
