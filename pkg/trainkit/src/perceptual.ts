/** Pluggable perceptual feature network F.
 *
 * The default configuration taps the relu3_2 activation of a pretrained
 * 19-layer VGG-style classifier. Those weights are large and not bundled;
 * point `loadPerceptualNetwork` at a saved tf.LayersModel to use them.
 * Tests (and lambda ablations) inject a small seeded stand-in instead via
 * `fixtureFeatureNetwork`.
 */

import * as fs from "node:fs";

import * as tf from "@tensorflow/tfjs";

export class PerceptualSetupError extends Error {}

export interface FeatureNetwork {
  /** Map a batch of images (b, h, w, c) to an activation tensor. */
  apply(x: tf.Tensor): tf.Tensor;
  readonly name: string;
}

class LayersFeatureNetwork implements FeatureNetwork {
  constructor(
    private readonly model: tf.LayersModel,
    readonly name: string,
  ) {}

  apply(x: tf.Tensor): tf.Tensor {
    return this.model.apply(x, { training: false }) as tf.Tensor;
  }
}

/**
 * Load a pretrained feature extractor truncated at `layerName`.
 * Raises PerceptualSetupError when the weights are not available.
 */
export async function loadPerceptualNetwork(
  modelJsonPath: string,
  layerName = "relu3_2",
): Promise<FeatureNetwork> {
  if (!fs.existsSync(modelJsonPath)) {
    throw new PerceptualSetupError(
      `perceptual network weights not found at ${modelJsonPath}; ` +
        `train with lambdaPercept = 0 or provide a saved model`,
    );
  }
  let model: tf.LayersModel;
  try {
    model = await tf.loadLayersModel(`file://${modelJsonPath}`);
  } catch (err) {
    throw new PerceptualSetupError(`cannot load perceptual network: ${err}`);
  }
  const tap = model.getLayer(layerName);
  const truncated = tf.model({ inputs: model.inputs, outputs: tap.output as tf.SymbolicTensor });
  return new LayersFeatureNetwork(truncated, `${modelJsonPath}:${layerName}`);
}

/**
 * Deterministic convolutional stand-in for tests: two seeded conv layers
 * with a ReLU tap, frozen (never trained).
 */
export function fixtureFeatureNetwork(
  imageSize: { h: number; w: number; c: number },
  seed = 11,
): FeatureNetwork {
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [imageSize.h, imageSize.w, imageSize.c],
      filters: 8,
      kernelSize: 3,
      strides: 2,
      padding: "same",
      activation: "relu",
      kernelInitializer: tf.initializers.heNormal({ seed }),
      biasInitializer: "zeros",
      trainable: false,
    }),
  );
  model.add(
    tf.layers.conv2d({
      filters: 8,
      kernelSize: 3,
      strides: 1,
      padding: "same",
      activation: "relu",
      kernelInitializer: tf.initializers.heNormal({ seed: seed + 1 }),
      biasInitializer: "zeros",
      trainable: false,
    }),
  );
  return new LayersFeatureNetwork(model, `fixture(seed=${seed})`);
}
