/** Training configuration for the feature-to-image reconstruction network. */

export interface TrainConfig {
  /** Feature dimensionality the network consumes. */
  featDim: number;
  /** Output image geometry (height, width, channels). */
  imageSize: { h: number; w: number; c: number };
  /** Deconv stack channel widths, last entry must equal imageSize.c. */
  channels: number[];
  /** Balancing factor on the perceptual term of the loss. */
  lambdaPercept: number;
  /** Norm order of the reconstruction term (1 = absolute differences). */
  k: number;
  /** Average the reconstruction term instead of summing it. */
  meanReduction: boolean;
  batchSize: number;
  lrStart: number;
  lrEnd: number;
  epochs: number;
  /** Activation tap of the perceptual feature network. */
  perceptLayer: string;
  /** Seed for weight init and batch shuffling. */
  seed: number;
}

export const DEFAULT_CONFIG: TrainConfig = {
  featDim: 128,
  imageSize: { h: 64, w: 64, c: 3 },
  channels: [32, 16, 8, 3],
  lambdaPercept: 1e-5,
  k: 1,
  meanReduction: false,
  batchSize: 64,
  lrStart: 0.01,
  lrEnd: 0.0001,
  epochs: 50,
  perceptLayer: "relu3_2",
  seed: 7,
};

export function validateConfig(config: TrainConfig): void {
  if (config.lambdaPercept < 0) throw new Error("lambdaPercept must be >= 0");
  if (!(config.lrStart >= config.lrEnd && config.lrEnd > 0)) {
    throw new Error("require lrStart >= lrEnd > 0");
  }
  if (config.k < 1) throw new Error("k must be >= 1");
  if (config.epochs < 1) throw new Error("epochs must be >= 1");
  if (config.channels[config.channels.length - 1] !== config.imageSize.c) {
    throw new Error("last channel width must equal the image channel count");
  }
}
