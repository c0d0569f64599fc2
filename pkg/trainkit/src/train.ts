/** Training loop: Adam, exponential LR decay, per-epoch checkpoints. */

import * as tf from "@tensorflow/tfjs";

import { saveCheckpoint } from "./checkpoint.js";
import type { TrainConfig } from "./config.js";
import { validateConfig } from "./config.js";
import type { Sample } from "./dataset.js";
import { totalLoss } from "./losses.js";
import { buildReconstructionNet } from "./model.js";
import type { FeatureNetwork } from "./perceptual.js";
import { Rng } from "./rng.js";
import { learningRate } from "./schedule.js";

export class NonFiniteLossError extends Error {}

export interface EpochRecord {
  epoch: number;
  lr: number;
  /** Mean train-batch loss over the epoch. */
  trainLoss: number;
  /** Loss on the held-out batch, in inference mode. */
  heldoutLoss: number;
}

export interface TrainResult {
  model: tf.Sequential;
  history: EpochRecord[];
}

export interface TrainOptions {
  percept?: FeatureNetwork | null;
  checkpointDir?: string;
  /** Existing model to continue training (defaults to a fresh build). */
  model?: tf.Sequential;
  log?: (line: string) => void;
}

function toTensors(samples: Sample[], config: TrainConfig): {
  features: tf.Tensor2D;
  images: tf.Tensor4D;
} {
  const { h, w, c } = config.imageSize;
  const n = samples.length;
  const features = new Float32Array(n * config.featDim);
  const images = new Float32Array(n * h * w * c);
  samples.forEach((sample, i) => {
    features.set(sample.feature, i * config.featDim);
    images.set(sample.image, i * h * w * c);
  });
  return {
    features: tf.tensor2d(features, [n, config.featDim]),
    images: tf.tensor4d(images, [n, h, w, c]),
  };
}

/** Evaluate the full loss on a batch without updating batch-norm state. */
export function evaluateLoss(
  model: tf.LayersModel,
  features: tf.Tensor2D,
  images: tf.Tensor4D,
  config: TrainConfig,
  percept: FeatureNetwork | null,
): number {
  return tf.tidy(() => {
    const out = model.predict(features) as tf.Tensor4D;
    const pixels = tf.div(tf.add(out, 1), 2);
    return totalLoss(
      images,
      pixels,
      config.lambdaPercept,
      percept,
      config.k,
      config.meanReduction,
    ).dataSync()[0];
  });
}

export async function trainReconstructor(
  dataset: Sample[],
  config: TrainConfig,
  options: TrainOptions = {},
): Promise<TrainResult> {
  validateConfig(config);
  if (dataset.length === 0) throw new Error("empty dataset");
  const log = options.log ?? (() => undefined);
  const percept = config.lambdaPercept > 0 ? options.percept ?? null : null;
  if (config.lambdaPercept > 0 && percept === null) {
    throw new Error("lambdaPercept > 0 needs a perceptual feature network");
  }
  const model = options.model ?? buildReconstructionNet(config);

  // hold out one batch-worth (at most a fifth of the data) for tracking
  const rng = new Rng(config.seed);
  const order = rng.shuffle(dataset.map((_, i) => i));
  const heldoutCount = Math.max(1, Math.min(config.batchSize, Math.floor(dataset.length / 5)));
  const heldoutIdx = order.slice(0, heldoutCount);
  const trainIdx = order.slice(heldoutCount);
  if (trainIdx.length === 0) throw new Error("dataset too small to hold out a batch");
  const heldout = toTensors(heldoutIdx.map((i) => dataset[i]), config);
  const train = toTensors(trainIdx.map((i) => dataset[i]), config);

  const optimizer = tf.train.adam(config.lrStart);
  const history: EpochRecord[] = [];
  try {
    for (let epoch = 0; epoch < config.epochs; epoch++) {
      const lr = learningRate(epoch, config.epochs, config.lrStart, config.lrEnd);
      // settable at runtime; the typing marks it protected
      (optimizer as unknown as { learningRate: number }).learningRate = lr;
      const perm = rng.shuffle(trainIdx.map((_, i) => i));
      let epochLoss = 0;
      let batches = 0;
      for (let start = 0; start < perm.length; start += config.batchSize) {
        const idx = perm.slice(start, start + config.batchSize);
        const batchLoss = tf.tidy(() => {
          const sel = tf.tensor1d(idx, "int32");
          const bf = tf.gather(train.features, sel) as tf.Tensor2D;
          const bi = tf.gather(train.images, sel) as tf.Tensor4D;
          const lossScalar = optimizer.minimize(
            () => {
              const out = model.apply(bf, { training: true }) as tf.Tensor4D;
              const pixels = tf.div(tf.add(out, 1), 2);
              return totalLoss(
                bi,
                pixels,
                config.lambdaPercept,
                percept,
                config.k,
                config.meanReduction,
              );
            },
            true,
          ) as tf.Scalar;
          return lossScalar.dataSync()[0];
        });
        if (!Number.isFinite(batchLoss)) {
          throw new NonFiniteLossError(
            `non-finite loss ${batchLoss} at epoch ${epoch}, batch ${batches} (lr=${lr})`,
          );
        }
        epochLoss += batchLoss;
        batches++;
      }
      const record: EpochRecord = {
        epoch,
        lr,
        trainLoss: epochLoss / batches,
        heldoutLoss: evaluateLoss(model, heldout.features, heldout.images, config, percept),
      };
      history.push(record);
      log(
        `epoch ${epoch}: lr=${lr.toExponential(3)} train=${record.trainLoss.toFixed(4)} ` +
          `heldout=${record.heldoutLoss.toFixed(4)}`,
      );
      if (options.checkpointDir) {
        saveCheckpoint(model, `${options.checkpointDir}/epoch_${epoch}`, epoch);
      }
      await tf.nextFrame();
    }
  } finally {
    train.features.dispose();
    train.images.dispose();
    heldout.features.dispose();
    heldout.images.dispose();
    optimizer.dispose();
  }
  return { model, history };
}
