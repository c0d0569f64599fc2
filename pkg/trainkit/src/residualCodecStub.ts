/** Placeholder for training a learned end-to-end residual codec.
 *
 * The codec's enhancement layer accepts external codecs through command
 * templates, so a learned residual coder can slot in without touching the
 * container. Training one is out of scope here; the defaults such a run
 * would use are recorded so the entry point is honest about what exists.
 */

export const RESIDUAL_CODEC_DEFAULTS = {
  batchSize: 16,
  learningRate: 0.0002,
  epochs: 10,
  /** Convolutional feature width for RGB residual planes. */
  featureWidth: 128,
} as const;

export function trainResidualCodec(): never {
  throw new Error(
    "learned residual-codec training is not implemented; the enhancement " +
      "layer's internal DCT coder and external-codec hook cover residual " +
      "coding (see README). Defaults a future implementation should use: " +
      JSON.stringify(RESIDUAL_CODEC_DEFAULTS),
  );
}
