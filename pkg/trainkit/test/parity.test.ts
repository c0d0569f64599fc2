import { describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, type TrainConfig } from "../src/config.js";
import { synthToyDataset } from "../src/dataset.js";
import { forwardParity } from "../src/parity.js";
import { trainReconstructor } from "../src/train.js";

const TOY: TrainConfig = {
  ...DEFAULT_CONFIG,
  imageSize: { h: 16, w: 16, c: 3 },
  channels: [16, 8, 3],
  lambdaPercept: 0,
  epochs: 2,
};

describe("forward parity with the codec engine", () => {
  it(
    "exported NNWF matches this framework within 1e-4 per pixel on 16 features",
    async () => {
      // brief training moves batch-norm statistics off their init values,
      // so the parity run covers folded inference batch-norm too
      const dataset = synthToyDataset(64, TOY, 99);
      const { model } = await trainReconstructor(dataset, TOY);
      const report = forwardParity(model, TOY, 16);
      expect(report.features).toBe(16);
      expect(report.maxAbsDiff).toBeLessThanOrEqual(1e-4);
      console.log(
        `[PASS] forward parity: 16 features, max abs diff ${report.maxAbsDiff.toExponential(2)}`,
      );
    },
    180_000,
  );
});
