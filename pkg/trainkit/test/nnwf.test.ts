import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, type TrainConfig } from "../src/config.js";
import { buildReconstructionNet } from "../src/model.js";
import { ExportError, exportNnwf, readNnwfStructure } from "../src/nnwf.js";

const TOY: TrainConfig = {
  ...DEFAULT_CONFIG,
  imageSize: { h: 16, w: 16, c: 3 },
  channels: [16, 8, 3],
};

const FC = 0;
const RESHAPE = 1;
const TCONV = 2;
const BN = 3;
const RELU = 4;
const TANH = 5;

describe("NNWF export", () => {
  it("lays out the reconstruction net as the engine's layer kinds", () => {
    const model = buildReconstructionNet(TOY);
    const layers = readNnwfStructure(exportNnwf(model));
    expect(layers.map((l) => l.kind)).toEqual([
      FC, RESHAPE, TCONV, BN, RELU, TCONV, TANH,
    ]);
    // dense blob: 128 -> 4*4*16 units plus bias
    expect(layers[0].blobFloats).toBe(128 * 256 + 256);
    // first deconv: 16 -> 8 channels, 4x4 kernel, plus bias
    expect(layers[2].blobFloats).toBe(16 * 8 * 16 + 8);
    expect(layers[3].blobFloats).toBe(4 * 8);
  });

  it("exports a minimal dense+reshape+tanh fixture as three layers", () => {
    const model = tf.sequential();
    model.add(tf.layers.dense({ inputShape: [128], units: 48 }));
    model.add(tf.layers.reshape({ targetShape: [4, 4, 3] }));
    model.add(tf.layers.activation({ activation: "tanh" }));
    const layers = readNnwfStructure(exportNnwf(model));
    expect(layers.map((l) => l.kind)).toEqual([FC, RESHAPE, TANH]);
  });

  it("rejects unsupported layer kinds, naming the layer", () => {
    const model = tf.sequential();
    model.add(tf.layers.dense({ inputShape: [8], units: 16, name: "stem" }));
    model.add(tf.layers.dropout({ rate: 0.5, name: "drop_me" }));
    model.add(tf.layers.reshape({ targetShape: [4, 4, 1] }));
    model.add(tf.layers.activation({ activation: "tanh" }));
    expect(() => exportNnwf(model)).toThrow(ExportError);
    expect(() => exportNnwf(model)).toThrow(/drop_me/);
  });

  it("rejects asymmetric 'same' deconv geometry", () => {
    const model = tf.sequential();
    model.add(tf.layers.dense({ inputShape: [8], units: 4 * 4 * 2 }));
    model.add(tf.layers.reshape({ targetShape: [4, 4, 2] }));
    model.add(
      tf.layers.conv2dTranspose({
        filters: 3,
        kernelSize: 3,
        strides: 2,
        padding: "same",
        name: "odd_same",
      }),
    );
    model.add(tf.layers.activation({ activation: "tanh" }));
    expect(() => exportNnwf(model)).toThrow(/odd_same/);
  });

  it("rejects fused activations", () => {
    const model = tf.sequential();
    model.add(
      tf.layers.dense({ inputShape: [8], units: 48, activation: "relu", name: "fused" }),
    );
    model.add(tf.layers.reshape({ targetShape: [4, 4, 3] }));
    model.add(tf.layers.activation({ activation: "tanh" }));
    expect(() => exportNnwf(model)).toThrow(/fused/);
  });

  it("requires a tanh tail", () => {
    const model = tf.sequential();
    model.add(tf.layers.dense({ inputShape: [8], units: 48 }));
    model.add(tf.layers.reshape({ targetShape: [4, 4, 3] }));
    expect(() => exportNnwf(model)).toThrow(/tanh/);
  });

  it("supports valid padding and k < s trailing pad geometry", () => {
    for (const opts of [
      { kernelSize: 3, strides: 1, padding: "valid" as const },
      { kernelSize: 2, strides: 4, padding: "same" as const },
    ]) {
      const model = tf.sequential();
      model.add(tf.layers.dense({ inputShape: [8], units: 4 * 4 * 2 }));
      model.add(tf.layers.reshape({ targetShape: [4, 4, 2] }));
      model.add(tf.layers.conv2dTranspose({ filters: 1, ...opts }));
      model.add(tf.layers.activation({ activation: "tanh" }));
      const layers = readNnwfStructure(exportNnwf(model));
      expect(layers.map((l) => l.kind)).toEqual([FC, RESHAPE, TCONV, TANH]);
    }
  });
});
