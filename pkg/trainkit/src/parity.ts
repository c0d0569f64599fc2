/** Forward-parity harness: compare this framework's inference with the
 * codec's engine running the exported NNWF file, through the codec's own
 * CLI (`sftc reconstruct`) and file formats only. */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import type { TrainConfig } from "./config.js";
import { writeFvec } from "./fvec.js";
import { predictPixels } from "./model.js";
import { exportNnwf } from "./nnwf.js";
import { Rng } from "./rng.js";

function runReconstruct(model: string, feature: string, out: string): void {
  const args = ["reconstruct", "--model", model, "--feature", feature, "-o", out];
  let proc = spawnSync("sftc", args, { encoding: "utf-8" });
  if (proc.error && (proc.error as NodeJS.ErrnoException).code === "ENOENT") {
    proc = spawnSync("python3", ["-m", "sftc", ...args], { encoding: "utf-8" });
  }
  if (proc.status !== 0) {
    throw new Error(
      `sftc reconstruct failed (${proc.status}): ${proc.stderr || proc.error}`,
    );
  }
}

export interface ParityReport {
  maxAbsDiff: number;
  features: number;
}

/** Export the model, run `n` random features through both stacks and
 * report the worst per-pixel deviation. */
export function forwardParity(
  model: tf.LayersModel,
  config: TrainConfig,
  n = 16,
  seed = 2024,
): ParityReport {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainkit-parity-"));
  try {
    const nnwfPath = path.join(dir, "model.nnwf");
    fs.writeFileSync(nnwfPath, exportNnwf(model));
    const rng = new Rng(seed);
    let worst = 0;
    for (let i = 0; i < n; i++) {
      const feature = new Float32Array(config.featDim);
      for (let j = 0; j < feature.length; j++) feature[j] = rng.uniform(-1, 1);
      const fvecPath = path.join(dir, `f${i}.fvec`);
      const outPath = path.join(dir, `out${i}.f32`);
      fs.writeFileSync(fvecPath, writeFvec(feature));
      runReconstruct(nnwfPath, fvecPath, outPath);
      const raw = fs.readFileSync(outPath);
      const engine = new Float32Array(
        raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.length),
      );
      const mine = tf.tidy(
        () =>
          predictPixels(
            model,
            tf.tensor2d(feature, [1, config.featDim]),
          ).dataSync() as Float32Array,
      );
      if (engine.length !== mine.length) {
        throw new Error(`pixel count mismatch: engine ${engine.length}, tfjs ${mine.length}`);
      }
      for (let j = 0; j < mine.length; j++) {
        const diff = Math.abs(engine[j] - mine[j]);
        if (diff > worst) worst = diff;
      }
    }
    return { maxAbsDiff: worst, features: n };
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}
