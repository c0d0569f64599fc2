/** Toy data synthesis, the stand-in feature extractor, and the residual
 * dataset builder (lossless PNM planes + CSV manifest). */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import type { TrainConfig } from "./config.js";
import { predictPixels } from "./model.js";
import { writePnm } from "./ppm.js";
import { Rng } from "./rng.js";

export interface Sample {
  id: string;
  /** Row-major (h, w, c) pixels in [0, 1]. */
  image: Float32Array;
  feature: Float32Array;
}

/** Deterministic toy "extractor": average-pool the image onto a 4x4 grid
 * per channel, map to [-1, 1], and tile up to featDim. */
export function extractToyFeature(
  image: Float32Array,
  size: { h: number; w: number; c: number },
  featDim: number,
): Float32Array {
  const grid = 4;
  const pooled = new Float32Array(grid * grid * size.c);
  const cellH = size.h / grid;
  const cellW = size.w / grid;
  for (let gy = 0; gy < grid; gy++) {
    for (let gx = 0; gx < grid; gx++) {
      for (let ch = 0; ch < size.c; ch++) {
        let total = 0;
        let count = 0;
        for (let y = Math.floor(gy * cellH); y < Math.floor((gy + 1) * cellH); y++) {
          for (let x = Math.floor(gx * cellW); x < Math.floor((gx + 1) * cellW); x++) {
            total += image[(y * size.w + x) * size.c + ch];
            count++;
          }
        }
        pooled[(gy * grid + gx) * size.c + ch] = (total / count) * 2 - 1;
      }
    }
  }
  const feature = new Float32Array(featDim);
  for (let i = 0; i < featDim; i++) feature[i] = pooled[i % pooled.length];
  return feature;
}

/** Seeded smooth random images plus their toy features. */
export function synthToyDataset(n: number, config: TrainConfig, seed = 123): Sample[] {
  const { h, w, c } = config.imageSize;
  const rng = new Rng(seed);
  const samples: Sample[] = [];
  for (let i = 0; i < n; i++) {
    const image = new Float32Array(h * w * c);
    const fy = rng.uniform(1, 6);
    const fx = rng.uniform(1, 6);
    const phase = rng.uniform(0, Math.PI * 2);
    const cy = rng.uniform(0.2, 0.8);
    const cx = rng.uniform(0.2, 0.8);
    const amp = rng.uniform(-0.35, 0.35);
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        const yy = y / (h - 1);
        const xx = x / (w - 1);
        const blob = amp * Math.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / 0.05);
        for (let ch = 0; ch < c; ch++) {
          const v =
            0.5 +
            0.25 * Math.sin(fy * yy * (ch + 1) + phase) * Math.cos(fx * xx) +
            blob;
          image[(y * w + x) * c + ch] = Math.min(1, Math.max(0, v));
        }
      }
    }
    samples.push({
      id: `toy_${String(i).padStart(4, "0")}`,
      image,
      feature: extractToyFeature(image, config.imageSize, config.featDim),
    });
  }
  return samples;
}

export interface ResidualArchiveResult {
  written: number;
  skipped: number;
  manifestPath: string;
}

/** Build the residual dataset: per image, the difference between the
 * original and the model's reconstruction from its feature, min-max
 * normalized to 8-bit PNM, with extrema recorded in manifest.csv.
 * Items whose extractor throws are skipped with a log line. */
export function buildResidualArchive(
  images: { id: string; image: Float32Array }[],
  extractor: (image: Float32Array) => Float32Array,
  model: tf.LayersModel,
  config: TrainConfig,
  outDir: string,
  log: (line: string) => void = console.error,
): ResidualArchiveResult {
  const { h, w, c } = config.imageSize;
  fs.mkdirSync(outDir, { recursive: true });
  const manifest = ["path,x_min,x_max"];
  let written = 0;
  let skipped = 0;
  for (const item of images) {
    let feature: Float32Array;
    try {
      feature = extractor(item.image);
    } catch (err) {
      skipped++;
      log(`skip ${item.id}: extractor failed: ${err}`);
      continue;
    }
    const recon = tf.tidy(() => {
      const f = tf.tensor2d(feature, [1, config.featDim]);
      return predictPixels(model, f).dataSync() as Float32Array;
    });
    const residual = new Float32Array(h * w * c);
    let lo = Infinity;
    let hi = -Infinity;
    for (let i = 0; i < residual.length; i++) {
      residual[i] = item.image[i] - recon[i];
      if (residual[i] < lo) lo = residual[i];
      if (residual[i] > hi) hi = residual[i];
    }
    const texture = new Uint8Array(h * w * c);
    const span = hi - lo;
    if (span > 0) {
      for (let i = 0; i < residual.length; i++) {
        texture[i] = Math.min(
          255,
          Math.floor(((residual[i] - lo) / span) * 255 + 0.5),
        );
      }
    }
    const name = `${item.id}.${c === 3 ? "ppm" : "pgm"}`;
    fs.writeFileSync(path.join(outDir, name), writePnm(texture, h, w, c));
    manifest.push(`${name},${lo.toPrecision(9)},${hi.toPrecision(9)}`);
    written++;
  }
  const manifestPath = path.join(outDir, "manifest.csv");
  fs.writeFileSync(manifestPath, manifest.join("\n") + "\n");
  return { written, skipped, manifestPath };
}
