/** Weight checkpoints: a JSON manifest plus one flat float32 blob.
 * Checkpoints carry weights only (not optimizer moments); reloading one
 * reproduces evaluation losses exactly. */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

interface Manifest {
  epoch: number;
  weights: { shape: number[]; floats: number }[];
}

export function saveCheckpoint(model: tf.LayersModel, dir: string, epoch: number): void {
  fs.mkdirSync(dir, { recursive: true });
  const tensors = model.getWeights();
  const manifest: Manifest = { epoch, weights: [] };
  const blobs: Buffer[] = [];
  for (const tensor of tensors) {
    const data = tensor.dataSync() as Float32Array;
    manifest.weights.push({ shape: tensor.shape.slice(), floats: data.length });
    blobs.push(
      Buffer.from(data.buffer.slice(data.byteOffset, data.byteOffset + 4 * data.length)),
    );
  }
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest, null, 2));
  fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.concat(blobs));
}

export function loadCheckpoint(model: tf.LayersModel, dir: string): number {
  const manifest: Manifest = JSON.parse(
    fs.readFileSync(path.join(dir, "manifest.json"), "utf-8"),
  );
  const blob = fs.readFileSync(path.join(dir, "weights.bin"));
  const tensors: tf.Tensor[] = [];
  let offset = 0;
  for (const entry of manifest.weights) {
    const values = new Float32Array(entry.floats);
    for (let i = 0; i < entry.floats; i++) values[i] = blob.readFloatLE(offset + 4 * i);
    offset += 4 * entry.floats;
    tensors.push(tf.tensor(values, entry.shape));
  }
  model.setWeights(tensors);
  tensors.forEach((t) => t.dispose());
  return manifest.epoch;
}
