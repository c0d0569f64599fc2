/** Export a trained tf.LayersModel to the portable NNWF weight format.
 *
 * NNWF layout (little-endian): magic "NNWF" | version u8=1 |
 * layer_count u16 | per layer: kind u8 | kind header | float32 blobs.
 * Kinds: 0 FC (in u32, out u32; weights[out][in], bias[out]),
 * 1 RESHAPE (h,w,c u16), 2 TCONV (kh,kw,in,out,stride,pad,opad u16;
 * weights[in][out][kh][kw], bias[out]), 3 BN (epsilon f32; gamma, beta,
 * mean, var), 4 RELU, 5 TANH. See ../docs/FORMATS.md in the codec repo.
 *
 * Only straight-line models made of the layer types the inference engine
 * executes are exportable; anything else raises ExportError naming the
 * offending layer.
 */

import * as tf from "@tensorflow/tfjs";

export class ExportError extends Error {}

const KIND_FC = 0;
const KIND_RESHAPE = 1;
const KIND_TCONV = 2;
const KIND_BN = 3;
const KIND_RELU = 4;
const KIND_TANH = 5;

interface Chunk {
  kind: number;
  header: Buffer;
  blobs: Float32Array[];
}

function u16(...values: number[]): Buffer {
  const buf = Buffer.alloc(2 * values.length);
  values.forEach((v, i) => buf.writeUInt16LE(v, 2 * i));
  return buf;
}

function u32(...values: number[]): Buffer {
  const buf = Buffer.alloc(4 * values.length);
  values.forEach((v, i) => buf.writeUInt32LE(v, 4 * i));
  return buf;
}

function f32(value: number): Buffer {
  const buf = Buffer.alloc(4);
  buf.writeFloatLE(value, 0);
  return buf;
}

function transposedConvGeometry(layer: tf.layers.Layer): {
  kh: number;
  kw: number;
  stride: number;
  pad: number;
  outputPad: number;
} {
  const cfg = layer.getConfig() as Record<string, unknown>;
  const [kh, kw] = cfg.kernelSize as number[];
  const [sy, sx] = cfg.strides as number[];
  if (kh !== kw || sy !== sx) {
    throw new ExportError(`${layer.name}: non-square kernel/stride not exportable`);
  }
  const padding = cfg.padding as string;
  if (padding === "valid") {
    return { kh, kw, stride: sy, pad: 0, outputPad: 0 };
  }
  if (padding === "same") {
    if (kh < sy) {
      // no implicit cropping; the stride gap becomes trailing output pad
      return { kh, kw, stride: sy, pad: 0, outputPad: sy - kh };
    }
    if ((kh - sy) % 2 !== 0) {
      throw new ExportError(
        `${layer.name}: 'same' with odd kernel-stride difference pads ` +
          `asymmetrically and cannot be exported; use kernel - stride even`,
      );
    }
    return { kh, kw, stride: sy, pad: (kh - sy) / 2, outputPad: 0 };
  }
  throw new ExportError(`${layer.name}: unsupported padding '${padding}'`);
}

function requireLinearActivation(layer: tf.layers.Layer): void {
  const activation = (layer.getConfig() as Record<string, unknown>).activation;
  if (activation && activation !== "linear") {
    throw new ExportError(
      `${layer.name}: fused activation '${activation}' not exportable; ` +
        `add a separate activation layer`,
    );
  }
}

function exportLayer(layer: tf.layers.Layer): Chunk | null {
  const kind = layer.getClassName();
  switch (kind) {
    case "InputLayer":
      return null;
    case "Dense": {
      requireLinearActivation(layer);
      const [kernel, bias] = denseWeights(layer);
      const [inDim, outDim] = kernel.shape;
      const weights = tf.tidy(() => tf.transpose(kernel, [1, 0]).dataSync());
      return {
        kind: KIND_FC,
        header: u32(inDim, outDim),
        blobs: [weights as Float32Array, bias.dataSync() as Float32Array],
      };
    }
    case "Reshape": {
      const target = (layer.getConfig() as Record<string, unknown>)
        .targetShape as number[];
      if (target.length !== 3) {
        throw new ExportError(`${layer.name}: reshape target must be (h, w, c)`);
      }
      return { kind: KIND_RESHAPE, header: u16(...target), blobs: [] };
    }
    case "Conv2DTranspose": {
      requireLinearActivation(layer);
      const geometry = transposedConvGeometry(layer);
      const [kernel, bias] = denseWeights(layer);
      const [, , outCh, inCh] = kernel.shape; // tfjs layout [kh, kw, out, in]
      const weights = tf.tidy(() => tf.transpose(kernel, [3, 2, 0, 1]).dataSync());
      return {
        kind: KIND_TCONV,
        header: u16(
          geometry.kh,
          geometry.kw,
          inCh,
          outCh,
          geometry.stride,
          geometry.pad,
          geometry.outputPad,
        ),
        blobs: [weights as Float32Array, bias.dataSync() as Float32Array],
      };
    }
    case "BatchNormalization": {
      const cfg = layer.getConfig() as Record<string, unknown>;
      const axis = cfg.axis as number;
      if (axis !== -1 && axis !== 3) {
        throw new ExportError(`${layer.name}: batch-norm axis must be channels-last`);
      }
      if (cfg.scale === false || cfg.center === false) {
        throw new ExportError(`${layer.name}: batch-norm must keep scale and center`);
      }
      const [gamma, beta, mean, variance] = layer.getWeights();
      return {
        kind: KIND_BN,
        header: f32(cfg.epsilon as number),
        blobs: [
          gamma.dataSync() as Float32Array,
          beta.dataSync() as Float32Array,
          mean.dataSync() as Float32Array,
          variance.dataSync() as Float32Array,
        ],
      };
    }
    case "ReLU":
      return { kind: KIND_RELU, header: Buffer.alloc(0), blobs: [] };
    case "Activation": {
      const activation = (layer.getConfig() as Record<string, unknown>).activation;
      if (activation === "tanh") {
        return { kind: KIND_TANH, header: Buffer.alloc(0), blobs: [] };
      }
      if (activation === "relu") {
        return { kind: KIND_RELU, header: Buffer.alloc(0), blobs: [] };
      }
      throw new ExportError(`${layer.name}: unsupported activation '${activation}'`);
    }
    default:
      throw new ExportError(`${layer.name}: unsupported layer kind ${kind}`);
  }
}

function denseWeights(layer: tf.layers.Layer): [tf.Tensor, tf.Tensor] {
  const weights = layer.getWeights();
  if (weights.length === 2) return [weights[0], weights[1]];
  if (weights.length === 1) {
    // bias disabled on the layer: synthesize zeros
    const kernel = weights[0];
    const shape = kernel.shape;
    const outDim = layer.getClassName() === "Dense" ? shape[1]! : shape[2]!;
    return [kernel, tf.zeros([outDim])];
  }
  throw new ExportError(`${layer.name}: unexpected weight count ${weights.length}`);
}

export function exportNnwf(model: tf.LayersModel): Buffer {
  const chunks: Chunk[] = [];
  for (const layer of model.layers) {
    const chunk = exportLayer(layer);
    if (chunk) chunks.push(chunk);
  }
  if (chunks.length === 0 || chunks[0].kind !== KIND_FC) {
    throw new ExportError("model must start with a Dense layer");
  }
  if (chunks[chunks.length - 1].kind !== KIND_TANH) {
    throw new ExportError("model must end with a tanh activation");
  }
  const parts: Buffer[] = [];
  const head = Buffer.alloc(7);
  head.write("NNWF", 0, "ascii");
  head.writeUInt8(1, 4);
  head.writeUInt16LE(chunks.length, 5);
  parts.push(head);
  for (const chunk of chunks) {
    parts.push(Buffer.from([chunk.kind]), chunk.header);
    for (const blob of chunk.blobs) {
      parts.push(Buffer.from(blob.buffer.slice(blob.byteOffset, blob.byteOffset + 4 * blob.length)));
    }
  }
  return Buffer.concat(parts);
}

/** Structural reader used by tests: kinds and blob sizes, no execution. */
export function readNnwfStructure(buf: Buffer): { kind: number; blobFloats: number }[] {
  if (buf.toString("ascii", 0, 4) !== "NNWF") throw new Error("bad magic");
  if (buf.readUInt8(4) !== 1) throw new Error("bad version");
  const count = buf.readUInt16LE(5);
  let pos = 7;
  const layers: { kind: number; blobFloats: number }[] = [];
  let channels = 0;
  for (let i = 0; i < count; i++) {
    const kind = buf.readUInt8(pos++);
    let blobFloats = 0;
    if (kind === KIND_FC) {
      const inDim = buf.readUInt32LE(pos);
      const outDim = buf.readUInt32LE(pos + 4);
      pos += 8;
      blobFloats = inDim * outDim + outDim;
    } else if (kind === KIND_RESHAPE) {
      channels = buf.readUInt16LE(pos + 4);
      pos += 6;
    } else if (kind === KIND_TCONV) {
      const kh = buf.readUInt16LE(pos);
      const kw = buf.readUInt16LE(pos + 2);
      const inCh = buf.readUInt16LE(pos + 4);
      const outCh = buf.readUInt16LE(pos + 6);
      pos += 14;
      channels = outCh;
      blobFloats = inCh * outCh * kh * kw + outCh;
    } else if (kind === KIND_BN) {
      pos += 4;
      blobFloats = 4 * channels;
    } else if (kind !== KIND_RELU && kind !== KIND_TANH) {
      throw new Error(`unknown kind ${kind}`);
    }
    pos += 4 * blobFloats;
    layers.push({ kind, blobFloats });
  }
  if (pos !== buf.length) throw new Error("trailing bytes");
  return layers;
}
