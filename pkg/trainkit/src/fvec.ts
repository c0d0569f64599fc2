/** FVEC feature files: magic "FVEC" | dim u32 | float32 values, little-endian. */

export function writeFvec(values: Float32Array): Buffer {
  const buf = Buffer.alloc(8 + 4 * values.length);
  buf.write("FVEC", 0, "ascii");
  buf.writeUInt32LE(values.length, 4);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], 8 + 4 * i);
  }
  return buf;
}

export function readFvec(buf: Buffer): Float32Array {
  if (buf.length < 8 || buf.toString("ascii", 0, 4) !== "FVEC") {
    throw new Error("not an FVEC file");
  }
  const dim = buf.readUInt32LE(4);
  if (buf.length < 8 + 4 * dim) throw new Error("truncated FVEC file");
  const out = new Float32Array(dim);
  for (let i = 0; i < dim; i++) out[i] = buf.readFloatLE(8 + 4 * i);
  return out;
}
