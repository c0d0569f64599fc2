/** Binary PPM/PGM (P6/P5) writer and reader: lossless 8-bit image files
 * with no dependencies, used for the residual archive. */

export function writePnm(data: Uint8Array, h: number, w: number, c: number): Buffer {
  if (c !== 1 && c !== 3) throw new Error("PNM supports 1 or 3 channels");
  if (data.length !== h * w * c) throw new Error("pixel buffer size mismatch");
  const header = Buffer.from(`${c === 3 ? "P6" : "P5"}\n${w} ${h}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(data)]);
}

export function readPnm(buf: Buffer): { data: Uint8Array; h: number; w: number; c: number } {
  const magic = buf.toString("ascii", 0, 2);
  if (magic !== "P6" && magic !== "P5") throw new Error("not a binary PNM file");
  const c = magic === "P6" ? 3 : 1;
  // header: magic, width, height, maxval as whitespace-separated tokens
  let pos = 2;
  const tokens: number[] = [];
  while (tokens.length < 3) {
    while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (buf[pos] === 0x23) {
      // comment line
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    tokens.push(parseInt(buf.toString("ascii", start, pos), 10));
  }
  pos++; // single whitespace after maxval
  const [w, h, maxval] = tokens;
  if (maxval !== 255) throw new Error("only 8-bit PNM supported");
  const need = h * w * c;
  if (buf.length < pos + need) throw new Error("truncated PNM file");
  return { data: new Uint8Array(buf.subarray(pos, pos + need)), h, w, c };
}
