// Binary depth-grid reader (.mhdf): 64-byte header, float32 LE heights in
// row-major order, then a packed hole bitmap (LSB-first).

export interface DepthGrid {
  width: number;
  height: number;
  spacing: number;
  zMax: number | null;
  values: Float32Array;
  holes: Uint8Array; // one byte per cell, 1 = missing sample
}

const MAGIC = 0x4644484d; // "MHDF" little-endian

export function parseMhdf(buffer: ArrayBuffer): DepthGrid {
  if (buffer.byteLength < 64) {
    throw new Error(`mhdf: truncated header (${buffer.byteLength} bytes)`);
  }
  const view = new DataView(buffer);
  if (view.getUint32(0, true) !== MAGIC) {
    throw new Error("mhdf: bad magic");
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new Error(`mhdf: unsupported version ${version}`);
  }
  const flags = view.getUint16(6, true);
  const width = view.getUint32(8, true);
  const height = view.getUint32(12, true);
  const spacing = view.getFloat64(16, true);
  const zMaxRaw = view.getFloat64(24, true);
  const n = width * height;
  const valuesEnd = 64 + 4 * n;
  const bitmapBytes = Math.ceil(n / 8);
  if (buffer.byteLength < valuesEnd + bitmapBytes) {
    throw new Error(
      `mhdf: expected ${valuesEnd + bitmapBytes} bytes, got ${buffer.byteLength}`
    );
  }
  const values = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    values[i] = view.getFloat32(64 + 4 * i, true);
  }
  const holes = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const byte = view.getUint8(valuesEnd + (i >> 3));
    holes[i] = (byte >> (i & 7)) & 1;
  }
  return {
    width,
    height,
    spacing,
    zMax: (flags & 2) !== 0 ? zMaxRaw : null,
    values,
    holes,
  };
}
