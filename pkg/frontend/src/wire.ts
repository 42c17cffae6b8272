/**
 * Wire encoding shared with the Python bridge.
 *
 * Float64 arrays cross as base64 of their little-endian bytes, byte buffers
 * as base64, integer arrays as plain lists, and non-finite scalars as
 * tagged markers; finite scalars are ordinary JSON numbers (shortest
 * round-trip decimals parse back to the identical double on both sides).
 */

export type Wire =
  | null
  | boolean
  | number
  | string
  | Wire[]
  | { [key: string]: Wire };

export function encodeF64(values: Float64Array): Wire {
  const bytes = new Uint8Array(
    values.buffer,
    values.byteOffset,
    values.byteLength,
  );
  return { $f64: Buffer.from(bytes).toString("base64") };
}

export function encodeBytes(values: Uint8Array): Wire {
  return { $bytes: Buffer.from(values).toString("base64") };
}

export function encodeScalar(value: number): Wire {
  if (Number.isNaN(value)) return { $f: "nan" };
  if (value === Infinity) return { $f: "inf" };
  if (value === -Infinity) return { $f: "-inf" };
  return value;
}

export function encodeValue(value: unknown): Wire {
  if (value === null || value === undefined) return null;
  if (value instanceof Float64Array) return encodeF64(value);
  if (value instanceof Uint8Array) return encodeBytes(value);
  if (Array.isArray(value)) return value.map(encodeValue);
  if (typeof value === "number") return encodeScalar(value);
  if (typeof value === "boolean" || typeof value === "string") return value;
  if (typeof value === "object") {
    const out: { [key: string]: Wire } = {};
    for (const [k, v] of Object.entries(value as object)) {
      if (v !== undefined) out[k] = encodeValue(v);
    }
    return out;
  }
  throw new TypeError(`cannot encode value of type ${typeof value}`);
}

export type Decoded =
  | null
  | boolean
  | number
  | string
  | Float64Array
  | Uint8Array
  | Decoded[]
  | { [key: string]: Decoded };

export function decodeValue(value: Wire): Decoded {
  if (value === null || typeof value !== "object") return value;
  if (Array.isArray(value)) return value.map(decodeValue);
  const obj = value as { [key: string]: Wire };
  if (typeof obj.$f64 === "string") {
    const buf = Buffer.from(obj.$f64, "base64");
    const copy = new Uint8Array(buf.length);
    copy.set(buf);
    return new Float64Array(copy.buffer);
  }
  if (typeof obj.$bytes === "string") {
    const buf = Buffer.from(obj.$bytes, "base64");
    const copy = new Uint8Array(buf.length);
    copy.set(buf);
    return copy;
  }
  if (Array.isArray(obj.$i64)) {
    return (obj.$i64 as number[]).slice();
  }
  if (typeof obj.$f === "string") {
    return { nan: NaN, inf: Infinity, "-inf": -Infinity }[obj.$f] as number;
  }
  const out: { [key: string]: Decoded } = {};
  for (const [k, v] of Object.entries(obj)) out[k] = decodeValue(v);
  return out;
}

const SCRATCH_A = new DataView(new ArrayBuffer(8));
const SCRATCH_B = new DataView(new ArrayBuffer(8));

/** IEEE-754 bit equality, with every NaN treated as one value. */
export function bitEqualNumber(a: number, b: number): boolean {
  if (Number.isNaN(a) && Number.isNaN(b)) return true;
  SCRATCH_A.setFloat64(0, a);
  SCRATCH_B.setFloat64(0, b);
  return (
    SCRATCH_A.getUint32(0) === SCRATCH_B.getUint32(0) &&
    SCRATCH_A.getUint32(4) === SCRATCH_B.getUint32(4)
  );
}

export function bitEqualArray(a: Float64Array, b: Float64Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i += 1) {
    if (!bitEqualNumber(a[i], b[i])) return false;
  }
  return true;
}
