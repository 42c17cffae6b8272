/**
 * Recurrence plots cross the boundary as (n_points, packed byte buffer,
 * radius): the buffer is the byte-aligned packed upper triangle, one row
 * per point starting at its diagonal, most-significant bit first. These
 * helpers unpack it without materializing anything bigger than one row.
 */

export interface PackedRecurrencePlot {
  n_points: number;
  bits: Uint8Array;
  radius: number;
  norm: string;
  theiler_window: number;
  strengths: Float64Array | null;
}

export function rowByteOffsets(n: number): Int32Array {
  const offsets = new Int32Array(n + 1);
  for (let i = 0; i < n; i += 1) {
    offsets[i + 1] = offsets[i] + ((n - i + 7) >> 3);
  }
  return offsets;
}

export function recurrenceBit(
  rp: PackedRecurrencePlot,
  i: number,
  j: number,
  offsets?: Int32Array,
): boolean {
  const n = rp.n_points;
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw new RangeError(`cell (${i}, ${j}) outside ${n}x${n} plot`);
  }
  const off = offsets ?? rowByteOffsets(n);
  const row = Math.min(i, j);
  const pos = Math.abs(j - i);
  const byte = rp.bits[off[row] + (pos >> 3)];
  return ((byte >> (7 - (pos & 7))) & 1) === 1;
}

/** Full boolean row i (length n), mirrored from the triangle. */
export function unpackRecurrenceRow(
  rp: PackedRecurrencePlot,
  i: number,
  offsets?: Int32Array,
): Uint8Array {
  const n = rp.n_points;
  const off = offsets ?? rowByteOffsets(n);
  const out = new Uint8Array(n);
  for (let j = 0; j < i; j += 1) {
    const pos = i - j;
    const byte = rp.bits[off[j] + (pos >> 3)];
    out[j] = (byte >> (7 - (pos & 7))) & 1;
  }
  for (let j = i; j < n; j += 1) {
    const pos = j - i;
    const byte = rp.bits[off[i] + (pos >> 3)];
    out[j] = (byte >> (7 - (pos & 7))) & 1;
  }
  return out;
}

/** Dense n*n boolean matrix (row-major); intended for small plots. */
export function unpackRecurrenceDense(rp: PackedRecurrencePlot): Uint8Array {
  const n = rp.n_points;
  const offsets = rowByteOffsets(n);
  const out = new Uint8Array(n * n);
  for (let i = 0; i < n; i += 1) {
    out.set(unpackRecurrenceRow(rp, i, offsets), i * n);
  }
  return out;
}
