/**
 * Zero-copy view over host numeric arrays.
 *
 * A Float64Array is wrapped as-is (the view never outlives the host array
 * because it IS the host array); anything else array-like gets one
 * validated copy into a fresh Float64Array.
 */

export class BoundSeries {
  readonly data: Float64Array;
  readonly name?: string;
  /** True when construction reused the caller's buffer without copying. */
  readonly zeroCopy: boolean;

  private constructor(data: Float64Array, zeroCopy: boolean, name?: string) {
    this.data = data;
    this.zeroCopy = zeroCopy;
    this.name = name;
  }

  static from(values: unknown, name?: string): BoundSeries {
    if (values instanceof BoundSeries) return values;
    if (values instanceof Float64Array) {
      return new BoundSeries(values, true, name);
    }
    if (ArrayBuffer.isView(values)) {
      // other typed arrays: one widening copy
      const view = values as unknown as ArrayLike<number>;
      return new BoundSeries(Float64Array.from(view), false, name);
    }
    if (Array.isArray(values)) {
      const out = new Float64Array(values.length);
      for (let i = 0; i < values.length; i += 1) {
        const v: unknown = values[i];
        if (typeof v !== "number") {
          throw new TypeError(
            `series element ${i} is ${typeof v}, expected number`,
          );
        }
        out[i] = v;
      }
      return new BoundSeries(out, false, name);
    }
    throw new TypeError(
      "series must be a Float64Array, a typed array, or a number[]",
    );
  }

  get length(): number {
    return this.data.length;
  }
}

export function asSeries(values: unknown, argument = "x"): Float64Array {
  try {
    return BoundSeries.from(values).data;
  } catch (err) {
    if (err instanceof TypeError) {
      throw new TypeError(`argument '${argument}': ${err.message}`);
    }
    throw err;
  }
}
