/**
 * Thin bindings over the gaitnl core: every operation is forwarded to a
 * Python worker process and returns exactly the values the core computes,
 * with float64 payloads crossing the boundary losslessly. Curves come back
 * as pairs of flat arrays; recurrence plots as (n_points, packed bytes,
 * radius) with unpacking helpers.
 */

import { CoreError, CoreSession, SessionOptions } from "./session.js";
import { BoundSeries } from "./series.js";
import {
  PackedRecurrencePlot,
  recurrenceBit,
  rowByteOffsets,
  unpackRecurrenceDense,
  unpackRecurrenceRow,
} from "./recurrence.js";
import { Decoded } from "./wire.js";

export { CoreError, CoreSession } from "./session.js";
export { BoundSeries } from "./series.js";
export {
  PackedRecurrencePlot,
  recurrenceBit,
  rowByteOffsets,
  unpackRecurrenceDense,
  unpackRecurrenceRow,
} from "./recurrence.js";
export { bitEqualArray, bitEqualNumber } from "./wire.js";

type SeriesLike = BoundSeries | Float64Array | number[];

function series(values: SeriesLike, argument: string): Float64Array {
  try {
    return BoundSeries.from(values).data;
  } catch (err) {
    if (err instanceof TypeError) {
      throw new TypeError(`argument '${argument}': ${err.message}`);
    }
    throw err;
  }
}

export interface DatasetColumn {
  name: string;
  usable: boolean;
  reason: string | null;
  values: Float64Array;
}

export interface Dataset {
  source_path: string;
  format: string;
  n_rows: number;
  columns: DatasetColumn[];
}

export interface AmiCurve {
  lags: number[];
  ami_nats: Float64Array;
  selected_lag: number;
}

export interface FnnCurve {
  dims: number[];
  fnn_fraction: Float64Array;
  selected_dim: number;
  converged: boolean;
}

export interface StateMatrix {
  rows: number;
  dim: number;
  data: Float64Array;
}

export interface PermutationEntropy {
  raw_nats: number;
  normalized: number;
}

export interface MultiscaleCurve {
  variant: string;
  scales: number[];
  values: Float64Array;
}

export interface DfaResult {
  alpha: number;
  box_sizes: number[];
  fluctuations: Float64Array;
  fit_range: [number, number];
  fit_r2: number;
}

export interface RadiusSearch {
  radius: number;
  achieved_rec_pct: number;
  iterations: number;
}

export interface RqaMeasures {
  recurrence_rate_pct: number;
  determinism_pct: number;
  max_diagonal_line: number;
  mean_diagonal_line: number;
  diagonal_line_entropy_nats: number;
  laminarity_pct: number;
  trapping_time: number;
  max_vertical_line: number;
  weighted_recurrence_entropy: number;
}

export interface LyeRosenstein {
  steps: number[];
  divergence_curve: Float64Array;
  short_exp: number;
  local_exp: number;
  long_exp: number;
  orbital_exp: number;
  fit_windows: Record<string, [number, number]>;
  mean_period: number;
  n_reference: number;
  units: string;
}

export interface LyeWolf {
  largest_exponent: number;
  replacements: number;
  evolution_steps: number;
  units: string;
}

export interface BatchAlgorithm {
  name: string;
  overrides?: Record<string, unknown>;
}

export interface BatchJob {
  dataset_paths: string[];
  attribute_list_path: string;
  algorithms: BatchAlgorithm[];
  workers?: number;
  memory_budget_bytes?: number;
  output_dir?: string;
  emit_plots?: boolean;
  drop_leading_trailing_nan?: boolean;
  sample_rate_hz?: number;
}

export interface BatchSummary {
  tasks_ok: number;
  tasks_skipped: number;
  tasks_failed: number;
  report_paths: string[];
}

export interface EmbeddingOptions {
  tau: number;
  dim: number;
}

function pointsArgs(points: StateMatrix | SeriesLike): {
  points: Float64Array;
  dim: number;
} {
  if (
    typeof points === "object" &&
    points !== null &&
    "data" in points &&
    "dim" in points
  ) {
    const m = points as StateMatrix;
    return { points: m.data, dim: m.dim };
  }
  return { points: series(points as SeriesLike, "points"), dim: 1 };
}

/** The bound toolkit surface; construct with bind_all(). */
export class Toolkit {
  private session: CoreSession;

  constructor(options: SessionOptions = {}) {
    this.session = new CoreSession(options);
  }

  close(): void {
    this.session.close();
  }

  async version(): Promise<string> {
    return (await this.session.call("version")) as string;
  }

  async load_dataset(path: string): Promise<Dataset> {
    return (await this.session.call("load_dataset", { path })) as
      unknown as Dataset;
  }

  async ami(
    x: SeriesLike,
    y: SeriesLike | null = null,
    options: { max_lag?: number; n_bins?: number } = {},
  ): Promise<AmiCurve> {
    const args: Record<string, unknown> = {
      x: series(x, "x"),
      ...options,
    };
    if (y !== null) args.y = series(y, "y");
    return (await this.session.call("ami", args)) as unknown as AmiCurve;
  }

  async fnn(
    x: SeriesLike,
    tau: number,
    options: {
      max_dim?: number;
      r_tol?: number;
      a_tol?: number;
      drop_threshold?: number;
    } = {},
  ): Promise<FnnCurve> {
    return (await this.session.call("fnn", {
      x: series(x, "x"),
      tau,
      ...options,
    })) as unknown as FnnCurve;
  }

  async embed(x: SeriesLike, params: EmbeddingOptions): Promise<StateMatrix> {
    return (await this.session.call("embed", {
      x: series(x, "x"),
      tau: params.tau,
      dim: params.dim,
    })) as unknown as StateMatrix;
  }

  async sample_entropy(
    x: SeriesLike,
    m = 2,
    r = 0.2,
  ): Promise<number> {
    return (await this.session.call("sample_entropy", {
      x: series(x, "x"),
      m,
      r,
    })) as number;
  }

  async approximate_entropy(x: SeriesLike, m = 2, r = 0.2): Promise<number> {
    return (await this.session.call("approximate_entropy", {
      x: series(x, "x"),
      m,
      r,
    })) as number;
  }

  async cross_approximate_entropy(
    x: SeriesLike,
    y: SeriesLike,
    m = 2,
    r = 0.2,
  ): Promise<number> {
    return (await this.session.call("cross_approximate_entropy", {
      x: series(x, "x"),
      y: series(y, "y"),
      m,
      r,
    })) as number;
  }

  async permutation_entropy(
    x: SeriesLike,
    m = 3,
    tau = 1,
  ): Promise<PermutationEntropy> {
    return (await this.session.call("permutation_entropy", {
      x: series(x, "x"),
      m,
      tau,
    })) as unknown as PermutationEntropy;
  }

  async symbolic_entropy(
    x: SeriesLike,
    threshold: number | "median" = "median",
    word_length = 3,
  ): Promise<number> {
    return (await this.session.call("symbolic_entropy", {
      x: series(x, "x"),
      threshold,
      word_length,
    })) as number;
  }

  async multiscale_entropy_plus(
    x: SeriesLike,
    options: {
      m?: number;
      r?: number;
      max_scale?: number;
      variants?: string[];
    } = {},
  ): Promise<MultiscaleCurve[]> {
    return (await this.session.call("multiscale_entropy_plus", {
      x: series(x, "x"),
      ...options,
    })) as unknown as MultiscaleCurve[];
  }

  async dfa(
    x: SeriesLike,
    options: {
      box_sizes?: number[];
      detrend_order?: number;
      fit_range?: [number, number];
    } = {},
  ): Promise<DfaResult> {
    return (await this.session.call("dfa", {
      x: series(x, "x"),
      ...options,
    })) as unknown as DfaResult;
  }

  async recurrence_plot(
    points: StateMatrix | SeriesLike,
    radius: number,
    options: {
      norm?: string;
      theiler_window?: number;
      memory_budget_bytes?: number;
    } = {},
  ): Promise<PackedRecurrencePlot> {
    return (await this.session.call("recurrence_plot", {
      ...pointsArgs(points),
      radius,
      ...options,
    })) as unknown as PackedRecurrencePlot;
  }

  async radius_from_recurrence(
    points: StateMatrix | SeriesLike,
    target_rec_pct: number,
    options: {
      tolerance_pct?: number;
      norm?: string;
      theiler_window?: number;
    } = {},
  ): Promise<RadiusSearch> {
    return (await this.session.call("radius_from_recurrence", {
      ...pointsArgs(points),
      target_rec_pct,
      ...options,
    })) as unknown as RadiusSearch;
  }

  async rqa_measures(
    rp: PackedRecurrencePlot,
    l_min = 2,
    v_min = 2,
  ): Promise<RqaMeasures> {
    return (await this.session.call("rqa_measures", {
      rp: {
        n_points: rp.n_points,
        bits: rp.bits,
        radius: rp.radius,
        norm: rp.norm,
        theiler_window: rp.theiler_window,
        strengths: rp.strengths,
      },
      l_min,
      v_min,
    })) as unknown as RqaMeasures;
  }

  async lye_rosenstein(
    x: SeriesLike,
    params: EmbeddingOptions,
    options: { mean_period?: number | "auto"; max_steps?: number | "auto" } = {},
  ): Promise<LyeRosenstein> {
    return (await this.session.call("lye_rosenstein", {
      x: series(x, "x"),
      tau: params.tau,
      dim: params.dim,
      ...options,
    })) as unknown as LyeRosenstein;
  }

  async lye_wolf(
    x: SeriesLike,
    params: EmbeddingOptions,
    options: {
      evolve_steps?: number;
      scale_min?: number | "auto";
      scale_max?: number | "auto";
    } = {},
  ): Promise<LyeWolf> {
    return (await this.session.call("lye_wolf", {
      x: series(x, "x"),
      tau: params.tau,
      dim: params.dim,
      ...options,
    })) as unknown as LyeWolf;
  }

  async run_batch(job: BatchJob): Promise<BatchSummary> {
    return (await this.session.call("run_batch", {
      ...job,
    } as Record<string, unknown>)) as unknown as BatchSummary;
  }

  /** Raw escape hatch for custom registered algorithms. */
  async call(op: string, args: Record<string, unknown>): Promise<Decoded> {
    return this.session.call(op, args);
  }
}

/** Start a core session and return the bound operation surface. */
export function bind_all(options: SessionOptions = {}): Toolkit {
  return new Toolkit(options);
}
