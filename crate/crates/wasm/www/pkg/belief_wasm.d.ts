/* tslint:disable */
/* eslint-disable */

/**
 * Density of a reported belief at the midpoints of `points` equal bins.
 */
export class Curve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly a: number;
    readonly b: number;
    /**
     * Largest sd (percent) allowed at this mean.
     */
    readonly cap: number;
    readonly xs: Float64Array;
    readonly ys: Float64Array;
}

export class Update {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bayes: Curve;
    readonly bayesMean: number;
    /**
     * A shape had to be floored.
     */
    readonly clamped: boolean;
    readonly confirmation: number;
    readonly distorted: Curve;
    readonly distortedMean: number;
    readonly prior: Curve;
}

/**
 * Density of a reported belief; rejects reports the experiment would.
 */
export function beliefCurve(mean_percent: number, sd_percent: number, points: number): Curve;

export function confirmation(mean_percent: number, sd_percent: number, reds: number, draws: number): number;

/**
 * Largest admissible sd (percent) for a mean (percent).
 */
export function sdCap(mean_percent: number): number;

/**
 * Bayesian and distorted posteriors after `reds` of `draws`.
 */
export function update(mean_percent: number, sd_percent: number, reds: number, draws: number, alpha: number, beta: number, rho_s: number, rho_f: number, delta_s: number, delta_f: number, points: number): Update;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curve_free: (a: number, b: number) => void;
    readonly __wbg_update_free: (a: number, b: number) => void;
    readonly beliefCurve: (a: number, b: number, c: number) => [number, number, number];
    readonly confirmation: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly curve_a: (a: number) => number;
    readonly curve_b: (a: number) => number;
    readonly curve_cap: (a: number) => number;
    readonly curve_xs: (a: number) => [number, number];
    readonly curve_ys: (a: number) => [number, number];
    readonly sdCap: (a: number) => [number, number, number];
    readonly update: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number];
    readonly update_bayes: (a: number) => number;
    readonly update_bayesMean: (a: number) => number;
    readonly update_clamped: (a: number) => number;
    readonly update_distorted: (a: number) => number;
    readonly update_distortedMean: (a: number) => number;
    readonly update_prior: (a: number) => number;
    readonly update_confirmation: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
