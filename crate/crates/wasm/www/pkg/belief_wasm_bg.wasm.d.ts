/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curve_free: (a: number, b: number) => void;
export const __wbg_update_free: (a: number, b: number) => void;
export const beliefCurve: (a: number, b: number, c: number) => [number, number, number];
export const confirmation: (a: number, b: number, c: number, d: number) => [number, number, number];
export const curve_a: (a: number) => number;
export const curve_b: (a: number) => number;
export const curve_cap: (a: number) => number;
export const curve_xs: (a: number) => [number, number];
export const curve_ys: (a: number) => [number, number];
export const sdCap: (a: number) => [number, number, number];
export const update: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number];
export const update_bayes: (a: number) => number;
export const update_bayesMean: (a: number) => number;
export const update_clamped: (a: number) => number;
export const update_distorted: (a: number) => number;
export const update_distortedMean: (a: number) => number;
export const update_prior: (a: number) => number;
export const update_confirmation: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
