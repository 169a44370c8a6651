/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_solutiont_free: (a: number, b: number) => void;
export const __wbg_wedgedemo_free: (a: number, b: number) => void;
export const riemannProfile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
export const solutiont_new: (a: number, b: number) => [number, number, number];
export const solutiont_postShockDensity: (a: number) => number;
export const solutiont_raster: (a: number, b: number, c: number) => [number, number];
export const solutiont_shockAngleDeg: (a: number) => number;
export const solutiont_stagnationDensity: (a: number) => number;
export const wedgedemo_advance: (a: number, b: number) => [number, number, number];
export const wedgedemo_cells: (a: number) => number;
export const wedgedemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const wedgedemo_raster: (a: number, b: number, c: number) => [number, number, number, number];
export const wedgedemo_steps: (a: number) => number;
export const wedgedemo_time: (a: number) => number;
export const wedgedemo_verdict: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
