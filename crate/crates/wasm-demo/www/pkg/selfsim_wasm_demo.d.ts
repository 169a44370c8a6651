/* tslint:disable */
/* eslint-disable */

/**
 * Density image plus summary numbers of Solution T.
 */
export class SolutionT {
    free(): void;
    [Symbol.dispose](): void;
    constructor(alpha_deg: number, isentropic: boolean);
    postShockDensity(): number;
    raster(width: number, height: number): Float64Array;
    shockAngleDeg(): number;
    stagnationDensity(): number;
}

export class WedgeDemo {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): number;
    cells(): number;
    constructor(alpha_deg: number, isentropic: boolean, n: number, aligned: boolean);
    raster(width: number, height: number): Float64Array;
    steps(): number;
    time(): number;
    verdict(): string;
}

/**
 * Flattened `[x, rho, v, p]` rows of the exact Riemann fan.
 */
export function riemannProfile(left: Float64Array, right: Float64Array, gamma: number, t: number, samples: number, x_min: number, x_max: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_solutiont_free: (a: number, b: number) => void;
    readonly __wbg_wedgedemo_free: (a: number, b: number) => void;
    readonly riemannProfile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly solutiont_new: (a: number, b: number) => [number, number, number];
    readonly solutiont_postShockDensity: (a: number) => number;
    readonly solutiont_raster: (a: number, b: number, c: number) => [number, number];
    readonly solutiont_shockAngleDeg: (a: number) => number;
    readonly solutiont_stagnationDensity: (a: number) => number;
    readonly wedgedemo_advance: (a: number, b: number) => [number, number, number];
    readonly wedgedemo_cells: (a: number) => number;
    readonly wedgedemo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly wedgedemo_raster: (a: number, b: number, c: number) => [number, number, number, number];
    readonly wedgedemo_steps: (a: number) => number;
    readonly wedgedemo_time: (a: number) => number;
    readonly wedgedemo_verdict: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
