/* tslint:disable */
/* eslint-disable */

/**
 * Text report of the difference co-array.
 */
export function coarray(desc: string): string;

/**
 * Focusing gain at broadside along range, for a beam focused at
 * `focus_m`. Returns `[range, gain]` pairs flattened.
 */
export function focus_depth(desc: string, carrier_hz: number, focus_m: number, points: number): Float64Array;

/**
 * Far-field gain sampled at `points` values of Δθ spanning [-1, 1].
 */
export function pattern(desc: string, points: number): Float64Array;

/**
 * Element positions in units of λ/2.
 */
export function positions(desc: string): Float64Array;

/**
 * Null-to-null half width of the main lobe, on a 20001-point grid.
 */
export function resolution(desc: string): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coarray: (a: number, b: number) => [number, number, number, number];
    readonly focus_depth: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly pattern: (a: number, b: number, c: number) => [number, number, number, number];
    readonly positions: (a: number, b: number) => [number, number, number, number];
    readonly resolution: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
