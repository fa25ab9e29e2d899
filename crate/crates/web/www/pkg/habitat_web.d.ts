/* tslint:disable */
/* eslint-disable */

/**
 * Boundary points and curvature of the ellipse with semi-axes `a`, `b`.
 */
export function boundary_curvature(a: number, b: number, samples: number): string;

/**
 * Radial profile `w(r)/w(0)` of the planar limit problem on `[0, 3 r₂]`.
 */
export function limit_profile(beta: number, samples: number): string;

/**
 * Optimal habitat of measure `delta` in the ellipse `a × b` on a mesh of
 * size `h`, with the mesh, the habitat cells and the eigenfunction.
 */
export function optimal_habitat(a: number, b: number, beta: number, delta: number, h: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly boundary_curvature: (a: number, b: number, c: number) => [number, number, number, number];
    readonly limit_profile: (a: number, b: number) => [number, number, number, number];
    readonly optimal_habitat: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
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
