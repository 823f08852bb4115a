/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of one pipeline run as shown on the page.
 */
export class FitReport {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cv_error: number;
    readonly epsilon: number;
    /**
     * `log10 |u − u_T|` per grid cell in the layout of [`mask`], NaN
     * outside Ω or when the run failed.
     */
    readonly errors: Float64Array;
    readonly kappa: number;
    readonly m: number;
    readonly m_tilde: number;
    readonly max_error: number;
    readonly n: number;
    readonly status: string;
}

export function domain_mask(domain: string, resolution: number): Uint8Array;

export function fit_error_map(domain: string, _function: string, family: string, order: number, theta: number, algorithm: string, seed: bigint, resolution: number): FitReport;

export function sample_points(domain: string, count: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fitreport_free: (a: number, b: number) => void;
    readonly domain_mask: (a: number, b: number, c: number) => [number, number, number, number];
    readonly fit_error_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: bigint, l: number) => [number, number, number];
    readonly fitreport_cv_error: (a: number) => number;
    readonly fitreport_epsilon: (a: number) => number;
    readonly fitreport_errors: (a: number) => [number, number];
    readonly fitreport_kappa: (a: number) => number;
    readonly fitreport_m: (a: number) => number;
    readonly fitreport_m_tilde: (a: number) => number;
    readonly fitreport_max_error: (a: number) => number;
    readonly fitreport_n: (a: number) => number;
    readonly fitreport_status: (a: number) => [number, number];
    readonly sample_points: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
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
