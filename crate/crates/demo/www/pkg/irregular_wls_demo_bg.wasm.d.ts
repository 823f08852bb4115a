/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fitreport_free: (a: number, b: number) => void;
export const domain_mask: (a: number, b: number, c: number) => [number, number, number, number];
export const fit_error_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: bigint, l: number) => [number, number, number];
export const fitreport_cv_error: (a: number) => number;
export const fitreport_epsilon: (a: number) => number;
export const fitreport_errors: (a: number) => [number, number];
export const fitreport_kappa: (a: number) => number;
export const fitreport_m: (a: number) => number;
export const fitreport_m_tilde: (a: number) => number;
export const fitreport_max_error: (a: number) => number;
export const fitreport_n: (a: number) => number;
export const fitreport_status: (a: number) => [number, number];
export const sample_points: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
