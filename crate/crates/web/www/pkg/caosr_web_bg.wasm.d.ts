/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const convergence: (a: number, b: number, c: number, d: number) => [number, number];
export const explore: (a: number, b: number) => [number, number, number, number];
export const simulation_metrics: (a: number) => [number, number];
export const simulation_new: (a: number, b: number, c: number) => number;
export const simulation_record: (a: number, b: number) => [number, number];
export const simulation_state: (a: number) => [number, number];
export const simulation_step: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
