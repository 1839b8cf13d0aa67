/* tslint:disable */
/* eslint-disable */

export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Running contact counts and timing means.
     */
    metrics(): string;
    constructor(nodes: number, seed: number, pause_ms: number);
    /**
     * Belief record rows of one node.
     */
    record(node: number): string;
    /**
     * Area, node positions, classes and beliefs, and open contacts.
     */
    state(): string;
    /**
     * Advances up to `ticks` ticks; returns false once the run is over.
     */
    step(ticks: number): boolean;
}

export function convergence(n_d: number, tick_ms: number, max_pause_ms: number, step_ms: number): string;

export function explore(ratios: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly convergence: (a: number, b: number, c: number, d: number) => [number, number];
    readonly explore: (a: number, b: number) => [number, number, number, number];
    readonly simulation_metrics: (a: number) => [number, number];
    readonly simulation_new: (a: number, b: number, c: number) => number;
    readonly simulation_record: (a: number, b: number) => [number, number];
    readonly simulation_state: (a: number) => [number, number];
    readonly simulation_step: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
