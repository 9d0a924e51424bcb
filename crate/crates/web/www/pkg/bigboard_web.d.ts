/* tslint:disable */
/* eslint-disable */

export class BoardDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Saves `expression` as a new query and turns it on. Returns how many
     * assets it matched. Past the active cap the oldest query goes off.
     */
    highlight(expression: string): number;
    live_alerts(): number;
    missions(): string[];
    /**
     * Boston fixture replayed, plus two simulated hours queued from `seed`.
     */
    constructor(seed: number);
    seq(): number;
    /**
     * Applies the next `n` scenario commands and advances the menu scroll.
     * Returns how many were applied; zero once the scenario is spent.
     */
    step(n: number): number;
    svg(): string;
    text(): string;
    /**
     * Activates the mission if inactive, otherwise deactivates it.
     */
    toggle_mission(mission_id: string): boolean;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_boarddemo_free: (a: number, b: number) => void;
    readonly boarddemo_highlight: (a: number, b: number, c: number) => [number, number, number];
    readonly boarddemo_live_alerts: (a: number) => number;
    readonly boarddemo_missions: (a: number) => [number, number];
    readonly boarddemo_new: (a: number) => [number, number, number];
    readonly boarddemo_seq: (a: number) => number;
    readonly boarddemo_step: (a: number, b: number) => number;
    readonly boarddemo_svg: (a: number) => [number, number];
    readonly boarddemo_text: (a: number) => [number, number];
    readonly boarddemo_toggle_mission: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
