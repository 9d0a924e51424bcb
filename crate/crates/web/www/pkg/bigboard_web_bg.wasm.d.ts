/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_boarddemo_free: (a: number, b: number) => void;
export const boarddemo_highlight: (a: number, b: number, c: number) => [number, number, number];
export const boarddemo_live_alerts: (a: number) => number;
export const boarddemo_missions: (a: number) => [number, number];
export const boarddemo_new: (a: number) => [number, number, number];
export const boarddemo_seq: (a: number) => number;
export const boarddemo_step: (a: number, b: number) => number;
export const boarddemo_svg: (a: number) => [number, number];
export const boarddemo_text: (a: number) => [number, number];
export const boarddemo_toggle_mission: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
