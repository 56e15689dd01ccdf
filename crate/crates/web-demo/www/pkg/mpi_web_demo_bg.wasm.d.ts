/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_depth: (a: number) => [number, number, number, number];
export const demo_edit: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const demo_height: (a: number) => number;
export const demo_new: (a: number) => [number, number, number];
export const demo_num_labels: (a: number) => number;
export const demo_num_layers: (a: number) => number;
export const demo_render: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demo_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
