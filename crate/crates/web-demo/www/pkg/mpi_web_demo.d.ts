/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * RGBA inverse-depth shading of the reference view, near bright.
     */
    depth(): Uint8Array;
    /**
     * Paints `label` into a rectangle of lifted layer `layer`. `erase`
     * overwrites with the label as background fill instead.
     */
    edit(layer: number, x: number, y: number, width: number, height: number, label: number, erase: boolean): void;
    height(): number;
    constructor(seed: number);
    num_labels(): number;
    num_layers(): number;
    /**
     * RGBA view from a camera moved `lateral` metres right and `forward`
     * metres ahead. `labels` picks the argmax label map over the blended
     * palette colours.
     */
    render(lateral: number, forward: number, labels: boolean): Uint8Array;
    width(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_depth: (a: number) => [number, number, number, number];
    readonly demo_edit: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly demo_height: (a: number) => number;
    readonly demo_new: (a: number) => [number, number, number];
    readonly demo_num_labels: (a: number) => number;
    readonly demo_num_layers: (a: number) => number;
    readonly demo_render: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_width: (a: number) => number;
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
