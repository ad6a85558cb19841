import { deflateSync } from "node:zlib";

import { ADVANCE, GLYPH_H, glyph } from "./font5x7.js";
import { HEIGHT, Primitive, WIDTH } from "./scene.js";

/** Minimal RGBA raster with just enough drawing for the figure primitives:
 *  stamped lines, filled discs, and 5x7 bitmap text. No anti-aliasing, so
 *  output bytes are trivially deterministic. */
export class Raster {
    readonly w: number;
    readonly h: number;
    readonly data: Uint8Array;

    constructor(w: number, h: number) {
        this.w = w;
        this.h = h;
        this.data = new Uint8Array(w * h * 4).fill(255);
    }

    set(x: number, y: number, rgb: [number, number, number]): void {
        if (x < 0 || y < 0 || x >= this.w || y >= this.h) return;
        const i = (y * this.w + x) * 4;
        this.data[i] = rgb[0];
        this.data[i + 1] = rgb[1];
        this.data[i + 2] = rgb[2];
        this.data[i + 3] = 255;
    }

    disc(cx: number, cy: number, r: number, rgb: [number, number, number]): void {
        const ri = Math.ceil(r);
        for (let dy = -ri; dy <= ri; dy++) {
            for (let dx = -ri; dx <= ri; dx++) {
                if (dx * dx + dy * dy <= r * r) {
                    this.set(Math.round(cx) + dx, Math.round(cy) + dy, rgb);
                }
            }
        }
    }

    line(x1: number, y1: number, x2: number, y2: number, width: number,
         rgb: [number, number, number], dashed = false): void {
        const len = Math.hypot(x2 - x1, y2 - y1);
        const steps = Math.max(1, Math.ceil(len));
        const r = Math.max(width / 2, 0.5);
        for (let i = 0; i <= steps; i++) {
            const t = i / steps;
            if (dashed && Math.floor((t * len) / 5) % 2 === 1) continue;
            this.disc(x1 + t * (x2 - x1), y1 + t * (y2 - y1), r, rgb);
        }
    }

    text(x: number, y: number, str: string, size: number,
         rgb: [number, number, number], anchor: "start" | "middle" | "end"): void {
        const scale = size >= 16 ? 2 : size >= 11 ? 2 : 1;
        const width = str.length * ADVANCE * scale;
        let ox = Math.round(x);
        if (anchor === "middle") ox -= Math.round(width / 2);
        if (anchor === "end") ox -= width;
        const oy = Math.round(y) - GLYPH_H * scale;
        for (const ch of str) {
            const rows = glyph(ch);
            for (let ry = 0; ry < GLYPH_H; ry++) {
                for (let rx = 0; rx < 5; rx++) {
                    if ((rows[ry] >> (4 - rx)) & 1) {
                        for (let sy = 0; sy < scale; sy++) {
                            for (let sx = 0; sx < scale; sx++) {
                                this.set(ox + rx * scale + sx, oy + ry * scale + sy, rgb);
                            }
                        }
                    }
                }
            }
            ox += ADVANCE * scale;
        }
    }
}

function hexToRgb(color: string): [number, number, number] {
    const v = parseInt(color.slice(1), 16);
    return [(v >> 16) & 255, (v >> 8) & 255, v & 255];
}

export function rasterize(prims: Primitive[]): Raster {
    const r = new Raster(WIDTH, HEIGHT);
    for (const p of prims) {
        switch (p.kind) {
            case "rect":
                break; // canvas is pre-filled white
            case "line":
                r.line(p.x1, p.y1, p.x2, p.y2, p.width, hexToRgb(p.color), p.dashed);
                break;
            case "marker":
                r.disc(p.x, p.y, p.r, hexToRgb(p.color));
                break;
            case "text":
                r.text(p.x, p.y, p.str, p.size, hexToRgb(p.color), p.anchor);
                break;
        }
    }
    return r;
}

// --- PNG encoding (8-bit RGBA, filter 0, single IDAT) ---

const CRC_TABLE = (() => {
    const t = new Uint32Array(256);
    for (let n = 0; n < 256; n++) {
        let c = n;
        for (let k = 0; k < 8; k++) {
            c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
        }
        t[n] = c >>> 0;
    }
    return t;
})();

function crc32(buf: Uint8Array): number {
    let c = 0xffffffff;
    for (const b of buf) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
    return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, body: Uint8Array): Uint8Array {
    const out = new Uint8Array(12 + body.length);
    const dv = new DataView(out.buffer);
    dv.setUint32(0, body.length);
    for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
    out.set(body, 8);
    dv.setUint32(8 + body.length, crc32(out.subarray(4, 8 + body.length)));
    return out;
}

export function encodePng(raster: Raster): Buffer {
    const { w, h, data } = raster;
    const ihdr = new Uint8Array(13);
    const dv = new DataView(ihdr.buffer);
    dv.setUint32(0, w);
    dv.setUint32(4, h);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 6;   // RGBA
    const scanlines = new Uint8Array(h * (1 + 4 * w));
    for (let y = 0; y < h; y++) {
        scanlines[y * (1 + 4 * w)] = 0; // filter: none
        scanlines.set(data.subarray(y * 4 * w, (y + 1) * 4 * w),
                      y * (1 + 4 * w) + 1);
    }
    const idat = deflateSync(scanlines, { level: 9 });
    return Buffer.concat([
        Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
        chunk("IHDR", ihdr),
        chunk("IDAT", idat),
        chunk("IEND", new Uint8Array(0)),
    ]);
}
