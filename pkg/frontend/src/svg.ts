import { HEIGHT, Primitive, WIDTH } from "./scene.js";

function esc(s: string): string {
    return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Deterministic vector output: fixed metadata, fixed ordering, fixed
 *  number formatting; identical primitives give identical bytes. */
export function toSvg(prims: Primitive[]): string {
    const out: string[] = [];
    out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`);
    out.push(`<desc>prewet-plots</desc>`);
    for (const p of prims) {
        switch (p.kind) {
            case "rect":
                out.push(`<rect x="${p.x}" y="${p.y}" width="${p.w}" height="${p.h}" fill="${p.color}"/>`);
                break;
            case "line": {
                const dash = p.dashed ? ` stroke-dasharray="6 4"` : "";
                out.push(`<line x1="${p.x1}" y1="${p.y1}" x2="${p.x2}" y2="${p.y2}" stroke="${p.color}" stroke-width="${p.width}"${dash}/>`);
                break;
            }
            case "marker":
                out.push(`<circle cx="${p.x}" cy="${p.y}" r="${p.r}" fill="${p.color}"/>`);
                break;
            case "text":
                out.push(`<text x="${p.x}" y="${p.y}" font-family="monospace" font-size="${p.size}" fill="${p.color}" text-anchor="${p.anchor}">${esc(p.str)}</text>`);
                break;
        }
    }
    out.push(`</svg>`);
    return out.join("\n") + "\n";
}
