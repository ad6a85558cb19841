/** Figure model and its reduction to drawing primitives shared by the SVG
 *  and PNG backends, so both formats render identical geometry. */

export interface Series {
    label: string;
    color: string;
    points: Array<[number, number]>;   // data coordinates
}

export interface GuideLine {
    slope: number;      // in data coordinates
    label: string;
    color: string;
}

export interface Figure {
    name: string;
    title: string;
    xLabel: string;
    yLabel: string;
    series: Series[];
    guides: GuideLine[];
    annotations: string[];
}

export type Primitive =
    | { kind: "rect"; x: number; y: number; w: number; h: number; color: string }
    | { kind: "line"; x1: number; y1: number; x2: number; y2: number; color: string; width: number; dashed?: boolean }
    | { kind: "marker"; x: number; y: number; r: number; color: string }
    | { kind: "text"; x: number; y: number; str: string; color: string; size: number; anchor: "start" | "middle" | "end" };

export const WIDTH = 960;
export const HEIGHT = 640;
const MARGIN = { left: 90, right: 30, top: 56, bottom: 120 };

export const PALETTE = ["#1f6fb2", "#c23b22", "#2e8b57", "#8a2be2", "#b8860b", "#305050"];

function niceTicks(lo: number, hi: number, want = 6): number[] {
    if (!(hi > lo)) return [lo];
    const span = hi - lo;
    const raw = span / want;
    const mag = Math.pow(10, Math.floor(Math.log10(raw)));
    let step = mag;
    for (const m of [1, 2, 2.5, 5, 10]) {
        if (raw <= m * mag) { step = m * mag; break; }
    }
    const out: number[] = [];
    let t = Math.ceil(lo / step) * step;
    for (; t <= hi + 1e-12 * span; t += step) out.push(t);
    return out;
}

export function fmtTick(v: number): string {
    const r = Math.round(v * 1e6) / 1e6;
    return String(r === 0 ? 0 : r);
}

function fmtCoord(v: number): number {
    return Math.round(v * 100) / 100;
}

/** Lay the figure out on the fixed canvas and emit primitives. */
export function layout(fig: Figure): Primitive[] {
    const xs: number[] = [];
    const ys: number[] = [];
    for (const s of fig.series) {
        for (const [x, y] of s.points) { xs.push(x); ys.push(y); }
    }
    let xLo = Math.min(...xs);
    let xHi = Math.max(...xs);
    let yLo = Math.min(...ys);
    let yHi = Math.max(...ys);
    const padX = (xHi - xLo || 1) * 0.07;
    const padY = (yHi - yLo || 1) * 0.10;
    xLo -= padX; xHi += padX; yLo -= padY; yHi += padY;

    const plotW = WIDTH - MARGIN.left - MARGIN.right;
    const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const px = (x: number) => fmtCoord(MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW);
    const py = (y: number) => fmtCoord(MARGIN.top + ((yHi - y) / (yHi - yLo)) * plotH);

    const prims: Primitive[] = [];
    prims.push({ kind: "rect", x: 0, y: 0, w: WIDTH, h: HEIGHT, color: "#ffffff" });

    // grid + ticks
    for (const t of niceTicks(xLo, xHi)) {
        prims.push({ kind: "line", x1: px(t), y1: py(yLo), x2: px(t), y2: py(yHi), color: "#dddddd", width: 1 });
        prims.push({ kind: "text", x: px(t), y: py(yLo) + 20, str: fmtTick(t), color: "#333333", size: 13, anchor: "middle" });
    }
    for (const t of niceTicks(yLo, yHi)) {
        prims.push({ kind: "line", x1: px(xLo), y1: py(t), x2: px(xHi), y2: py(t), color: "#dddddd", width: 1 });
        prims.push({ kind: "text", x: px(xLo) - 8, y: py(t) + 4, str: fmtTick(t), color: "#333333", size: 13, anchor: "end" });
    }
    // frame
    prims.push({ kind: "line", x1: px(xLo), y1: py(yLo), x2: px(xHi), y2: py(yLo), color: "#000000", width: 1.5 });
    prims.push({ kind: "line", x1: px(xLo), y1: py(yLo), x2: px(xLo), y2: py(yHi), color: "#000000", width: 1.5 });

    // guide lines: anchored at the first series' first point
    const anchor = fig.series[0]?.points[0];
    for (const g of fig.guides) {
        if (!anchor) break;
        const [ax, ay] = anchor;
        const yAt = (x: number) => ay + g.slope * (x - ax);
        prims.push({
            kind: "line", x1: px(xLo + padX), y1: py(yAt(xLo + padX)),
            x2: px(xHi - padX), y2: py(yAt(xHi - padX)),
            color: g.color, width: 1.5, dashed: true,
        });
        prims.push({
            kind: "text", x: px(xHi - padX), y: py(yAt(xHi - padX)) - 8,
            str: g.label, color: g.color, size: 13, anchor: "end",
        });
    }

    // series
    for (const s of fig.series) {
        const pts = [...s.points].sort((a, b) => a[0] - b[0]);
        for (let i = 1; i < pts.length; i++) {
            prims.push({
                kind: "line",
                x1: px(pts[i - 1][0]), y1: py(pts[i - 1][1]),
                x2: px(pts[i][0]), y2: py(pts[i][1]),
                color: s.color, width: 1.5,
            });
        }
        for (const [x, y] of pts) {
            prims.push({ kind: "marker", x: px(x), y: py(y), r: 3.5, color: s.color });
        }
    }

    // title, axis labels, legend, annotations
    prims.push({ kind: "text", x: WIDTH / 2, y: 28, str: fig.title, color: "#000000", size: 17, anchor: "middle" });
    prims.push({ kind: "text", x: MARGIN.left + plotW / 2, y: py(yLo) + 44, str: fig.xLabel, color: "#000000", size: 14, anchor: "middle" });
    prims.push({ kind: "text", x: 18, y: MARGIN.top - 12, str: fig.yLabel, color: "#000000", size: 14, anchor: "start" });

    let ly = MARGIN.top + 8;
    for (const s of fig.series) {
        prims.push({ kind: "marker", x: WIDTH - MARGIN.right - 180, y: ly - 4, r: 3.5, color: s.color });
        prims.push({ kind: "text", x: WIDTH - MARGIN.right - 168, y: ly, str: s.label, color: s.color, size: 13, anchor: "start" });
        ly += 18;
    }

    let ay = HEIGHT - MARGIN.bottom + 64;
    for (const a of fig.annotations) {
        prims.push({ kind: "text", x: MARGIN.left, y: ay, str: a, color: "#000000", size: 13, anchor: "start" });
        ay += 18;
    }
    return prims;
}
