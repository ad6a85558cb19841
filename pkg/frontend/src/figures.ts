import { bracketCoord, readSweepRows, readTvRows, SweepRow } from "./csv.js";
import { Figure, PALETTE, Series } from "./scene.js";

/** The JSON summary written next to each CSV by the experiment runner. */
export interface Summary {
    results: Record<string, unknown>;
    [key: string]: unknown;
}

export interface BuildOutcome {
    figure: Figure | null;
    warnings: string[];
}

const LOG10 = Math.log(10);

function log10(v: number): number {
    return Math.log(v) / LOG10;
}

function color(i: number): string {
    return PALETTE[i % PALETTE.length];
}

function fitExponent(fit: unknown): number {
    return (fit as { exponent: number }).exponent;
}

function groupByLambda(rows: SweepRow[]): Map<number, SweepRow[]> {
    const out = new Map<number, SweepRow[]>();
    for (const r of rows) {
        const bucket = out.get(r.lambda) ?? [];
        bucket.push(r);
        out.set(r.lambda, bucket);
    }
    return out;
}

function perLambda(summary: Summary): Record<string, Record<string, unknown>> {
    return (summary.results["per_lambda"] ?? {}) as Record<string, Record<string, unknown>>;
}

function summaryForLambda(summary: Summary, lam: number): Record<string, unknown> | null {
    for (const [key, val] of Object.entries(perLambda(summary))) {
        if (Number(key) === lam) return val;
    }
    return null;
}

export function heightScalingFigure(file: string, csv: string,
                                    summary: Summary): BuildOutcome {
    const rows = readSweepRows(file, csv);
    const fits = summary.results["fits"] as Record<string, unknown>;
    const series: Series[] = [];
    const annotations: string[] = [];
    const guides = [];

    const main = rows.filter((r) => r.quantity === "mean_height_mid");
    if (main.length >= 2) {
        series.push({
            label: "V = |x|",
            color: color(0),
            points: main.map((r) => [log10(r.lambda), log10(r.value)]),
        });
        annotations.push(`fitted slope = ${String(fitExponent(fits["linear"]))}`);
        const g = summary.results["guide_exponent"] as number;
        guides.push({ slope: g, label: `guide slope ${String(g)}`, color: "#888888" });
    }
    const ctrl = rows.filter((r) => r.quantity.startsWith("mean_height_mid[V="));
    if (ctrl.length >= 2 && fits["control"] !== undefined) {
        const label = ctrl[0].quantity.slice("mean_height_mid[".length, -1);
        series.push({
            label: `control ${label}`,
            color: color(1),
            points: ctrl.map((r) => [log10(r.lambda), log10(r.value)]),
        });
        annotations.push(`control slope = ${String(fitExponent(fits["control"]))}`);
    }
    if (series.length === 0) {
        return { figure: null, warnings: [`${file}: no mean_height_mid rows, figure skipped`] };
    }
    return {
        figure: {
            name: "height_scaling",
            title: "typical height vs tilt",
            xLabel: "log10 lambda",
            yLabel: "log10 E[X at N/2]",
            series, guides, annotations,
        },
        warnings: [],
    };
}

export function tailFigure(file: string, csv: string,
                           summary: Summary): BuildOutcome {
    const rows = readSweepRows(file, csv);
    const fits = (summary.results["fits"] ?? {}) as Record<string, unknown>;
    const series: Series[] = [];
    const annotations: string[] = [];
    const warnings: string[] = [];
    let idx = 0;
    for (const [lam, group] of groupByLambda(rows)) {
        const pts: Array<[number, number]> = [];
        for (const r of group) {
            const t = bracketCoord(r.quantity, "tail_prob");
            if (t === null || r.value <= 0 || r.value >= 1) continue;
            pts.push([log10(t), log10(-Math.log(r.value))]);
        }
        if (pts.length < 2) {
            warnings.push(`${file}: fewer than two usable tail points at lambda=${lam}, series dropped`);
            continue;
        }
        series.push({ label: `lambda = ${lam}`, color: color(idx), points: pts });
        for (const [key, fit] of Object.entries(fits)) {
            if (Number(key) === lam) {
                annotations.push(
                    `fitted exponent [lambda = ${lam}] = ${String(fitExponent(fit))}`);
            }
        }
        idx += 1;
    }
    if (series.length === 0) {
        warnings.push(`${file}: no usable series, figure skipped`);
        return { figure: null, warnings };
    }
    const g = (summary.results["guide_exponent"] ?? 1.5) as number;
    return {
        figure: {
            name: "tail_exponent",
            title: "stretched-exponential height tails",
            xLabel: "log10 T",
            yLabel: "log10(-log P(X > T H1))",
            series,
            guides: [{ slope: g, label: `guide slope ${String(g)}`, color: "#888888" }],
            annotations,
        },
        warnings,
    };
}

export function covarianceFigure(file: string, csv: string,
                                 summary: Summary): BuildOutcome {
    const rows = readSweepRows(file, csv);
    const series: Series[] = [];
    const annotations: string[] = [];
    const warnings: string[] = [];
    let idx = 0;
    for (const [lam, group] of groupByLambda(rows)) {
        const h2 = group[0].H * group[0].H;
        const pts: Array<[number, number]> = [];
        for (const r of group) {
            const rr = bracketCoord(r.quantity, "cov");
            if (rr === null || r.value <= 0) continue;
            pts.push([rr / h2, log10(r.value)]);
        }
        if (pts.length < 2) {
            warnings.push(`${file}: single covariance distance at lambda=${lam}, series dropped`);
            continue;
        }
        series.push({ label: `lambda = ${lam}`, color: color(idx), points: pts });
        const rec = summaryForLambda(summary, lam);
        if (rec && rec["rate_h2"] !== undefined) {
            annotations.push(
                `decay rate x H^2 [lambda = ${lam}] = ${String(rec["rate_h2"] as number)}`);
        }
        idx += 1;
    }
    if (series.length === 0) {
        warnings.push(`${file}: no multi-point covariance series, figure skipped`);
        return { figure: null, warnings };
    }
    return {
        figure: {
            name: "covariance_decay",
            title: "covariance decay along the bridge",
            xLabel: "r / H^2",
            yLabel: "log10 Cov(X_i, X_i+r)",
            series,
            guides: [],
            annotations,
        },
        warnings,
    };
}

export function tvFigure(file: string, csv: string,
                         summary: Summary): BuildOutcome {
    const rows = readTvRows(file, csv);
    const series: Series[] = [];
    const annotations: string[] = [];
    const warnings: string[] = [];
    const groups = new Map<number, Array<[number, number]>>();
    for (const r of rows) {
        const bucket = groups.get(r.lambda) ?? [];
        bucket.push([r.N, r.tv]);
        groups.set(r.lambda, bucket);
    }
    let idx = 0;
    for (const [lam, pts] of groups) {
        const rec = summaryForLambda(summary, lam);
        if (!rec) {
            warnings.push(`${file}: lambda=${lam} missing from summary, series dropped`);
            continue;
        }
        const h = rec["H"] as number;
        const h2 = h * h;
        const usable = pts.filter(([, tv]) => tv > 1e-15)
            .map(([n, tv]): [number, number] => [n / h2, log10(tv)]);
        if (usable.length < 2) {
            warnings.push(`${file}: not enough TV points at lambda=${lam}, series dropped`);
            continue;
        }
        series.push({ label: `lambda = ${lam}`, color: color(idx), points: usable });
        if (rec["rate_h2"] !== undefined) {
            annotations.push(
                `decay rate x H^2 [lambda = ${lam}] = ${String(rec["rate_h2"] as number)}`);
        }
        idx += 1;
    }
    if (series.length === 0) {
        warnings.push(`${file}: no usable series, figure skipped`);
        return { figure: null, warnings };
    }
    return {
        figure: {
            name: "tv_relaxation",
            title: "relaxation to the stationary law",
            xLabel: "N / H^2",
            yLabel: "log10 TV distance",
            series,
            guides: [],
            annotations,
        },
        warnings,
    };
}
