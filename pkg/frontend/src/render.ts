import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import {
    BuildOutcome,
    covarianceFigure,
    heightScalingFigure,
    Summary,
    tailFigure,
    tvFigure,
} from "./figures.js";
import { encodePng, rasterize } from "./png.js";
import { layout } from "./scene.js";
import { toSvg } from "./svg.js";

export type Format = "svg" | "png" | "both";

export interface RenderReport {
    written: string[];
    warnings: string[];
}

interface Experiment {
    name: string;
    csv: string;
    build: (file: string, csv: string, summary: Summary) => BuildOutcome;
}

const EXPERIMENTS: Experiment[] = [
    { name: "scaling", csv: "scaling.csv", build: heightScalingFigure },
    { name: "tails", csv: "tails.csv", build: tailFigure },
    { name: "correlations", csv: "correlations.csv", build: covarianceFigure },
    { name: "relaxation", csv: "tv.csv", build: tvFigure },
];

function locate(root: string, exp: Experiment): { csv: string; summary: string } | null {
    for (const base of [join(root, exp.name), root]) {
        const csv = join(base, exp.csv);
        const summary = join(base, "summary.json");
        if (existsSync(csv) && existsSync(summary)) return { csv, summary };
    }
    return null;
}

/** Render every recognized experiment output under `inDir` into figure
 *  files. Missing experiments are skipped; an empty directory is a no-op
 *  with a warning. Rendering is read-only and deterministic. */
export function render(inDir: string, outDir: string,
                       format: Format = "both"): RenderReport {
    const report: RenderReport = { written: [], warnings: [] };
    let found = 0;
    for (const exp of EXPERIMENTS) {
        const loc = locate(inDir, exp);
        if (!loc) continue;
        found += 1;
        const summary = JSON.parse(readFileSync(loc.summary, "utf8")) as Summary;
        const outcome = exp.build(loc.csv, readFileSync(loc.csv, "utf8"), summary);
        report.warnings.push(...outcome.warnings);
        if (!outcome.figure) continue;
        mkdirSync(outDir, { recursive: true });
        const prims = layout(outcome.figure);
        if (format !== "png") {
            const path = join(outDir, `${outcome.figure.name}.svg`);
            writeFileSync(path, toSvg(prims));
            report.written.push(path);
        }
        if (format !== "svg") {
            const path = join(outDir, `${outcome.figure.name}.png`);
            writeFileSync(path, encodePng(rasterize(prims)));
            report.written.push(path);
        }
    }
    if (found === 0) {
        report.warnings.push(`no experiment outputs found under ${inDir}; nothing to do`);
    }
    return report;
}
