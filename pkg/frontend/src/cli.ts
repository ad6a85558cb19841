#!/usr/bin/env node
import { Format, render } from "./render.js";

function usage(): never {
    console.error("usage: render --in DIR --out DIR [--format svg|png]");
    process.exit(1);
}

function main(argv: string[]): number {
    let inDir: string | null = null;
    let outDir: string | null = null;
    let format: Format = "both";
    for (let i = 0; i < argv.length; i++) {
        switch (argv[i]) {
            case "--in":
                inDir = argv[++i];
                break;
            case "--out":
                outDir = argv[++i];
                break;
            case "--format": {
                const v = argv[++i];
                if (v !== "svg" && v !== "png") usage();
                format = v;
                break;
            }
            default:
                usage();
        }
    }
    if (!inDir || !outDir) usage();
    try {
        const report = render(inDir, outDir, format);
        for (const w of report.warnings) console.warn(`warning: ${w}`);
        for (const f of report.written) console.log(`wrote ${f}`);
        return 0;
    } catch (err) {
        console.error(String(err));
        return 2;
    }
}

process.exit(main(process.argv.slice(2)));
