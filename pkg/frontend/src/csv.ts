import { SchemaMismatch } from "./errors.js";

/** Parse one prewet CSV: `#` metadata lines, then a bit-exact header, then
 *  numeric/string rows. The expected header is enforced column by column so
 *  a mismatch names the offending column. */
export function parseCsv(
    file: string,
    text: string,
    expectedHeader: string[],
): string[][] {
    const lines = text.split(/\r?\n/).filter((l) => l.length > 0 && !l.startsWith("#"));
    if (lines.length === 0) {
        throw new SchemaMismatch(file, expectedHeader[0], "file has no header row");
    }
    const header = lines[0].split(",");
    for (let i = 0; i < expectedHeader.length; i++) {
        if (header[i] !== expectedHeader[i]) {
            throw new SchemaMismatch(
                file,
                expectedHeader[i],
                `expected at position ${i}, found '${header[i] ?? "<missing>"}'`,
            );
        }
    }
    if (header.length !== expectedHeader.length) {
        throw new SchemaMismatch(file, header[expectedHeader.length],
            "unexpected extra column");
    }
    const rows: string[][] = [];
    for (const line of lines.slice(1)) {
        const cells = line.split(",");
        if (cells.length !== expectedHeader.length) {
            throw new SchemaMismatch(file, expectedHeader[0],
                `row has ${cells.length} cells, expected ${expectedHeader.length}`);
        }
        rows.push(cells);
    }
    return rows;
}

export function num(file: string, column: string, cell: string): number {
    const v = Number(cell);
    if (!Number.isFinite(v)) {
        throw new SchemaMismatch(file, column, `'${cell}' is not a finite number`);
    }
    return v;
}

export interface SweepRow {
    lambda: number;
    H: number;
    quantity: string;
    value: number;
    stderr: number;
}

export function readSweepRows(file: string, text: string): SweepRow[] {
    const rows = parseCsv(file, text, ["lambda", "H", "quantity", "value", "stderr"]);
    return rows.map((r) => ({
        lambda: num(file, "lambda", r[0]),
        H: num(file, "H", r[1]),
        quantity: r[2],
        value: num(file, "value", r[3]),
        stderr: num(file, "stderr", r[4]),
    }));
}

export interface TvRow {
    lambda: number;
    N: number;
    tv: number;
}

export function readTvRows(file: string, text: string): TvRow[] {
    const rows = parseCsv(file, text, ["lambda", "N", "tv"]);
    return rows.map((r) => ({
        lambda: num(file, "lambda", r[0]),
        N: num(file, "N", r[1]),
        tv: num(file, "tv", r[2]),
    }));
}

/** Pull the bracketed coordinate out of quantities like `tail_prob[T=2.5]`
 *  or `cov[r=63]`. Returns null when the quantity has a different stem. */
export function bracketCoord(quantity: string, stem: string): number | null {
    const m = quantity.match(/^([a-z_]+)\[[A-Za-z]+=(.+)\]$/);
    if (!m || m[1] !== stem) return null;
    const v = Number(m[2]);
    return Number.isFinite(v) ? v : null;
}
