export class SchemaMismatch extends Error {
    readonly column: string;

    constructor(file: string, column: string, detail: string) {
        super(`${file}: column '${column}': ${detail}`);
        this.name = "SchemaMismatch";
        this.column = column;
    }
}
