/**
 * JSON parsing that remembers the source text of every primitive.
 *
 * Numbers re-serialized through `JSON.parse` + `String(...)` can change
 * spelling (exponent thresholds differ between emitters), so anything the UI
 * displays is taken verbatim from the response body via the raw map. Paths
 * use dots for object keys and [i] for array indices, e.g.
 * "comparators.schoenfeld_n" or "points[3].power".
 */

export interface RawDocument {
  value: unknown;
  /** JSON path -> exact source slice for primitives. */
  raw: Map<string, string>;
}

class Parser {
  private pos = 0;
  readonly raw = new Map<string, string>();

  constructor(private readonly text: string) {}

  parse(): unknown {
    const value = this.parseValue("");
    this.skipWs();
    if (this.pos !== this.text.length) {
      throw new SyntaxError(`trailing characters at offset ${this.pos}`);
    }
    return value;
  }

  private skipWs(): void {
    while (this.pos < this.text.length && " \t\n\r".includes(this.text[this.pos] as string)) {
      this.pos++;
    }
  }

  private fail(what: string): never {
    throw new SyntaxError(`expected ${what} at offset ${this.pos}`);
  }

  private parseValue(path: string): unknown {
    this.skipWs();
    const ch = this.text[this.pos];
    if (ch === "{") return this.parseObject(path);
    if (ch === "[") return this.parseArray(path);
    if (ch === '"') {
      const start = this.pos;
      const s = this.parseString();
      this.raw.set(path, this.text.slice(start, this.pos));
      return s;
    }
    const start = this.pos;
    if (this.text.startsWith("true", this.pos)) {
      this.pos += 4;
      this.raw.set(path, "true");
      return true;
    }
    if (this.text.startsWith("false", this.pos)) {
      this.pos += 5;
      this.raw.set(path, "false");
      return false;
    }
    if (this.text.startsWith("null", this.pos)) {
      this.pos += 4;
      this.raw.set(path, "null");
      return null;
    }
    const m = /^-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/.exec(
      this.text.slice(this.pos),
    );
    if (!m) this.fail("a JSON value");
    this.pos += m[0].length;
    this.raw.set(path, this.text.slice(start, this.pos));
    return Number(m[0]);
  }

  private parseString(): string {
    // delegate unescaping to the platform parser on the exact slice
    const start = this.pos;
    this.pos++; // opening quote
    while (this.pos < this.text.length) {
      const ch = this.text[this.pos];
      if (ch === "\\") this.pos += 2;
      else if (ch === '"') {
        this.pos++;
        return JSON.parse(this.text.slice(start, this.pos)) as string;
      } else this.pos++;
    }
    this.fail("closing quote");
  }

  private parseObject(path: string): Record<string, unknown> {
    const out: Record<string, unknown> = {};
    this.pos++; // {
    this.skipWs();
    if (this.text[this.pos] === "}") {
      this.pos++;
      return out;
    }
    for (;;) {
      this.skipWs();
      if (this.text[this.pos] !== '"') this.fail("an object key");
      const key = this.parseString();
      this.skipWs();
      if (this.text[this.pos] !== ":") this.fail("':'");
      this.pos++;
      out[key] = this.parseValue(path ? `${path}.${key}` : key);
      this.skipWs();
      if (this.text[this.pos] === ",") {
        this.pos++;
        continue;
      }
      if (this.text[this.pos] === "}") {
        this.pos++;
        return out;
      }
      this.fail("',' or '}'");
    }
  }

  private parseArray(path: string): unknown[] {
    const out: unknown[] = [];
    this.pos++; // [
    this.skipWs();
    if (this.text[this.pos] === "]") {
      this.pos++;
      return out;
    }
    for (;;) {
      out.push(this.parseValue(`${path}[${out.length}]`));
      this.skipWs();
      if (this.text[this.pos] === ",") {
        this.pos++;
        continue;
      }
      if (this.text[this.pos] === "]") {
        this.pos++;
        return out;
      }
      this.fail("',' or ']'");
    }
  }
}

export function parseWithRaw(text: string): RawDocument {
  const parser = new Parser(text);
  return { value: parser.parse(), raw: parser.raw };
}
