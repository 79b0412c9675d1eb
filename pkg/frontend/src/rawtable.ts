/**
 * Reader for table responses that keeps numbers exactly as the service
 * serialized them.  JSON.parse would turn 1.0 into the JS number 1 and
 * render it as "1", silently reformatting what the server said; this
 * tokenizer hands the number lexeme through untouched so rendering and
 * CSV export stay display-identical to the wire.
 */

import { RawTable } from "./types.js";

class RawNumber {
  constructor(readonly lexeme: string) {}
}

type RawJson = string | boolean | null | RawNumber | RawJson[] | { [key: string]: RawJson };

class Reader {
  pos = 0;

  constructor(readonly text: string) {}

  fail(why: string): never {
    throw new Error(`bad JSON at offset ${this.pos}: ${why}`);
  }

  ws(): void {
    while (this.pos < this.text.length && " \t\n\r".includes(this.text[this.pos])) {
      this.pos++;
    }
  }

  peek(): string {
    if (this.pos >= this.text.length) {
      this.fail("unexpected end of input");
    }
    return this.text[this.pos];
  }

  literal(word: string, value: RawJson): RawJson {
    if (!this.text.startsWith(word, this.pos)) {
      this.fail(`expected ${word}`);
    }
    this.pos += word.length;
    return value;
  }

  string(): string {
    this.pos++; // opening quote
    let out = "";
    for (;;) {
      const c = this.peek();
      if (c === '"') {
        this.pos++;
        return out;
      }
      if (c === "\\") {
        this.pos++;
        const esc = this.peek();
        this.pos++;
        if (esc === "u") {
          const hex = this.text.slice(this.pos, this.pos + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) {
            this.fail("bad \\u escape");
          }
          this.pos += 4;
          out += String.fromCharCode(parseInt(hex, 16));
        } else {
          const simple: Record<string, string> = {
            '"': '"', "\\": "\\", "/": "/", b: "\b", f: "\f", n: "\n", r: "\r", t: "\t",
          };
          if (!(esc in simple)) {
            this.fail(`bad escape \\${esc}`);
          }
          out += simple[esc];
        }
      } else {
        out += c;
        this.pos++;
      }
    }
  }

  number(): RawNumber {
    const match = /^-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/.exec(this.text.slice(this.pos));
    if (!match) {
      this.fail("expected number");
    }
    this.pos += match[0].length;
    return new RawNumber(match[0]);
  }

  array(): RawJson[] {
    this.pos++; // '['
    const out: RawJson[] = [];
    this.ws();
    if (this.peek() === "]") {
      this.pos++;
      return out;
    }
    for (;;) {
      out.push(this.value());
      this.ws();
      const c = this.peek();
      this.pos++;
      if (c === "]") {
        return out;
      }
      if (c !== ",") {
        this.fail("expected , or ]");
      }
    }
  }

  object(): { [key: string]: RawJson } {
    this.pos++; // '{'
    const out: { [key: string]: RawJson } = {};
    this.ws();
    if (this.peek() === "}") {
      this.pos++;
      return out;
    }
    for (;;) {
      this.ws();
      if (this.peek() !== '"') {
        this.fail("expected object key");
      }
      const key = this.string();
      this.ws();
      if (this.peek() !== ":") {
        this.fail("expected :");
      }
      this.pos++;
      out[key] = this.value();
      this.ws();
      const c = this.peek();
      this.pos++;
      if (c === "}") {
        return out;
      }
      if (c !== ",") {
        this.fail("expected , or }");
      }
    }
  }

  value(): RawJson {
    this.ws();
    const c = this.peek();
    if (c === "{") return this.object();
    if (c === "[") return this.array();
    if (c === '"') return this.string();
    if (c === "t") return this.literal("true", true);
    if (c === "f") return this.literal("false", false);
    if (c === "n") return this.literal("null", null);
    return this.number();
  }
}

function cell(value: RawJson): string | null {
  if (value === null) {
    return null;
  }
  if (value instanceof RawNumber) {
    return value.lexeme;
  }
  if (typeof value === "string") {
    return value;
  }
  if (typeof value === "boolean") {
    return value ? "true" : "false";
  }
  throw new Error("table cells must be scalars");
}

/** Parse a {columns, rows} response body, preserving numeric lexemes. */
export function parseTableText(text: string): RawTable {
  const reader = new Reader(text);
  const root = reader.value();
  reader.ws();
  if (reader.pos !== text.length) {
    reader.fail("trailing content");
  }
  if (root === null || typeof root !== "object" || Array.isArray(root) || root instanceof RawNumber) {
    throw new Error("response is not an object");
  }
  const columnsRaw = root["columns"];
  const rowsRaw = root["rows"];
  if (!Array.isArray(columnsRaw) || !Array.isArray(rowsRaw)) {
    throw new Error("response lacks columns/rows");
  }
  const columns = columnsRaw.map((c) => {
    if (typeof c !== "string") {
      throw new Error("column names must be strings");
    }
    return c;
  });
  const rows = rowsRaw.map((row) => {
    if (!Array.isArray(row)) {
      throw new Error("rows must be arrays");
    }
    return row.map(cell);
  });
  return { columns, rows };
}
