/**
 * Client-side port of the language: tokenizer, parser, evaluator.
 *
 * Behavior tracks the engine byte for byte where it is observable —
 * diagnostics (line/col/message) and engine dumps are checked against
 * shared golden fixtures so the browser and the server never disagree
 * about what a buffer means.
 */

// --- arithmetic + AST -------------------------------------------------------

export type Arith =
  | { kind: "num"; value: number }
  | { kind: "var"; name: string }
  | { kind: "neg"; operand: Arith }
  | { kind: "bin"; op: "+" | "-" | "*" | "/"; left: Arith; right: Arith };

export interface SeqOperator {
  kind: "reverse" | "inverse" | "transpose";
  amount?: number;
}

export type Expr =
  | { kind: "source"; func: string; arg: string }
  | { kind: "seq"; elements: Arith[]; ops: SeqOperator[] }
  | { kind: "comp"; body: Arith; variable: string; domain: Arith[]; ops: SeqOperator[] };

export interface Statement {
  voice: string;
  param: string;
  rhs: Expr;
  line: number;
}

export interface Diagnostic {
  line: number;
  col: number;
  message: string;
}

export interface ParseOutcome {
  statements: Statement[];
  errors: Diagnostic[];
}

const KEYWORDS = new Set(["for", "in", "reverse", "inverse", "transpose"]);
const SOURCE_FUNCS = new Set(["youtube", "sample", "osc"]);
const PUNCT: Record<string, string> = {
  ".": "dot", "=": "equals", "[": "lbracket", "]": "rbracket", ",": "comma",
  "(": "lparen", ")": "rparen", "+": "plus", "-": "minus", "*": "star", "/": "slash",
};

interface Token {
  kind: string;
  text: string;
  col: number;
}

class LineError extends Error {
  constructor(public col: number, message: string) {
    super(message);
  }
}

function tokenizeLine(text: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  while (i < text.length) {
    const ch = text[i];
    if (ch === " " || ch === "\t" || ch === "\r") {
      i += 1;
      continue;
    }
    if (ch === "#") break;
    const col = i + 1;
    if (ch in PUNCT) {
      tokens.push({ kind: PUNCT[ch], text: ch, col });
      i += 1;
      continue;
    }
    if (ch === "'" || ch === '"') {
      const end = text.indexOf(ch, i + 1);
      if (end < 0) throw new LineError(col, "unterminated string literal");
      tokens.push({ kind: "string", text: text.slice(i + 1, end), col });
      i = end + 1;
      continue;
    }
    let m = /^\d+(?:\.\d+)?/.exec(text.slice(i));
    if (m) {
      tokens.push({ kind: "number", text: m[0], col });
      i += m[0].length;
      continue;
    }
    m = /^[A-Za-z_][A-Za-z0-9_]*/.exec(text.slice(i));
    if (m) {
      tokens.push({ kind: KEYWORDS.has(m[0]) ? "keyword" : "ident", text: m[0], col });
      i += m[0].length;
      continue;
    }
    throw new LineError(col, `illegal character '${ch}'`);
  }
  return tokens;
}

function joinExpected(items: string[]): string {
  const sorted = [...new Set(items)].sort();
  if (sorted.length === 1) return sorted[0];
  return sorted.slice(0, -1).join(", ") + " or " + sorted[sorted.length - 1];
}

class LineParser {
  private pos = 0;

  constructor(private tokens: Token[], private lineEnd: number) {}

  private peek(): Token | null {
    return this.pos < this.tokens.length ? this.tokens[this.pos] : null;
  }

  private next(): Token | null {
    const tok = this.peek();
    if (tok !== null) this.pos += 1;
    return tok;
  }

  private fail(expected: string[]): never {
    const tok = this.peek();
    const found = tok === null ? "end of line" : tok.kind === "string" ? "string" : `'${tok.text}'`;
    const col = tok === null ? this.lineEnd : tok.col;
    throw new LineError(col, `expected ${joinExpected(expected)}, found ${found}`);
  }

  private expect(kind: string, description: string): Token {
    const tok = this.peek();
    if (tok === null || tok.kind !== kind) this.fail([description]);
    return this.next()!;
  }

  private atPunct(kind: string): boolean {
    const tok = this.peek();
    return tok !== null && tok.kind === kind;
  }

  private atKeyword(word: string): boolean {
    const tok = this.peek();
    return tok !== null && tok.kind === "keyword" && tok.text === word;
  }

  statement(line: number): Statement {
    const voice = this.expect("ident", "identifier").text;
    this.expect("dot", "'.'");
    let param = this.expect("ident", "identifier").text;
    while (this.atPunct("dot")) {
      this.next();
      param += "." + this.expect("ident", "identifier").text;
    }
    this.expect("equals", "'='");
    const rhs = this.expr();
    if (this.peek() !== null) {
      this.fail(["'reverse'", "'inverse'", "'transpose'", "end of line"]);
    }
    return { voice, param, rhs, line };
  }

  private expr(): Expr {
    const tok = this.peek();
    if (tok !== null && tok.kind === "ident") {
      if (SOURCE_FUNCS.has(tok.text)) return this.sourceCall();
      this.fail(["source function (youtube, sample or osc)", "'['"]);
    }
    if (this.atPunct("lbracket")) return this.sequence();
    this.fail(["'['", "source function (youtube, sample or osc)"]);
  }

  private sourceCall(): Expr {
    const func = this.next()!.text;
    this.expect("lparen", "'('");
    const arg = this.expect("string", "string").text;
    this.expect("rparen", "')'");
    return { kind: "source", func, arg };
  }

  private sequence(): Expr {
    this.expect("lbracket", "'['");
    const first = this.arith();
    if (this.atKeyword("for")) {
      this.next();
      const variable = this.expect("ident", "identifier").text;
      if (!this.atKeyword("in")) this.fail(["'in'"]);
      this.next();
      this.expect("lbracket", "'['");
      const domain = [this.arith()];
      while (this.atPunct("comma")) {
        this.next();
        domain.push(this.arith());
      }
      this.expect("rbracket", "']'");
      this.expect("rbracket", "']'");
      return { kind: "comp", body: first, variable, domain, ops: this.opChain() };
    }
    const elements = [first];
    while (this.atPunct("comma")) {
      this.next();
      elements.push(this.arith());
    }
    if (!this.atPunct("rbracket")) this.fail(["','", "']'", "'for'"]);
    this.next();
    return { kind: "seq", elements, ops: this.opChain() };
  }

  private opChain(): SeqOperator[] {
    const ops: SeqOperator[] = [];
    for (;;) {
      const tok = this.peek();
      if (tok === null || tok.kind !== "keyword") return ops;
      if (tok.text === "reverse" || tok.text === "inverse") {
        this.next();
        ops.push({ kind: tok.text });
      } else if (tok.text === "transpose") {
        this.next();
        ops.push({ kind: "transpose", amount: this.signedNumber() });
      } else {
        return ops;
      }
    }
  }

  private signedNumber(): number {
    let sign = 1;
    if (this.atPunct("plus")) this.next();
    else if (this.atPunct("minus")) {
      this.next();
      sign = -1;
    }
    const tok = this.peek();
    if (tok === null || tok.kind !== "number") this.fail(["number"]);
    this.next();
    return sign * Number(tok!.text);
  }

  private arith(): Arith {
    let node = this.term();
    while (this.atPunct("plus") || this.atPunct("minus")) {
      const op = this.next()!.text as "+" | "-";
      node = { kind: "bin", op, left: node, right: this.term() };
    }
    return node;
  }

  private term(): Arith {
    let node = this.factor();
    while (this.atPunct("star") || this.atPunct("slash")) {
      const op = this.next()!.text as "*" | "/";
      node = { kind: "bin", op, left: node, right: this.factor() };
    }
    return node;
  }

  private factor(): Arith {
    const tok = this.peek();
    if (tok === null) this.fail(["number"]);
    if (tok!.kind === "number") {
      this.next();
      return { kind: "num", value: Number(tok!.text) };
    }
    if (tok!.kind === "ident") {
      this.next();
      return { kind: "var", name: tok!.text };
    }
    if (tok!.kind === "minus") {
      this.next();
      return { kind: "neg", operand: this.factor() };
    }
    if (tok!.kind === "lparen") {
      this.next();
      const node = this.arith();
      this.expect("rparen", "')'");
      return node;
    }
    this.fail(["number"]);
  }
}

export function parseProgram(source: string): ParseOutcome {
  const statements: Statement[] = [];
  const errors: Diagnostic[] = [];
  const lines = source.split("\n");
  for (let idx = 0; idx < lines.length; idx += 1) {
    const lineNo = idx + 1;
    let tokens: Token[];
    try {
      tokens = tokenizeLine(lines[idx]);
    } catch (err) {
      if (err instanceof LineError) {
        errors.push({ line: lineNo, col: err.col, message: err.message });
        continue;
      }
      throw err;
    }
    if (tokens.length === 0) continue;
    const last = tokens[tokens.length - 1];
    const parser = new LineParser(tokens, last.col + last.text.length);
    try {
      statements.push(parser.statement(lineNo));
    } catch (err) {
      if (err instanceof LineError) {
        errors.push({ line: lineNo, col: err.col, message: err.message });
        continue;
      }
      throw err;
    }
  }
  return { statements, errors };
}

// --- evaluation --------------------------------------------------------------

export class EvalFailure extends Error {
  constructor(message: string, public line = 0) {
    super(message);
  }
}

const WAVEFORMS = ["sine", "square", "saw", "triangle"];

const CLAMP_RANGES: Record<string, [number, number | null]> = {
  amp: [0, 1],
  gain: [0, 1],
  pan: [-1, 1],
  note: [0, 127],
  pos: [0, null],
};

export interface SourceDescriptor {
  kind: string;
  ref: string;
}

export interface Voice {
  source: SourceDescriptor | null;
  params: Record<string, number[]>;
}

export interface EngineMirror {
  tempo_bpm: number;
  voices: Record<string, Voice>;
}

export interface Warning {
  voice: string;
  param: string;
  message: string;
}

export interface EvalOutcome {
  state: EngineMirror;
  warnings: Warning[];
  errors: Diagnostic[];
}

export function emptyState(tempoBpm = 120): EngineMirror {
  return { tempo_bpm: tempoBpm, voices: {} };
}

function evalArith(expr: Arith, env: Record<string, number>): number {
  switch (expr.kind) {
    case "num":
      return expr.value;
    case "var":
      if (!(expr.name in env)) throw new EvalFailure(`unbound variable '${expr.name}'`);
      return env[expr.name];
    case "neg":
      return -evalArith(expr.operand, env);
    case "bin": {
      const left = evalArith(expr.left, env);
      const right = evalArith(expr.right, env);
      switch (expr.op) {
        case "+": return left + right;
        case "-": return left - right;
        case "*": return left * right;
        case "/":
          if (right === 0) throw new EvalFailure("division by zero");
          return left / right;
      }
    }
  }
}

function applyOperators(seq: number[], ops: SeqOperator[]): number[] {
  let out = seq;
  for (const op of ops) {
    if (op.kind === "reverse") out = [...out].reverse();
    else if (op.kind === "inverse") {
      out = out.length === 0 ? [] : out.map((x) => 2 * out[0] - x);
    } else out = out.map((x) => x + (op.amount ?? 0));
  }
  return out;
}

export function resolveExpr(rhs: Expr): number[] {
  if (rhs.kind === "source") throw new EvalFailure("not a sequence expression");
  if (rhs.kind === "seq") {
    return applyOperators(rhs.elements.map((e) => evalArith(e, {})), rhs.ops);
  }
  const domain = rhs.domain.map((e) => evalArith(e, {}));
  const mapped = domain.map((x, i) => {
    try {
      return evalArith(rhs.body, { [rhs.variable]: x });
    } catch (err) {
      if (err instanceof EvalFailure && err.message === "division by zero") {
        throw new EvalFailure(
          `division by zero at element ${i} (${rhs.variable} = ${String(x)})`,
        );
      }
      throw err;
    }
  });
  return applyOperators(mapped, rhs.ops);
}

function validateSource(func: string, arg: string): SourceDescriptor {
  if (func === "osc") {
    if (!WAVEFORMS.includes(arg)) {
      throw new EvalFailure(
        `unknown waveform '${arg}' (expected one of ${WAVEFORMS.join(", ")})`,
      );
    }
  } else if (func === "sample") {
    if (!arg) throw new EvalFailure("sample path must not be empty");
  } else {
    let ok = false;
    try {
      const url = new URL(arg);
      ok = (url.protocol === "http:" || url.protocol === "https:") && url.host !== "";
    } catch {
      ok = false;
    }
    if (!ok) throw new EvalFailure(`'${arg}' is not a valid http(s) URL`);
  }
  return { kind: func, ref: arg };
}

export function validateParam(
  name: string,
  seq: number[],
): { seq: number[]; warning: string | null } {
  if (name === "cdur") {
    if (seq.some((x) => x <= 0)) throw new EvalFailure("cdur requires positive durations");
    return { seq, warning: null };
  }
  const bounds = CLAMP_RANGES[name];
  if (!bounds) return { seq, warning: null };
  const [lo, hi] = bounds;
  const clamped = seq.map((x) => {
    if (x < lo) return lo;
    if (hi !== null && x > hi) return hi;
    return x;
  });
  const changed = clamped.some((x, i) => x !== seq[i]);
  if (!changed) return { seq: clamped, warning: null };
  const message =
    hi === null
      ? `${name} clamped to nonnegative`
      : `${name} clamped to [${lo},${hi}]`;
  return { seq: clamped, warning: message };
}

export function evalProgram(state: EngineMirror, statements: Statement[]): EvalOutcome {
  const voices: Record<string, Voice> = {};
  for (const [name, voice] of Object.entries(state.voices)) {
    voices[name] = { source: voice.source, params: { ...voice.params } };
  }
  const warnings: Warning[] = [];
  const errors: Diagnostic[] = [];
  for (const stmt of statements) {
    try {
      const voice = voices[stmt.voice] ?? { source: null, params: {} };
      if (stmt.rhs.kind === "source") {
        if (stmt.param !== "src") {
          throw new EvalFailure(
            `source call is only valid for parameter 'src', not '${stmt.param}'`,
          );
        }
        voices[stmt.voice] = {
          source: validateSource(stmt.rhs.func, stmt.rhs.arg),
          params: voice.params,
        };
      } else if (stmt.param === "src") {
        throw new EvalFailure("parameter 'src' requires a source call");
      } else {
        const { seq, warning } = validateParam(stmt.param, resolveExpr(stmt.rhs));
        if (warning !== null) {
          warnings.push({ voice: stmt.voice, param: stmt.param, message: warning });
        }
        voices[stmt.voice] = {
          source: voice.source,
          params: { ...voice.params, [stmt.param]: seq },
        };
      }
    } catch (err) {
      if (err instanceof EvalFailure) {
        errors.push({ line: stmt.line, col: 1, message: err.message });
        continue;
      }
      throw err;
    }
  }
  return { state: { tempo_bpm: state.tempo_bpm, voices }, warnings, errors };
}

/** Dump with the same shape and key order the engine serializes. */
export function dumpState(state: EngineMirror): Record<string, unknown> {
  const voices: Record<string, unknown> = {};
  for (const name of Object.keys(state.voices).sort()) {
    const voice = state.voices[name];
    const params: Record<string, number[]> = {};
    for (const param of Object.keys(voice.params).sort()) {
      params[param] = voice.params[param];
    }
    voices[name] = {
      source: voice.source === null ? null : { kind: voice.source.kind, ref: voice.source.ref },
      params,
    };
  }
  return { tempo_bpm: state.tempo_bpm, voices };
}

export function noteToFreq(note: number): number {
  return 440 * 2 ** ((note - 69) / 12);
}
