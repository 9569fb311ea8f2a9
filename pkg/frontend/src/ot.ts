/**
 * Operational-transformation core over the shared code buffer.
 *
 * A component is a retain (positive int), delete (negative int), or
 * insert (string); an op is a run of components covering the whole
 * document. Mirrors the server's semantics exactly, including the
 * client-id tie-break: concurrent inserts at one position land in
 * lexicographic client-id order.
 */

export type Component = number | string;

export class SpanMismatch extends Error {}

export function normalize(components: Component[]): Component[] {
  const out: Component[] = [];
  for (const comp of components) {
    if (typeof comp === "string") {
      if (comp.length === 0) continue;
      const last = out[out.length - 1];
      if (typeof last === "string") {
        out[out.length - 1] = last + comp;
        continue;
      }
    } else {
      if (comp === 0) continue;
      if (!Number.isInteger(comp)) throw new TypeError(`bad component: ${comp}`);
      const last = out[out.length - 1];
      if (typeof last === "number" && last > 0 === comp > 0) {
        out[out.length - 1] = last + comp;
        continue;
      }
    }
    out.push(comp);
  }
  return out;
}

export function consumedLength(components: Component[]): number {
  let n = 0;
  for (const comp of components) {
    if (typeof comp === "number") n += Math.abs(comp);
  }
  return n;
}

export function applyComponents(doc: string, components: Component[]): string {
  if (consumedLength(components) !== doc.length) {
    throw new SpanMismatch(
      `op covers ${consumedLength(components)} chars, document has ${doc.length}`,
    );
  }
  let out = "";
  let pos = 0;
  for (const comp of components) {
    if (typeof comp === "string") {
      out += comp;
    } else if (comp > 0) {
      out += doc.slice(pos, pos + comp);
      pos += comp;
    } else {
      pos += -comp;
    }
  }
  return out;
}

function push(out: Component[], comp: Component): void {
  if (comp === 0 || comp === "") return;
  const last = out[out.length - 1];
  if (typeof comp === "string") {
    if (typeof last === "string") {
      out[out.length - 1] = last + comp;
      return;
    }
  } else if (typeof last === "number" && last > 0 === comp > 0) {
    out[out.length - 1] = last + comp;
    return;
  }
  out.push(comp);
}

/** Rewrite two concurrent ops so either application order converges. */
export function transformComponents(
  compsA: Component[],
  compsB: Component[],
  aFirst: boolean,
): [Component[], Component[]] {
  const outA: Component[] = []; // a rebased to apply after b
  const outB: Component[] = []; // b rebased to apply after a
  let ia = 0;
  let ib = 0;
  let ca: Component | null = compsA.length ? compsA[0] : null;
  let cb: Component | null = compsB.length ? compsB[0] : null;

  while (ca !== null || cb !== null) {
    if (typeof ca === "string" && (aFirst || typeof cb !== "string")) {
      push(outA, ca);
      push(outB, ca.length);
      ia += 1;
      ca = ia < compsA.length ? compsA[ia] : null;
      continue;
    }
    if (typeof cb === "string") {
      push(outA, cb.length);
      push(outB, cb);
      ib += 1;
      cb = ib < compsB.length ? compsB[ib] : null;
      continue;
    }
    if (ca === null || cb === null) {
      throw new SpanMismatch("ops cover different document lengths");
    }
    const n = Math.min(Math.abs(ca as number), Math.abs(cb as number));
    const da = ca as number;
    const db = cb as number;
    if (da > 0 && db > 0) {
      push(outA, n);
      push(outB, n);
    } else if (da < 0 && db > 0) {
      push(outA, -n); // b kept them, a still deletes
    } else if (da > 0 && db < 0) {
      push(outB, -n); // a kept them, b still deletes
    }
    // both deleting the same range: nothing left for either
    ca = da > 0 ? da - n : da + n;
    cb = db > 0 ? db - n : db + n;
    if (ca === 0) {
      ia += 1;
      ca = ia < compsA.length ? compsA[ia] : null;
    }
    if (cb === 0) {
      ib += 1;
      cb = ib < compsB.length ? compsB[ib] : null;
    }
  }
  return [outA, outB];
}

export type WireComponent = ["r", number] | ["i", string] | ["d", number];

export function toWire(components: Component[]): WireComponent[] {
  return components.map((comp): WireComponent => {
    if (typeof comp === "string") return ["i", comp];
    return comp > 0 ? ["r", comp] : ["d", -comp];
  });
}

export function fromWire(items: WireComponent[]): Component[] {
  return normalize(
    items.map(([tag, arg]) => {
      if (tag === "i") return arg as string;
      return tag === "r" ? (arg as number) : -(arg as number);
    }),
  );
}

/** Minimal edit turning `before` into `after`: common prefix/suffix diff. */
export function textDiff(before: string, after: string): Component[] | null {
  if (before === after) return null;
  let prefix = 0;
  const max = Math.min(before.length, after.length);
  while (prefix < max && before[prefix] === after[prefix]) prefix += 1;
  let suffix = 0;
  while (
    suffix < max - prefix &&
    before[before.length - 1 - suffix] === after[after.length - 1 - suffix]
  ) {
    suffix += 1;
  }
  const removed = before.length - prefix - suffix;
  const inserted = after.slice(prefix, after.length - suffix);
  const components: Component[] = [prefix];
  if (removed > 0) components.push(-removed);
  if (inserted.length > 0) components.push(inserted);
  components.push(suffix);
  return normalize(components);
}
