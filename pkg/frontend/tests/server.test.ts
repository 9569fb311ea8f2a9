import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { dumpState, emptyState, evalProgram, parseProgram } from "../src/lang.js";
import { LiveClient, LiveServer, sleep } from "./harness.js";

let server: LiveServer;

beforeAll(async () => {
  server = await LiveServer.start();
}, 30000);

afterAll(() => {
  server.stop();
});

async function drain(clients: LiveClient[]): Promise<void> {
  for (const client of clients) await client.waitIdle();
  // let trailing broadcasts land
  await sleep(150);
}

describe("two clients against the live server", () => {
  it("welcome synchronizes doc and version", async () => {
    const a = new LiveClient(server.port, "ada");
    await a.welcomed;
    const serverDoc = (await server.fetchJson("/doc")) as { doc: string; version: number };
    expect(a.core.doc).toBe(serverDoc.doc);
    expect(a.core.version).toBe(serverDoc.version);
    a.close();
  });

  it("concurrent typing converges", async () => {
    const a = new LiveClient(server.port, "ada");
    const b = new LiveClient(server.port, "bob");
    await a.welcomed;
    await b.welcomed;

    // interleaved bursts of typing from both sides
    const lineA = "lead.src = osc('sine')\nlead.note = [60, 64, 67]\n";
    const lineB = "bass.src = osc('saw')\nbass.note = [36]\n";
    for (let i = 0; i < lineA.length; i += 4) {
      a.core.setText(a.core.doc + lineA.slice(i, i + 4));
      if (i % 8 === 0) await sleep(5);
    }
    for (let i = 0; i < lineB.length; i += 3) {
      b.core.setText(b.core.doc + lineB.slice(i, i + 3));
      if (i % 9 === 0) await sleep(5);
    }
    await drain([a, b]);

    const serverDoc = (await server.fetchJson("/doc")) as { doc: string };
    expect(a.core.doc).toBe(b.core.doc);
    expect(a.core.doc).toBe(serverDoc.doc);
    // both full statements survived the merge, whatever the interleaving
    expect(a.core.doc).toContain("lead.src = osc('sine')");
    expect(a.core.doc).toContain("bass.note = [36]");
    a.close();
    b.close();
  });

  it("remote op rebases local typing without losing it", async () => {
    const a = new LiveClient(server.port, "ada");
    const b = new LiveClient(server.port, "bob");
    await a.welcomed;
    await b.welcomed;
    const base = a.core.doc;
    a.core.setText(base + "one.amp = [0.1]\n");
    b.core.setText(base + "two.amp = [0.2]\n");
    await drain([a, b]);
    expect(a.core.doc).toBe(b.core.doc);
    expect(a.core.doc).toContain("one.amp = [0.1]");
    expect(a.core.doc).toContain("two.amp = [0.2]");
    a.close();
    b.close();
  });

  it("eval yields identical dumps client-side and server-side", async () => {
    const a = new LiveClient(server.port, "ada");
    const b = new LiveClient(server.port, "bob");
    await a.welcomed;
    await b.welcomed;

    a.core.setText("mix.src = osc('triangle')\nmix.note = [60, 67]\nmix.gain = [0.8]\n");
    await drain([a, b]);
    a.core.requestEval();
    while (a.evals.length === 0 || b.evals.length === 0) await sleep(10);

    expect(a.evals.at(-1)!.errors).toEqual([]);
    expect(b.evals.at(-1)!.errors).toEqual([]);

    // each client evaluates its own mirror, the server reports via /dump
    const dumps = [a, b].map((client) => {
      const parsed = parseProgram(client.core.doc);
      expect(parsed.errors).toEqual([]);
      return dumpState(evalProgram(emptyState(), parsed.statements).state);
    });
    const serverDump = await server.fetchJson("/dump");
    expect(dumps[0]).toEqual(serverDump);
    expect(dumps[1]).toEqual(serverDump);
    a.close();
    b.close();
  });

  it("eval of a broken buffer reports errors and keeps engines untouched", async () => {
    const a = new LiveClient(server.port, "ada");
    await a.welcomed;
    const before = (await server.fetchJson("/dump")) as object;
    a.core.setText(a.core.doc + "oops.pos = [1,\n");
    await drain([a]);
    a.core.requestEval();
    while (a.evals.length === 0) await sleep(10);
    const notice = a.evals.at(-1)!;
    expect(notice.errors.length).toBeGreaterThan(0);
    expect(await server.fetchJson("/dump")).toEqual(before);
    // repair the buffer so later tests start clean
    a.core.setText(a.core.doc.replace("oops.pos = [1,\n", ""));
    await drain([a]);
    a.close();
  });

  it("reconnect resynchronizes from a fresh welcome", async () => {
    const a = new LiveClient(server.port, "ada");
    await a.welcomed;
    a.core.setText(a.core.doc + "re.amp = [0.5]\n");
    await drain([a]);
    const doc = a.core.doc;
    a.close();

    const again = new LiveClient(server.port, "ada-again");
    await again.welcomed;
    expect(again.core.doc).toBe(doc);
    again.close();
  });
});
