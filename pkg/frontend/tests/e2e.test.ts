/**
 * End-to-end: drive the committed switching script through the UI state
 * machine against a live server, reproduce the CLI golden trace, and audit
 * that every rendered numeric string came verbatim from an API payload.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type AnswerValue, type TraceEvent } from "../src/api.js";
import {
  answerApplied,
  incrementsLoaded,
  initialState,
  sessionCreated,
  traceLoaded,
  type ConsultationState,
} from "../src/model.js";
import { displayModel, renderedStrings } from "../src/view.js";

const ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

const script: { item: string; value: AnswerValue }[] = JSON.parse(
  readFileSync(resolve(ROOT, "fixtures", "switching_demo.script.json"), "utf-8"),
);
const goldenTrace: TraceEvent[] = readFileSync(
  resolve(ROOT, "fixtures", "golden", "switching_demo.trace.jsonl"),
  "utf-8",
)
  .trim()
  .split("\n")
  .map((line) => JSON.parse(line));
const goldenReport = JSON.parse(
  readFileSync(
    resolve(ROOT, "fixtures", "golden", "switching_demo.report.json"),
    "utf-8",
  ),
);

let base: string;

beforeAll(() => {
  base = process.env.IBIG_E2E_BASE ?? "http://127.0.0.1:8977";
});

describe("manual drive of the switching fixture", () => {
  it("reproduces the CLI golden trace and leaks no client-computed numbers", async () => {
    const api = new ApiClient(base);
    let state: ConsultationState = sessionCreated(
      initialState(),
      await api.createSession(),
    );
    const sessionId = state.sessionId!;
    const rendered = new Set<string>(renderedStrings(state));

    for (const entry of script) {
      // the console answers the question being asked: the scripted item must
      // be exactly the top unanswered item of the current selection
      expect(state.question?.items[0]?.id).toBe(entry.item);
      state = answerApplied(state, await api.answer(sessionId, entry.item, entry.value));
      state = incrementsLoaded(state, await api.increments(sessionId));
      if (state.status === "active") {
        // argmax consistency: the leaderboard top entry is the question asked
        const dm = displayModel(state);
        expect(`${dm.leaderboard[0].hierarchy}/${dm.leaderboard[0].node}`).toBe(
          `${state.question!.hierarchy}/${state.question!.node}`,
        );
      }
      for (const s of renderedStrings(state)) rendered.add(s);
    }
    expect(state.status).toBe("finished");

    // the server-side trace equals the committed CLI golden trace
    const trace = await api.trace(sessionId);
    expect(trace.events).toEqual(goldenTrace);

    // the answer -> switch sequence observed in the UI equals the golden one
    const goldenAnswered = goldenTrace
      .filter((e) => e.event === "answered")
      .map((e) => ({ item: e.item, value: e.value }));
    expect(goldenAnswered).toEqual(script);
    const goldenSwitches = goldenTrace
      .filter((e) => e.event === "switched")
      .map((e) => ({ step: e.step, from: e.from, to: e.to }));
    expect(state.switches).toEqual(goldenSwitches);
    expect(state.switches.length).toBeGreaterThanOrEqual(1);

    // the final belief view equals the golden report and GET /belief
    const beliefNow = await api.belief(sessionId);
    expect(beliefNow).toEqual(goldenReport);
    expect(state.belief).toEqual(goldenReport);

    // pass-through integrity: every numeric string the UI rendered appears
    // verbatim in some raw response body
    const corpus = api.rawBodies.join("\n");
    const numeric = [...rendered].filter((s) => /^-?(\d+\.?\d*|\.\d+)(e-?\d+)?$/i.test(s));
    expect(numeric.length).toBeGreaterThan(10);
    for (const value of numeric) {
      expect(corpus, `rendered number ${value} missing from payloads`).toContain(value);
    }
  });

  it("reconstructs the view from the read endpoints after a reload", async () => {
    const api = new ApiClient(base);
    const created = await api.createSession();
    const sessionId = created.session_id;
    let live = sessionCreated(initialState(), created);
    for (const entry of script.slice(0, 2)) {
      live = answerApplied(live, await api.answer(sessionId, entry.item, entry.value));
    }

    // a fresh client knowing only the session id rebuilds the same view
    const reloaded = new ApiClient(base);
    let state = { ...initialState(), sessionId } as ConsultationState;
    const belief = await reloaded.belief(sessionId);
    state = { ...state, belief, status: belief.status as "active", answers: belief.answers };
    state = incrementsLoaded(state, await reloaded.increments(sessionId));
    state = traceLoaded(state, (await reloaded.trace(sessionId)).events);

    expect(state.switches).toEqual(live.switches);
    expect(state.belief).toEqual(live.belief);
    expect(state.answers).toBe(2);
  });

  it("surfaces conflicts inline without losing the session", async () => {
    const api = new ApiClient(base);
    let state = sessionCreated(initialState(), await api.createSession());
    const sessionId = state.sessionId!;
    state = answerApplied(state, await api.answer(sessionId, script[0].item, "present"));
    await expect(api.answer(sessionId, script[0].item, "present")).rejects.toMatchObject({
      status: 409,
    });
    // the state machine is untouched by the rejected call
    expect(state.answers).toBe(1);
    expect(state.question).not.toBeNull();
  });

  it("advances without belief change on an unknown answer", async () => {
    const api = new ApiClient(base);
    let state = sessionCreated(initialState(), await api.createSession());
    const sessionId = state.sessionId!;
    const masses = (report: Awaited<ReturnType<typeof api.belief>>) =>
      report.hierarchies.map((h) => ({
        hierarchy: h.hierarchy,
        rows: h.rows.map((r) => [r.node, r.mass_str, r.belief_str]),
      }));
    const before = await api.belief(sessionId);
    const firstItem = state.question!.items[0].id;
    state = answerApplied(state, await api.answer(sessionId, firstItem, "unknown"));
    expect(state.question?.items[0]?.id).not.toBe(firstItem);
    const after = await api.belief(sessionId);
    expect(masses(after)).toEqual(masses(before));
  });
});
