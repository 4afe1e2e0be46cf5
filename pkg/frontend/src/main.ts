/**
 * Browser bootstrap: session in the URL, one API call per user action,
 * render only confirmed server state.
 */

import { ApiClient, ApiError, type AnswerValue, type TraceEvent } from "./api.js";
import {
  answerApplied,
  beliefLoaded,
  errorRaised,
  incrementsLoaded,
  initialState,
  sessionCreated,
  traceLoaded,
  type ConsultationState,
} from "./model.js";
import { renderHtml } from "./view.js";

const api = new ApiClient(window.location.origin);
let state: ConsultationState = initialState();

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.innerHTML = renderHtml(state);
  for (const button of root.querySelectorAll<HTMLButtonElement>(".item button")) {
    button.addEventListener("click", () => {
      const item = button.closest<HTMLElement>(".item")?.dataset.item;
      if (item) void answer(item, button.dataset.value as AnswerValue);
    });
  }
  root
    .querySelector<HTMLButtonElement>("#refresh-increments")
    ?.addEventListener("click", () => void refreshIncrements());
}

async function answer(item: string, value: AnswerValue): Promise<void> {
  if (!state.sessionId) return;
  try {
    state = answerApplied(state, await api.answer(state.sessionId, item, value));
  } catch (err) {
    // conflicts and rejections surface inline; the session state stays intact
    state = errorRaised(state, err instanceof ApiError ? err.message : String(err));
  }
  render();
}

async function refreshIncrements(): Promise<void> {
  if (!state.sessionId) return;
  try {
    state = incrementsLoaded(state, await api.increments(state.sessionId));
  } catch (err) {
    state = errorRaised(state, err instanceof ApiError ? err.message : String(err));
  }
  render();
}

/** Reduced question rebuilt from the trace: ids only, no numbers invented. */
function questionFromTrace(events: TraceEvent[]) {
  if (events.some((e) => e.event === "finished")) return null;
  const selected = [...events].reverse().find((e) => e.event === "selected");
  if (!selected) return null;
  const items = (selected.items as string[] | undefined) ?? [];
  return {
    hierarchy: String(selected.hierarchy),
    node: String(selected.node),
    max_increment: NaN,
    max_increment_str: "",
    items: items.map((id) => ({ id, prompt: id })),
  };
}

async function boot(): Promise<void> {
  const url = new URL(window.location.href);
  const existing = url.searchParams.get("session");
  try {
    if (existing) {
      // reload path: the session id is the only client-side state; rebuild
      // the whole view from the read endpoints
      state = { ...initialState(), sessionId: existing, status: "active" };
      state = beliefLoaded(state, await api.belief(existing));
      state = incrementsLoaded(state, await api.increments(existing));
      const trace = await api.trace(existing);
      state = traceLoaded(state, trace.events);
      state = { ...state, question: questionFromTrace(trace.events) };
    } else {
      state = sessionCreated(state, await api.createSession());
      const sid = state.sessionId;
      if (sid) {
        url.searchParams.set("session", sid);
        window.history.replaceState(null, "", url.toString());
        state = incrementsLoaded(state, await api.increments(sid));
        state = beliefLoaded(state, await api.belief(sid));
      }
    }
  } catch (err) {
    state = errorRaised(state, err instanceof ApiError ? err.message : String(err));
  }
  render();
}

void boot();
