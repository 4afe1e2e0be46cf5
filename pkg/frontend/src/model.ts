/**
 * Consultation view state: a pure reducer over API responses.
 *
 * The model stores server payloads as delivered and derives nothing numeric
 * from them. Switch-timeline entries pair the previously shown question's
 * hierarchy with the new one whenever the server flags a switch; on reload
 * the timeline is rebuilt from the trace endpoint instead.
 */

import type {
  AnswerResponse,
  BeliefReport,
  IncrementReport,
  Question,
  SessionCreated,
  TraceEvent,
} from "./api.js";

export interface SwitchEntry {
  step: number;
  from: string;
  to: string;
}

export interface ConsultationState {
  sessionId: string | null;
  kb: string | null;
  status: "idle" | "active" | "finished";
  question: Question | null;
  belief: BeliefReport | null;
  increments: IncrementReport | null;
  switches: SwitchEntry[];
  answers: number;
  error: string | null;
}

export function initialState(): ConsultationState {
  return {
    sessionId: null,
    kb: null,
    status: "idle",
    question: null,
    belief: null,
    increments: null,
    switches: [],
    answers: 0,
    error: null,
  };
}

export function sessionCreated(
  state: ConsultationState,
  payload: SessionCreated,
): ConsultationState {
  return {
    ...initialState(),
    sessionId: payload.session_id,
    kb: payload.kb,
    status: payload.status === "finished" ? "finished" : "active",
    question: payload.question,
  };
}

export function answerApplied(
  state: ConsultationState,
  payload: AnswerResponse,
): ConsultationState {
  const switches = [...state.switches];
  if (payload.switched && state.question && payload.question) {
    switches.push({
      step: payload.belief.answers,
      from: state.question.hierarchy,
      to: payload.question.hierarchy,
    });
  }
  return {
    ...state,
    status: payload.status === "finished" ? "finished" : "active",
    question: payload.question,
    belief: payload.belief,
    switches,
    answers: payload.belief.answers,
    error: null,
  };
}

export function beliefLoaded(
  state: ConsultationState,
  payload: BeliefReport,
): ConsultationState {
  return {
    ...state,
    status: payload.status === "finished" ? "finished" : "active",
    belief: payload,
    answers: payload.answers,
  };
}

export function incrementsLoaded(
  state: ConsultationState,
  payload: IncrementReport,
): ConsultationState {
  return { ...state, increments: payload };
}

/** Rebuild the switch timeline and current question from a session trace. */
export function traceLoaded(
  state: ConsultationState,
  events: TraceEvent[],
): ConsultationState {
  const switches: SwitchEntry[] = [];
  for (const event of events) {
    if (event.event === "switched") {
      switches.push({
        step: event.step,
        from: String(event.from),
        to: String(event.to),
      });
    }
  }
  return { ...state, switches };
}

/** 409/422 responses surface inline and must not lose session state. */
export function errorRaised(state: ConsultationState, message: string): ConsultationState {
  return { ...state, error: message };
}

export function errorCleared(state: ConsultationState): ConsultationState {
  return { ...state, error: null };
}

/** The item the answer buttons act on: first unanswered item of the node. */
export function currentItem(state: ConsultationState) {
  return state.question?.items[0] ?? null;
}
