/**
 * Transcript entries and the session state machine.
 *
 * The state is immutable data transformed by pure functions so the
 * invariants (entry shape, request ordering, in-flight discipline,
 * reset-discards-in-flight) are directly testable without a DOM.
 */

import type { Cell, Target, TurnResponse } from "./api.js";

export interface ResultTable {
  columns: string[];
  rows: Cell[][];
}

export interface TranscriptEntry {
  role: "user" | "system";
  text: string;
  sql?: string;
  target?: Target;
  rows?: ResultTable;
  elapsedMs?: number;
  /** Failure details; `question` is kept so a network error can be retried. */
  error?: { stage: string; message: string; question: string; retryable: boolean };
}

export function userEntry(text: string): TranscriptEntry {
  return { role: "user", text };
}

/** System entry for a successful turn; strings are the server's, verbatim. */
export function answerEntry(response: TurnResponse): TranscriptEntry {
  return {
    role: "system",
    text: response.answer,
    sql: response.sql,
    target: response.target,
    rows: { columns: response.columns, rows: response.rows },
    elapsedMs: response.elapsed_ms,
  };
}

export function errorEntry(
  question: string,
  stage: string,
  message: string,
  retryable: boolean,
): TranscriptEntry {
  return {
    role: "system",
    text: message,
    error: { stage, message, question, retryable },
  };
}

/** A system entry announces a result (sql + target) or an error — never both. */
export function isValidEntry(entry: TranscriptEntry): boolean {
  if (entry.role === "user") {
    return entry.sql === undefined && entry.target === undefined && entry.error === undefined;
  }
  const hasResult = entry.sql !== undefined && entry.target !== undefined;
  const hasError = entry.error !== undefined;
  return hasResult !== hasError;
}

// ---------------------------------------------------------------------------
// session state

export interface SessionState {
  sessionId: string;
  transcript: TranscriptEntry[];
  inFlight: boolean;
  /** Bumped on reset so responses from before the reset are discarded. */
  generation: number;
}

export function newSession(sessionId: string): SessionState {
  return { sessionId, transcript: [], inFlight: false, generation: 0 };
}

export function canSend(state: SessionState, text: string): boolean {
  return !state.inFlight && text.trim().length > 0;
}

/** Append the user's question and mark the session busy. */
export function beginTurn(state: SessionState, question: string): SessionState {
  if (state.inFlight) {
    return state;
  }
  return {
    ...state,
    transcript: [...state.transcript, userEntry(question)],
    inFlight: true,
  };
}

/**
 * Append the system entry for a finished turn. A stale generation means the
 * session was reset while the request was in flight: the response is
 * discarded and the (already cleared) transcript is left alone.
 */
export function settleTurn(
  state: SessionState,
  generation: number,
  entry: TranscriptEntry,
): SessionState {
  if (generation !== state.generation) {
    return state;
  }
  return {
    ...state,
    transcript: [...state.transcript, entry],
    inFlight: false,
  };
}

export function resetSession(state: SessionState): SessionState {
  return {
    ...state,
    transcript: [],
    inFlight: false,
    generation: state.generation + 1,
  };
}
