/**
 * Wiring: one chat form + transcript + schema side panel against the API.
 *
 * Concurrency rule: one in-flight request per session. The send button is
 * disabled while a turn is awaited, and a reset during an in-flight turn
 * discards that turn's response (generation check in the state machine).
 */

import { ApiClient, ApiError } from "./api.js";
import {
  SessionState,
  answerEntry,
  beginTurn,
  canSend,
  errorEntry,
  newSession,
  resetSession,
  settleTurn,
} from "./transcript.js";
import { renderSchema, renderTranscript } from "./view.js";

export interface AppOptions {
  api: ApiClient;
  sessionId: string;
}

export interface AppController {
  readonly state: SessionState;
  /** Resolves when the most recently started request settles. */
  readonly idle: Promise<void>;
  send(question: string): Promise<void>;
  reset(): Promise<void>;
  refreshSchema(): Promise<void>;
}

export function initApp(root: HTMLElement, options: AppOptions): AppController {
  const doc = root.ownerDocument;
  const { api } = options;
  let state = newSession(options.sessionId);
  let lastRequest: Promise<void> = Promise.resolve();

  root.replaceChildren();
  const layout = doc.createElement("div");
  layout.className = "layout";

  const chat = doc.createElement("section");
  chat.className = "chat";
  const transcriptBox = doc.createElement("div");
  transcriptBox.className = "transcript";
  const notice = doc.createElement("p");
  notice.className = "notice";
  notice.hidden = true;
  const form = doc.createElement("form");
  form.className = "ask";
  const input = doc.createElement("input");
  input.type = "text";
  input.placeholder = "ask a question about the data";
  input.setAttribute("aria-label", "question");
  const send = doc.createElement("button");
  send.type = "submit";
  send.className = "send";
  send.textContent = "send";
  const reset = doc.createElement("button");
  reset.type = "button";
  reset.className = "reset";
  reset.textContent = "reset";
  form.append(input, send, reset);
  chat.append(transcriptBox, notice, form);

  const schemaPanel = doc.createElement("aside");
  schemaPanel.className = "schema";
  const schemaBody = doc.createElement("div");
  schemaBody.className = "schema-body";
  const schemaRefresh = doc.createElement("button");
  schemaRefresh.type = "button";
  schemaRefresh.className = "schema-refresh";
  schemaRefresh.textContent = "refresh schema";
  schemaPanel.append(schemaBody, schemaRefresh);

  layout.append(chat, schemaPanel);
  root.appendChild(layout);

  function showNotice(text: string): void {
    notice.textContent = text;
    notice.hidden = false;
  }

  function clearNotice(): void {
    notice.textContent = "";
    notice.hidden = true;
  }

  function redraw(): void {
    renderTranscript(doc, transcriptBox, state.transcript);
    send.disabled = state.inFlight;
    transcriptBox.scrollTop = transcriptBox.scrollHeight;
    // retry buttons resend the question that failed
    for (const button of transcriptBox.querySelectorAll<HTMLButtonElement>("button.retry")) {
      const bubble = button.closest(".entry");
      const index = bubble ? Array.from(transcriptBox.children).indexOf(bubble) : -1;
      const entry = index >= 0 ? state.transcript[index] : undefined;
      if (entry?.error?.retryable) {
        const question = entry.error.question;
        button.addEventListener("click", () => {
          void sendQuestion(question);
        });
      }
    }
  }

  async function sendQuestion(question: string): Promise<void> {
    if (!canSend(state, question)) {
      return;
    }
    clearNotice();
    state = beginTurn(state, question);
    const generation = state.generation;
    redraw();
    const request = (async () => {
      try {
        const response = await api.turn(state.sessionId, question);
        state = settleTurn(state, generation, answerEntry(response));
      } catch (failure) {
        const apiError =
          failure instanceof ApiError
            ? failure
            : new ApiError("network", String(failure));
        state = settleTurn(
          state,
          generation,
          errorEntry(question, apiError.stage ?? apiError.kind, apiError.message, apiError.retryable),
        );
      }
      redraw();
    })();
    lastRequest = request;
    await request;
  }

  async function doReset(): Promise<void> {
    const previous = state;
    clearNotice();
    state = resetSession(state);
    redraw();
    try {
      await api.reset(state.sessionId);
    } catch {
      // server unreachable: keep the transcript the user already had
      state = { ...previous, generation: state.generation };
      showNotice("reset failed: server unreachable; transcript kept");
      redraw();
    }
  }

  async function refreshSchema(): Promise<void> {
    try {
      renderSchema(doc, schemaBody, await api.schema());
    } catch {
      renderSchema(doc, schemaBody, null);
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = input.value;
    input.value = "";
    void sendQuestion(question);
  });
  reset.addEventListener("click", () => {
    lastRequest = doReset();
  });
  schemaRefresh.addEventListener("click", () => {
    lastRequest = refreshSchema();
  });

  const initialSchema = refreshSchema();

  return {
    get state() {
      return state;
    },
    get idle() {
      return Promise.all([lastRequest, initialSchema]).then(() => undefined);
    },
    send: sendQuestion,
    reset: doReset,
    refreshSchema,
  };
}
