/** Wiring: event handlers dispatch actions, every confirmed server response
 * re-renders. No optimistic updates. */

import { ApiClient, ApiError } from "./api.js";
import { findWidgets, render } from "./render.js";
import { initialState, reduce, type Action, type ViewState } from "./state.js";

function errorMessage(e: unknown): string {
  if (e instanceof ApiError) {
    return e.status === 409 ? "session finished" : e.message;
  }
  return e instanceof Error ? `service unreachable: ${e.message}` : String(e);
}

export function setup(doc: Document, baseUrl: string): { client: ApiClient } {
  const client = new ApiClient(baseUrl);
  const widgets = findWidgets(doc);
  let state: ViewState = initialState();

  const dispatch = (action: Action) => {
    state = reduce(state, action);
    render(state, widgets, doc);
  };

  const startSession = async (body: Parameters<ApiClient["newSession"]>[0]) => {
    if (state.inFlight) return;
    dispatch({ type: "request_started" });
    try {
      const created = await client.newSession(body);
      // the transcript is the source of truth for panel contents
      const t = await client.transcript(created.session_id);
      dispatch({ type: "transcript_loaded", transcript: t });
    } catch (e) {
      dispatch({ type: "request_failed", message: errorMessage(e) });
    }
  };

  const requestInput = doc.querySelector("#request-input") as HTMLInputElement;
  const knowledgeInput = doc.querySelector("#knowledge-input") as HTMLTextAreaElement;
  const profileInput = doc.querySelector("#profile-input") as HTMLTextAreaElement;

  doc.querySelector("#request-send")?.addEventListener("click", () => {
    void startSession({
      request: requestInput.value,
      knowledge: knowledgeInput.value,
      profile: profileInput.value.split("\n").filter((s) => s.trim()),
    });
  });

  widgets.samplePicker.addEventListener("change", () => {
    const value = widgets.samplePicker.value;
    if (value === "") return;
    void startSession({ sample_from: "test", sample_index: Number(value) });
  });

  widgets.composerSend.addEventListener("click", () => {
    void (async () => {
      if (state.inFlight || !state.sessionId) return;
      const text = widgets.composerInput.value.trim();
      if (!text) return;
      dispatch({ type: "request_started" });
      dispatch({ type: "user_replied", text });
      try {
        const result = await client.reply(state.sessionId, text);
        widgets.composerInput.value = "";
        dispatch({ type: "move_received", move: result.next_move });
      } catch (e) {
        dispatch({ type: "request_failed", message: errorMessage(e) });
      }
    })();
  });

  widgets.exportButton.addEventListener("click", () => {
    void (async () => {
      if (!state.sessionId) return;
      try {
        const raw = await client.transcriptRaw(state.sessionId);
        const blob = new Blob([raw], { type: "application/json" });
        const a = doc.createElement("a");
        a.href = URL.createObjectURL(blob);
        a.download = `session-${state.sessionId}.json`;
        a.click();
        URL.revokeObjectURL(a.href);
      } catch (e) {
        dispatch({ type: "request_failed", message: errorMessage(e) });
      }
    })();
  });

  // initial load: health gate + sample list
  void (async () => {
    try {
      await client.health();
      const samples = await client.samples();
      dispatch({ type: "samples_loaded", samples });
    } catch (e) {
      dispatch({ type: "request_failed", message: errorMessage(e) });
      requestInput.disabled = true;
    }
  })();

  render(state, widgets, doc);
  return { client };
}

declare global {
  interface Window {
    SYSASK_BASE_URL?: string;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  const baseUrl = window.SYSASK_BASE_URL ?? "http://127.0.0.1:8000";
  window.addEventListener("DOMContentLoaded", () => setup(document, baseUrl));
}
