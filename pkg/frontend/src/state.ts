/** View state as a pure projection of server transcripts.
 *
 * The UI never invents state: every message bubble, the status banner, and
 * the composer lock are derived from the last confirmed server response, so
 * a refresh rebuilds the identical view from GET /sessions/{id}.
 */

import type { Move, SampleSummary, Transcript, TranscriptMove } from "./api.js";

export interface Message {
  role: "system" | "user";
  text: string;
  kind?: "ask" | "answer";
  confidence?: number;
}

export interface ViewState {
  phase: "idle" | "in_dialogue" | "answered" | "error";
  sessionId: string | null;
  messages: Message[];
  knowledge: string;
  profile: string[];
  request: string;
  finalAnswer: string | null;
  banner: string | null;
  inFlight: boolean;
  composerEnabled: boolean;
  samples: SampleSummary[];
}

export function initialState(): ViewState {
  return {
    phase: "idle",
    sessionId: null,
    messages: [],
    knowledge: "",
    profile: [],
    request: "",
    finalAnswer: null,
    banner: null,
    inFlight: false,
    composerEnabled: false,
    samples: [],
  };
}

export type Action =
  | { type: "samples_loaded"; samples: SampleSummary[] }
  | { type: "request_started" }
  | {
      type: "session_created";
      sessionId: string;
      request: string;
      profile: string[];
      knowledge: string;
      firstMove: Move;
    }
  | { type: "user_replied"; text: string }
  | { type: "move_received"; move: Move }
  | { type: "transcript_loaded"; transcript: Transcript }
  | { type: "request_failed"; message: string }
  | { type: "banner_cleared" };

function moveToMessage(move: Move): Message {
  return { role: "system", text: move.text, kind: move.kind, confidence: move.confidence };
}

function transcriptMessages(moves: TranscriptMove[]): Message[] {
  return moves.map((m) => ({
    role: m.role,
    text: m.text,
    kind: m.kind,
    confidence: m.confidence,
  }));
}

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "samples_loaded":
      return { ...state, samples: action.samples };
    case "request_started":
      return { ...state, inFlight: true, banner: null, composerEnabled: false };
    case "session_created": {
      const answered = action.firstMove.kind === "answer";
      return {
        ...state,
        phase: answered ? "answered" : "in_dialogue",
        sessionId: action.sessionId,
        request: action.request,
        profile: action.profile,
        knowledge: action.knowledge,
        messages: [moveToMessage(action.firstMove)],
        finalAnswer: answered ? action.firstMove.text : null,
        inFlight: false,
        composerEnabled: !answered,
        banner: null,
      };
    }
    case "user_replied":
      return {
        ...state,
        messages: [...state.messages, { role: "user", text: action.text }],
      };
    case "move_received": {
      const answered = action.move.kind === "answer";
      return {
        ...state,
        phase: answered ? "answered" : "in_dialogue",
        messages: [...state.messages, moveToMessage(action.move)],
        finalAnswer: answered ? action.move.text : state.finalAnswer,
        inFlight: false,
        composerEnabled: !answered,
      };
    }
    case "transcript_loaded": {
      const t = action.transcript;
      return {
        ...state,
        phase: t.status === "answered" ? "answered" : "in_dialogue",
        sessionId: t.id,
        request: t.request,
        profile: t.profile,
        knowledge: t.knowledge,
        messages: transcriptMessages(t.moves),
        finalAnswer: t.predicted_answer,
        inFlight: false,
        composerEnabled: t.status === "awaiting_user",
        banner: null,
      };
    }
    case "request_failed":
      return {
        ...state,
        phase: state.sessionId ? state.phase : "error",
        inFlight: false,
        banner: action.message,
        composerEnabled: state.phase === "in_dialogue",
      };
    case "banner_cleared":
      return { ...state, banner: null };
  }
}
