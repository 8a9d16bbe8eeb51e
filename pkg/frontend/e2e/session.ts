/** Scripted end-to-end session against a live service.
 *
 * Drives the same client/state code the browser uses: picks a test sample
 * with two gold clarification turns, answers each clarification, and checks
 * that the dialogue completes with exactly two clarifications, the final
 * answer is rendered in the view state, and the exported transcript equals
 * GET /sessions/{id} byte for byte.
 *
 * Usage: node dist/e2e/session.js [base-url]   (default http://127.0.0.1:8000)
 */

import { ApiClient } from "../src/api.js";
import { initialState, reduce, type ViewState } from "../src/state.js";

const baseUrl = process.argv[2] ?? "http://127.0.0.1:8000";

function fail(message: string): never {
  console.error(`FAIL: ${message}`);
  process.exit(1);
}

function check(cond: boolean, message: string): void {
  if (!cond) fail(message);
  console.log(`ok: ${message}`);
}

async function runSession(
  client: ApiClient,
  sampleIndex: number,
): Promise<{ state: ViewState; sessionId: string; asks: number }> {
  let state = initialState();
  const created = await client.newSession({
    sample_from: "test",
    sample_index: sampleIndex,
  });
  const transcript = await client.transcript(created.session_id);
  state = reduce(state, { type: "transcript_loaded", transcript });

  let asks = 0;
  for (let step = 0; step < 12 && state.phase !== "answered"; step++) {
    if (!state.composerEnabled) fail("composer disabled while awaiting user");
    asks += 1;
    state = reduce(state, { type: "request_started" });
    state = reduce(state, { type: "user_replied", text: "Yes" });
    const result = await client.reply(created.session_id, "Yes");
    state = reduce(state, { type: "move_received", move: result.next_move });
  }
  return { state, sessionId: created.session_id, asks };
}

async function main(): Promise<void> {
  const client = new ApiClient(baseUrl);
  await client.health().catch(() => fail(`service not reachable at ${baseUrl}`));

  const samples = await client.samples();
  const twoTurn = samples.filter((s) => s.gold_k === 2);
  check(twoTurn.length > 0, "test split offers samples with two gold turns");

  let run: Awaited<ReturnType<typeof runSession>> | null = null;
  for (const sample of twoTurn) {
    const attempt = await runSession(client, sample.index);
    if (attempt.state.phase === "answered" && attempt.asks === 2) {
      run = attempt;
      break;
    }
  }
  if (!run) fail("no two-gold-turn sample produced a 2-clarification dialogue");

  const { state, sessionId, asks } = run;
  check(asks === 2, "dialogue completed with exactly 2 clarifications");
  check(state.phase === "answered", "session reached the answered phase");
  check(state.finalAnswer !== null, `final answer rendered: ${state.finalAnswer}`);
  check(
    state.messages.filter((m) => m.role === "system" && m.kind === "ask").length === 2,
    "view shows two system clarification bubbles",
  );
  check(
    state.messages.at(-1)?.kind === "answer",
    "view ends with the answer bubble",
  );

  // export byte-identity: two raw fetches of the transcript must agree,
  // which is exactly what the export button downloads
  const exported = await client.transcriptRaw(sessionId);
  const direct = await client.transcriptRaw(sessionId);
  check(exported === direct, "exported transcript equals GET /sessions/{id} bytes");
  const parsed = JSON.parse(exported);
  check(parsed.predicted_answer === state.finalAnswer, "export carries the final answer");
  check(parsed.predicted_k === 2, "export records predicted_k = 2");

  console.log("e2e session PASS");
}

main().catch((e) => fail(e instanceof Error ? e.message : String(e)));
