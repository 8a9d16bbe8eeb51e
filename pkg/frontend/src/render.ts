/** DOM rendering: rebuild the visible widgets from a ViewState snapshot. */

import type { ViewState } from "./state.js";

export interface Widgets {
  banner: HTMLElement;
  messages: HTMLElement;
  knowledgePanel: HTMLElement;
  profilePanel: HTMLElement;
  requestForm: HTMLElement;
  composer: HTMLElement;
  composerInput: HTMLInputElement;
  composerSend: HTMLButtonElement;
  finalCard: HTMLElement;
  samplePicker: HTMLSelectElement;
  exportButton: HTMLButtonElement;
}

export function findWidgets(root: Document | HTMLElement): Widgets {
  const byId = (id: string) => {
    const el = (root as Document).querySelector
      ? (root as Document).querySelector(`#${id}`)
      : null;
    if (!el) throw new Error(`missing element #${id}`);
    return el as HTMLElement;
  };
  return {
    banner: byId("banner"),
    messages: byId("messages"),
    knowledgePanel: byId("knowledge-panel"),
    profilePanel: byId("profile-panel"),
    requestForm: byId("request-form"),
    composer: byId("composer"),
    composerInput: byId("composer-input") as HTMLInputElement,
    composerSend: byId("composer-send") as HTMLButtonElement,
    finalCard: byId("final-card"),
    samplePicker: byId("sample-picker") as HTMLSelectElement,
    exportButton: byId("export-button") as HTMLButtonElement,
  };
}

function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

function bubble(doc: Document, role: string, text: string, badge?: string): HTMLElement {
  const el = doc.createElement("div");
  el.className = `bubble bubble-${role}`;
  const body = doc.createElement("span");
  body.className = "bubble-text";
  body.textContent = text;
  el.appendChild(body);
  if (badge !== undefined) {
    const b = doc.createElement("span");
    b.className = "confidence-badge";
    b.textContent = badge;
    el.appendChild(b);
  }
  return el;
}

export function render(state: ViewState, widgets: Widgets, doc: Document): void {
  // banner
  widgets.banner.textContent = state.banner ?? "";
  widgets.banner.style.display = state.banner ? "block" : "none";

  // side panel
  widgets.knowledgePanel.textContent = state.knowledge;
  clear(widgets.profilePanel);
  for (const sentence of state.profile) {
    const li = doc.createElement("li");
    li.textContent = sentence;
    widgets.profilePanel.appendChild(li);
  }

  // transcript
  clear(widgets.messages);
  if (state.request) {
    widgets.messages.appendChild(bubble(doc, "user", state.request));
  }
  for (const m of state.messages) {
    const badge =
      m.role === "system" && m.confidence !== undefined
        ? `${m.kind} · conf ${m.confidence.toFixed(2)}`
        : undefined;
    widgets.messages.appendChild(bubble(doc, m.role, m.text, badge));
  }

  // final answer card
  if (state.phase === "answered" && state.finalAnswer !== null) {
    widgets.finalCard.textContent = `Final answer: ${state.finalAnswer}`;
    widgets.finalCard.style.display = "block";
  } else {
    widgets.finalCard.textContent = "";
    widgets.finalCard.style.display = "none";
  }

  // request form visible only before a session starts
  widgets.requestForm.style.display = state.sessionId ? "none" : "block";

  // composer: enabled only when the server awaits the user and nothing is
  // in flight (double-submit guard)
  const composerOn = state.composerEnabled && !state.inFlight;
  widgets.composer.style.display = state.sessionId ? "flex" : "none";
  widgets.composerInput.disabled = !composerOn;
  widgets.composerSend.disabled = !composerOn;
  widgets.exportButton.disabled = state.sessionId === null;

  // sample picker
  if (widgets.samplePicker.options.length !== state.samples.length + 1) {
    clear(widgets.samplePicker);
    const blank = doc.createElement("option");
    blank.value = "";
    blank.textContent = "pick a test sample...";
    widgets.samplePicker.appendChild(blank);
    for (const s of state.samples) {
      const opt = doc.createElement("option");
      opt.value = String(s.index);
      opt.textContent = `#${s.index} (${s.gold_k} turns) ${s.request}`;
      widgets.samplePicker.appendChild(opt);
    }
  }
}
