/** Entry point: attach to ?session=<id>, or list sessions to pick from. */

import { Client } from "./api.js";
import { LabelingConsole } from "./console.js";
import { bindKeyboard } from "./keyboard.js";

const POLL_MS = 3000;

async function showPicker(root: HTMLElement, client: Client): Promise<void> {
  try {
    const sessions = await client.listSessions();
    if (sessions.length === 0) {
      root.innerHTML = `<div class="banner">no sessions yet — create one via POST /sessions</div>`;
      return;
    }
    const rows = sessions
      .map(
        (s) =>
          `<li><a href="?session=${s.session_id}">${s.session_id}</a> — ` +
          `${s.status}, round ${s.round}/${s.rounds_total}, ${s.labeled_count}/${s.budget} labeled</li>`,
      )
      .join("");
    root.innerHTML = `<h1>labeling sessions</h1><ul class="session-list">${rows}</ul>`;
  } catch {
    root.innerHTML = `<div class="banner banner-offline">server unreachable</div>`;
  }
}

export async function boot(root: HTMLElement, baseUrl = ""): Promise<LabelingConsole | null> {
  const client = new Client(baseUrl);
  const sessionId = new URLSearchParams(window.location.search).get("session");
  if (!sessionId) {
    await showPicker(root, client);
    return null;
  }
  const console_ = new LabelingConsole(root, client, sessionId);
  await console_.start();
  const session = await client.getSession(sessionId).catch(() => null);
  if (session) {
    bindKeyboard(window, console_, session.class_names.length);
  }
  // poll so a dashboard left open tracks progress made elsewhere, without
  // yanking the queue out from under an active annotator
  window.setInterval(() => {
    if (console_.status() !== "complete" && console_.idle()) {
      void console_.refresh();
    }
  }, POLL_MS);
  return console_;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app")!);
}
