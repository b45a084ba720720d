import { StudyApi } from "./api.js";
import { render } from "./render.js";
import { SessionController } from "./state.js";

function sessionIdFromUrl(): string | null {
  return new URLSearchParams(window.location.search).get("session");
}

function rememberSession(sessionId: string): void {
  const url = new URL(window.location.href);
  url.searchParams.set("session", sessionId);
  window.history.replaceState(null, "", url.toString());
}

function main(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const api = new StudyApi("");
  const controller = new SessionController(api, (state) => render(root, state, controller));

  const existing = sessionIdFromUrl();
  if (existing) {
    void controller.resume(existing);
    return;
  }

  // minimal rater bootstrap: ask once, keep the session id in the URL so
  // a reload resumes instead of re-sampling a queue
  const raterId =
    window.localStorage.getItem("rater_id") ||
    window.prompt("Enter your rater id") ||
    `rater-${Math.random().toString(36).slice(2, 8)}`;
  window.localStorage.setItem("rater_id", raterId);
  controller
    .start(raterId)
    .then(rememberSession)
    .catch(() => {
      // error already rendered by the controller
    });
}

main();
