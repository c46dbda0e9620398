// Browser entry point. Expects the service to be reachable on the same
// origin (run it behind the same host, or start it with CORS disabled for
// local development).

import { ApiClient } from "./api.js";
import { App, type AppElements } from "./app.js";

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id} in index.html`);
  return element;
}

const elements: AppElements = {
  dialogue: requireElement("dialogue"),
  graph: requireElement("graph"),
  navigator: requireElement("navigator"),
  popup: requireElement("popup"),
};

const baseUrl = new URLSearchParams(location.search).get("api") ?? "";
const sessionId = new URLSearchParams(location.search).get("session") ?? undefined;

const app = new App(new ApiClient(baseUrl), elements);
app.start(sessionId).catch((error) => {
  elements.dialogue.textContent = `failed to start: ${error}`;
});

declare global {
  interface Window {
    kgchat: App;
  }
}
window.kgchat = app;
