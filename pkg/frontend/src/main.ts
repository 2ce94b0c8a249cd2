// Browser entry point.  A small hash router over the view modules; no
// framework, no storage: the session (agent id + API token) lives in memory
// and dies with the tab, which is the right lifetime for a bearer token.

import { ApiClient, ApiError } from "./api.js";
import { SchemeBrowser } from "./browser.js";
import { ConceptEditor, SaveResult } from "./editor.js";
import { renderHistory } from "./history.js";
import { ConfirmationInbox } from "./inbox.js";
import { errorBanner, esc } from "./render.js";
import { SubscriptionManager } from "./subscriptions.js";
import type { ChangeItemWire, MaintainerAssertion } from "./types.js";

const api = new ApiClient(resolveBaseUrl());
const browser = new SchemeBrowser(api);
const inbox = new ConfirmationInbox(api);
const subscriptions = new SubscriptionManager(api);

function resolveBaseUrl(): string {
  const meta = document.querySelector('meta[name="registry-base"]');
  return meta?.getAttribute("content") || "http://127.0.0.1:8000";
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function nav(): string {
  const who = api.agentId ? `signed in as ${esc(api.agentId)}` : `<a href="#register">sign in</a>`;
  return [
    `<nav>`,
    `<a href="#">schemes</a>`,
    `<a href="#inbox">confirmations</a>`,
    `<a href="#subscriptions">subscriptions</a>`,
    `<span class="session">${who}</span>`,
    `</nav>`,
  ].join(" ");
}

async function render(): Promise<void> {
  const app = el("app");
  const hash = decodeURIComponent(location.hash.replace(/^#/, ""));
  const [view, ...rest] = hash.split("/");
  const arg = rest.join("/");
  try {
    app.innerHTML = nav() + (await page(view, arg));
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    app.innerHTML = nav() + errorBanner(detail);
  }
  wireButtons(app);
}

async function page(view: string, arg: string): Promise<string> {
  switch (view) {
    case "":
      return (
        `<input id="q" type="search" placeholder="filter schemes">` +
        `<div id="scheme-list">${await browser.schemeListHtml()}</div>`
      );
    case "scheme":
      return (
        `<h1>${esc(arg)}</h1><p><a href="#history/${encodeURIComponent(arg)}">history</a></p>` +
        (await browser.conceptListHtml(arg))
      );
    case "history":
      return `<h1>history of ${esc(arg)}</h1>` + renderHistory(await api.history(arg));
    case "concept":
      return conceptPage(arg);
    case "inbox":
      return await inbox.html();
    case "subscriptions":
      return (await subscriptions.listHtml()) + `<h2>notifications</h2>` +
        (await subscriptions.notificationsHtml());
    case "register":
      return (
        `<form id="register-form">` +
        `<input name="name" placeholder="your name" required>` +
        `<button type="submit">register</button></form>`
      );
    default:
      return errorBanner(`no view ${view}`);
  }
}

// The concept page needs the scheme token to address the edit endpoints;
// we keep it in the query half of the hash: #concept/<uri>?scheme=<token>.
async function conceptPage(arg: string): Promise<string> {
  const [uri, query = ""] = arg.split("?");
  const scheme = new URLSearchParams(query).get("scheme") ?? "";
  if (!scheme) return errorBanner("concept links need ?scheme=<token>");
  const concept = await api.getConcept(scheme, uri);
  const rows = Object.entries(concept.definition)
    .map(([lang, text]) => `<dt>definition@${esc(lang)}</dt><dd>${esc(text)}</dd>`)
    .join("");
  return [
    `<h1>${esc(uri)}</h1>`,
    concept.status === "deprecated" ? `<p class="badge badge-deprecated">deprecated</p>` : "",
    `<dl>${rows}</dl>`,
    `<form id="edit-form" data-scheme="${esc(scheme)}" data-key="${esc(uri)}">`,
    `<label>definition@en <textarea name="definition">${esc(
      concept.definition["en"] ?? "",
    )}</textarea></label>`,
    `<button type="submit">save</button>`,
    `</form>`,
    `<div id="dialog"></div>`,
  ].join("\n");
}

function wireButtons(app: HTMLElement): void {
  const q = app.querySelector<HTMLInputElement>("#q");
  q?.addEventListener("input", async () => {
    el("scheme-list").innerHTML = await browser.schemeListHtml(q.value || undefined);
  });

  app.querySelector<HTMLFormElement>("#register-form")?.addEventListener("submit", async (e) => {
    e.preventDefault();
    const name = String(new FormData(e.target as HTMLFormElement).get("name") ?? "someone");
    await api.register(name, "individual", [{ label: "name", address: name }]);
    location.hash = "";
    await render();
  });

  app.querySelectorAll<HTMLButtonElement>("button[data-answer]").forEach((btn) =>
    btn.addEventListener("click", async () => {
      const out = await inbox.resolve(btn.dataset.token ?? "", btn.dataset.answer as "yes" | "no");
      const note = out.kind === "resolved" ? out.message : "handled elsewhere";
      btn.closest("article")!.outerHTML = `<p class="resolved">${esc(note)}</p>`;
    }),
  );

  app.querySelectorAll<HTMLButtonElement>("button[data-unsubscribe]").forEach((btn) =>
    btn.addEventListener("click", async () => {
      await subscriptions.unsubscribe(btn.dataset.unsubscribe ?? "");
      await render();
    }),
  );

  app.querySelector<HTMLFormElement>("#edit-form")?.addEventListener("submit", async (e) => {
    e.preventDefault();
    const form = e.target as HTMLFormElement;
    const editor = new ConceptEditor(api, form.dataset.scheme ?? "", form.dataset.key ?? "");
    const current = await editor.load();
    const text = String(new FormData(form).get("definition") ?? "");
    const old = current.definition["en"];
    if (old === text) return presentSave({ kind: "no-change" });
    const items: ChangeItemWire[] =
      old === undefined
        ? [{ field: "definition@en", op: "add", new: text }]
        : [{ field: "definition@en", op: "modify", old, new: text }];
    await presentSave(await editor.save(items));
  });
}

async function presentSave(result: SaveResult): Promise<void> {
  const dialog = el("dialog");
  switch (result.kind) {
    case "saved":
      dialog.innerHTML = `<p class="saved">saved; scheme at v${result.outcome.version}${
        result.outcome.new_uri ? `, successor ${esc(result.outcome.new_uri)}` : ""
      }</p>`;
      return;
    case "no-change":
      dialog.innerHTML = `<p class="saved">nothing changed</p>`;
      return;
    case "new-uri-dialog": {
      dialog.innerHTML =
        `<div class="modal"><p>${esc(result.warning)}</p>` +
        `<button id="proceed">proceed</button> <button id="cancel">cancel</button></div>`;
      el("proceed").addEventListener("click", async () => presentSave(await result.proceed()));
      el("cancel").addEventListener("click", () => presentSave(result.cancel()));
      return;
    }
    case "assertion-prompt": {
      const questions = result.questions.map((q) => `<p class="question">${esc(q)}</p>`).join("");
      dialog.innerHTML =
        `<div class="modal">${questions}` +
        `<label><input type="radio" name="assert" value="clarification" checked> just a clarification</label>` +
        `<label><input type="radio" name="assert" value="meaning_change"> the meaning changed</label>` +
        `<button id="assert-go">continue</button></div>`;
      el("assert-go").addEventListener("click", async () => {
        const choice = dialog.querySelector<HTMLInputElement>("input[name=assert]:checked");
        const assertion = (choice?.value ?? "clarification") as MaintainerAssertion;
        presentSave(await result.answer(assertion));
      });
      return;
    }
    case "conflict":
      dialog.innerHTML = errorBanner(`someone else committed first; scheme is at v${result.actual}`);
      return;
    case "invalid":
      dialog.innerHTML = errorBanner(result.lines.join("; "));
      return;
    case "read-only":
      dialog.innerHTML = errorBanner("you are not a maintainer of this scheme");
      return;
    case "cancelled":
      dialog.innerHTML = `<p class="saved">edit kept local; nothing committed</p>`;
      return;
  }
}

window.addEventListener("hashchange", render);
void render();
