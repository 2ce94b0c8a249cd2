// Scheme browser: the read-only entry point.  Lists hosted schemes and
// harvested copies, filters by a substring query, and shows a scheme's
// concepts with deprecated terms visibly set apart.

import { ApiClient, ApiError } from "./api.js";
import type { ConceptWire, SchemeSummary } from "./types.js";
import { errorBanner, esc } from "./render.js";

export function renderSchemeRow(s: SchemeSummary): string {
  const name = s.token ?? s.id;
  const tag = s.hosted ? "" : ` <span class="copy-tag">copy of ${esc(s.source ?? "?")}</span>`;
  const counts = s.hosted ? `v${s.version}, ${s.concepts} concepts` : `seq ${s.seq}`;
  return (
    `<tr class="scheme-row" data-token="${esc(name)}">` +
    `<td><a href="#scheme/${encodeURIComponent(name)}">${esc(s.title)}</a>${tag}</td>` +
    `<td>${esc(s.scheme_uri)}</td><td>${counts}</td></tr>`
  );
}

export function renderSchemeRows(schemes: SchemeSummary[]): string {
  if (!schemes.length) return `<p class="empty">nothing matches</p>`;
  return `<table class="schemes"><tbody>${schemes.map(renderSchemeRow).join("")}</tbody></table>`;
}

export function renderConceptItem(c: ConceptWire): string {
  const label =
    c.pref_labels["en"] ?? Object.values(c.pref_labels)[0] ?? c.uri.split("/").pop() ?? c.uri;
  const deprecated = c.status === "deprecated";
  const cls = deprecated ? "concept deprecated" : "concept";
  const badge = deprecated ? ` <span class="badge badge-deprecated">deprecated</span>` : "";
  const onwards = c.replaced_by.length
    ? ` <span class="replaced-by">see ${c.replaced_by.map(esc).join(", ")}</span>`
    : "";
  return (
    `<li class="${cls}" data-uri="${esc(c.uri)}">` +
    `<a href="#concept/${encodeURIComponent(c.uri)}">${esc(label)}</a>${badge}${onwards}</li>`
  );
}

export function renderConceptList(concepts: ConceptWire[]): string {
  const sorted = [...concepts].sort((a, b) => (a.uri < b.uri ? -1 : 1));
  return `<ul class="concepts">${sorted.map(renderConceptItem).join("")}</ul>`;
}

export class SchemeBrowser {
  constructor(private readonly api: ApiClient) {}

  async schemeListHtml(query?: string): Promise<string> {
    try {
      return renderSchemeRows(await this.api.listSchemes(query));
    } catch (err) {
      return errorBanner(describe(err));
    }
  }

  async conceptListHtml(token: string): Promise<string> {
    try {
      const state = await this.api.getSchemeState(token);
      return renderConceptList(Object.values(state.concepts));
    } catch (err) {
      return errorBanner(describe(err));
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError && err.status === 0) return "registry unreachable";
  if (err instanceof ApiError) return `registry said ${err.status}: ${err.code}`;
  return String(err);
}
