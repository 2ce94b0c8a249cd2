// Change-history view: one card per event, newest first, with the server's
// classification shown as a badge and successor URIs rendered as links so a
// reader can follow a deprecated term forward.

import type { ChangeEventWire, HistoryBatch } from "./types.js";
import { esc } from "./render.js";

export interface HistoryCard {
  version: number;
  kind: string;
  subject: string;
  badge: string; // "NonSemantic" | "Semantic" | "NeedsConfirmation" | ""
  lines: string[];
  successors: string[];
  timestamp: string;
  author: string;
}

function successorsOf(event: ChangeEventWire): string[] {
  switch (event.kind) {
    case "ConceptSplit":
      return event.concept_uris.slice(1);
    case "ConceptMerged":
      return event.concept_uris.slice(-1);
    case "ConceptUpdated":
      // A semantic update names the replacement URI after the subject.
      return event.concept_uris.length > 1 ? event.concept_uris.slice(1) : [];
    default:
      return [];
  }
}

export function toCard(event: ChangeEventWire): HistoryCard {
  return {
    version: event.version,
    kind: event.kind,
    subject: event.concept_uris[0] ?? event.scheme_id,
    badge: event.classification?.outcome ?? "",
    lines: event.items.map((i) => {
      const delta =
        i.op === "add" ? `+ ${i.new}` : i.op === "remove" ? `- ${i.old}` : `${i.old} -> ${i.new}`;
      return `${i.field}: ${delta}`;
    }),
    successors: successorsOf(event),
    timestamp: event.timestamp,
    author: event.author,
  };
}

export function toCards(batches: HistoryBatch[]): HistoryCard[] {
  const cards: HistoryCard[] = [];
  for (const batch of batches) {
    for (const event of batch.events) cards.push(toCard(event));
  }
  cards.reverse();
  return cards;
}

export function renderCard(card: HistoryCard): string {
  const badge = card.badge
    ? `<span class="badge badge-${card.badge.toLowerCase()}">${esc(card.badge)}</span>`
    : "";
  const successors = card.successors
    .map((uri) => `<a class="successor" href="#concept/${encodeURIComponent(uri)}">${esc(uri)}</a>`)
    .join(" ");
  const lines = card.lines.map((l) => `<li>${esc(l)}</li>`).join("");
  return [
    `<article class="history-card" data-version="${card.version}">`,
    `<header>v${card.version} ${esc(card.kind)} ${badge}</header>`,
    `<p class="subject">${esc(card.subject)}</p>`,
    lines ? `<ul>${lines}</ul>` : "",
    successors ? `<p class="successors">now: ${successors}</p>` : "",
    `<footer>${esc(card.author)} at ${esc(card.timestamp)}</footer>`,
    `</article>`,
  ]
    .filter(Boolean)
    .join("\n");
}

export function renderHistory(batches: HistoryBatch[]): string {
  const cards = toCards(batches);
  if (!cards.length) return `<p class="empty">no changes yet</p>`;
  return cards.map(renderCard).join("\n");
}
