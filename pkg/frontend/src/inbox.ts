// Confirmation inbox.  Pending tickets are edits the classifier could not
// decide on its own; each row shows the server's question verbatim, and the
// yes/no buttons call the same one-click resolver the notification emails
// link to.  Tokens are single use: if someone else already answered, the
// registry replies 410 and the row is reported as handled elsewhere.

import { ApiClient, ApiError } from "./api.js";
import type { TicketRow } from "./types.js";
import { esc } from "./render.js";

export type ResolveOutcome =
  | { kind: "resolved"; message: string }
  | { kind: "handled-elsewhere" };

export function renderTicketRow(t: TicketRow): string {
  const items = t.pending.items
    .map((i) => `<li>${esc(i.field)} ${esc(i.op)}</li>`)
    .join("");
  return [
    `<article class="ticket" data-token="${esc(t.token)}">`,
    `<p class="question">${esc(t.question)}</p>`,
    `<p class="pending-uri">${esc(t.pending.uri)}</p>`,
    `<ul class="pending-items">${items}</ul>`,
    `<p class="deadline">expires ${esc(t.expires_at)}</p>`,
    `<button data-answer="yes" data-token="${esc(t.token)}">yes</button>`,
    `<button data-answer="no" data-token="${esc(t.token)}">no</button>`,
    `</article>`,
  ].join("\n");
}

export class ConfirmationInbox {
  constructor(private readonly api: ApiClient) {}

  rows(): Promise<TicketRow[]> {
    return this.api.listTickets();
  }

  async html(): Promise<string> {
    const rows = await this.rows();
    if (!rows.length) return `<p class="empty">no pending confirmations</p>`;
    return rows.map(renderTicketRow).join("\n");
  }

  async resolve(token: string, answer: "yes" | "no"): Promise<ResolveOutcome> {
    try {
      const message = await this.api.resolveTicket(token, answer);
      return { kind: "resolved", message };
    } catch (err) {
      // Used and expired tokens both answer 410; either way the decision was
      // taken out of this tab's hands.
      if (err instanceof ApiError && err.status === 410) return { kind: "handled-elsewhere" };
      throw err;
    }
  }
}
